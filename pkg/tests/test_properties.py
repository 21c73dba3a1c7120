import math
import random
from fractions import Fraction
from itertools import product

from hypothesis import given, settings
from hypothesis import strategies as st

from ergoforge.cocycles import coboundary_from, cocycle_defect, cocycle_violations, extend_free_cochain, skew_product
from ergoforge.coupling import (
    canonical_window,
    coupling_marginals,
    is_comonotone,
    monotone_coupling,
    psi_pair,
    rerandomize,
)
from ergoforge.documents import fmt_rational, rational
from ergoforge.groups import FiniteGroup, GroupContext, cayley_ball
from ergoforge.measures import WindowMeasure, entropy, join, pushforward_distribution, relative_entropy
from ergoforge.trees import retract

from builders import random_action, random_tree, random_window_cochain, random_window_cocycle
from oracles import act, coupling_oracle, entropy_oracle, pattern

F1 = GroupContext.free(1)
F2 = GroupContext.free(2)
SYM2 = FiniteGroup.symmetric(2)
SYM3 = FiniteGroup.symmetric(3)
BALL1 = canonical_window(F2, list(cayley_ball(F2, 1)))

seeds = st.integers(0, 2**32 - 1)
words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8)


def _reduce(letters):
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@st.composite
def window_measures(draw, window_size=None, p=2):
    n = draw(st.integers(1, 3)) if window_size is None else window_size
    W = BALL1[:n]
    cfgs = list(product(range(p), repeat=n))
    raw = draw(st.lists(st.integers(0, 6), min_size=len(cfgs), max_size=len(cfgs)))
    if not any(raw):
        raw[0] = 1
    total = sum(raw)
    return WindowMeasure(W, p, {c: Fraction(r, total) for c, r in zip(cfgs, raw) if r})


@st.composite
def measure_pairs(draw):
    n = draw(st.integers(1, 3))
    return draw(window_measures(n)), draw(window_measures(n))


# groups


@given(words, words, words)
def test_free_multiplication_associative(x, y, z):
    g, h, k = _reduce(x), _reduce(y), _reduce(z)
    assert F2.multiply(F2.multiply(g, h), k) == F2.multiply(g, F2.multiply(h, k))


@given(words)
def test_free_inverse(x):
    g = _reduce(x)
    assert F2.multiply(g, F2.inverse(g)) == F2.identity
    assert F2.parse(F2.format(g)) == g


@given(words, words)
def test_free_multiply_matches_concatenation(x, y):
    assert F2.multiply(_reduce(x), _reduce(y)) == _reduce(x + y)


# coupling


@given(measure_pairs())
def test_coupling_marginals_exact(pair):
    k0, k1 = pair
    joint = monotone_coupling(k1, k0)
    m0, m1 = coupling_marginals(joint)
    assert m0 == k0.weights and m1 == k1.weights
    assert is_comonotone(joint)
    assert joint.weights == coupling_oracle(k0.items(), k1.items())


@given(window_measures())
def test_coupling_with_itself_is_diagonal(k):
    joint = monotone_coupling(k, k)
    assert all(z0 == z1 for z0, z1 in joint.weights)
    assert psi_pair(k, k).is_identity_ae()


@given(window_measures(3), seeds)
def test_rerandomize_keeps_class_marginals(om, seed):
    W = om.window
    F = random_tree(F2, W, random.Random(seed), keep=0.5)
    out = rerandomize(om, F)
    for C in F.components().classes:
        assert out.marginal(list(C)) == om.marginal(list(C))
    assert rerandomize(out, F) == out


# cocycles


@given(seeds)
@settings(max_examples=40)
def test_coboundaries_are_cocycles(seed):
    rng = random.Random(seed)
    a = random_action(F2, rng.randrange(1, 6), rng)
    f = [rng.randrange(SYM3.order) for _ in range(a.n)]
    support = list(cayley_ball(F2, 2))
    assert cocycle_defect(coboundary_from(a, f, SYM3, support)) == 0


@given(seeds)
@settings(max_examples=40)
def test_generator_extensions_are_cocycles(seed):
    rng = random.Random(seed)
    a = random_action(F2, rng.randrange(1, 6), rng)
    assignment = [[rng.randrange(SYM3.order) for _ in range(a.n)] for _ in range(2)]
    sigma = extend_free_cochain(a, SYM3, assignment, list(cayley_ball(F2, 2)))
    assert cocycle_defect(sigma) == 0
    assert not cocycle_violations(sigma)


@given(seeds)
@settings(max_examples=30)
def test_skew_product_preserves_measure(seed):
    rng = random.Random(seed)
    a = random_action(F2, rng.randrange(1, 5), rng, den=4)
    assignment = [[rng.randrange(SYM2.order) for _ in range(a.n)] for _ in range(2)]
    ext = skew_product(extend_free_cochain(a, SYM2, assignment, F2.generators()))
    src = ext.source
    for p in src.perms:
        assert all(src.weights[p[y]] == src.weights[y] for y in range(src.n))
    for g in cayley_ball(F2, 2):
        assert all(ext.phi[act(src, g, y)] == act(a, g, ext.phi[y]) for y in range(src.n))


# trees


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_retract_fixes_cocycles(seed):
    rng = random.Random(seed)
    V = list(cayley_ball(F2, 1))
    c = random_window_cocycle(F2, SYM3, V, rng)
    T = random_tree(F2, V, rng)
    r = retract(T, c)
    assert all(r(*k) == c(*k) for k in r.values)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_retract_is_idempotent(seed):
    rng = random.Random(seed)
    V = list(cayley_ball(F2, 1))
    c = random_window_cochain(F2, SYM3, V, rng)
    T = random_tree(F2, V, rng)
    once = retract(T, c)
    assert retract(T, once) == once


# measures


@given(seeds)
def test_entropy_chain_rule(seed):
    rng = random.Random(seed)
    n = rng.randrange(1, 9)
    raw = [rng.randrange(1, 7) for _ in range(n)]
    w = [Fraction(r, sum(raw)) for r in raw]
    alpha = [rng.randrange(3) for _ in range(n)]
    beta = [rng.randrange(2) for _ in range(n)]
    cond = 0.0
    for b in set(beta):
        mb = sum(w[x] for x in range(n) if beta[x] == b)
        masses = [sum((w[x] for x in range(n) if beta[x] == b and alpha[x] == i), Fraction(0)) / mb for i in range(3)]
        cond += float(mb) * entropy_oracle(masses)
    assert math.isclose(relative_entropy(w, alpha, beta), cond, abs_tol=1e-12)
    assert math.isclose(entropy(w, join(alpha, beta)), entropy(w, beta) + cond, abs_tol=1e-12)
    assert entropy(w, alpha) <= math.log(3) + 1e-12


@given(st.integers(1, 40))
def test_entropy_uniform(k):
    assert math.isclose(entropy([Fraction(1, k)] * k, list(range(k))), math.log(k), abs_tol=1e-12)


@given(seeds)
def test_pushforward_matches_patterns(seed):
    rng = random.Random(seed)
    a = random_action(F1, rng.randrange(1, 6), rng, den=3)
    alpha = [rng.randrange(2) for _ in range(a.n)]
    F = [F1.identity, F1.generator(0), F1.parse("a^-2")]
    dist = pushforward_distribution(a, alpha, F)
    expected = {}
    for x in range(a.n):
        key = pattern(a, alpha, F, x)
        expected[key] = expected.get(key, 0) + a.weights[x]
    assert dist.weights == expected
    assert sum(dist.weights.values()) == 1


# documents


@given(st.fractions())
def test_rational_round_trip(x):
    assert rational(fmt_rational(x), "x") == x

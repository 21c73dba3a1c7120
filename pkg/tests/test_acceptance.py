"""The thirteen acceptance criteria, each timed and reported on one line."""

import math
import random
from fractions import Fraction
from itertools import product

from acceptance_log import criterion
from builders import (
    random_action,
    random_cayley_tree,
    random_family,
    random_labels,
    random_rational_measure,
    random_skew_extension,
    random_tree,
    random_window_cochain,
    random_window_cocycle,
    sparse_measure,
)
from cli_cases import CASES, run_cli
from oracles import (
    act,
    cocycle_identity_holds,
    coupling_oracle,
    criterion_oracle,
    ec_lemma_oracle,
    entropy_oracle,
    finite_ext_oracle,
    skew_oracle,
)

from ergoforge.cocycles import (
    Cochain,
    coboundary_density_search,
    coboundary_from,
    coboundary_trivialising_map,
    cocycle_defect,
    extend_free_cochain,
    skew_product,
    trivial_extension,
)
from ergoforge.coinduction import (
    SubgroupAction,
    coinduce,
    factor_equivariant,
    is_invariant,
    projection_equivariant,
)
from ergoforge.coupling import (
    JointMeasure,
    Kernel,
    WindowMeasureFamily,
    canonical_window,
    compose_pairs,
    coupling_marginals,
    edge_transport,
    forest_measure,
    is_comonotone,
    monotone_coupling,
    path_transport,
    psi_pair,
    rerandomize,
    reverse_transport,
    xi_construct,
    zeta_construct,
)
from ergoforge.ec import (
    BernoulliShift,
    Cylinder,
    ECQuery,
    ec_criterion_search,
    ec_lemma_search,
    finite_ext_ec_search,
    joint_pattern,
    mixing_defect,
)
from ergoforge.groups import FiniteGroup, GroupContext, QuotientData, cayley_ball
from ergoforge.measures import FiniteAction, Labeling, entropy, join, relative_entropy
from ergoforge.trees import retract

F2 = GroupContext.free(2)
SYM2 = FiniteGroup.symmetric(2)
SYM3 = FiniteGroup.symmetric(3)


def ball(ctx, r):
    return canonical_window(ctx, list(cayley_ball(ctx, r)))


def test_criterion_01_retraction_fixes_cocycles():
    rng = random.Random(101)
    V = list(cayley_ball(F2, 3))
    cases = [(random_window_cocycle(F2, SYM3, V, rng), random_cayley_tree(F2, V, rng)) for _ in range(100)]
    with criterion(1, "retraction leaves 100 window cocycles unchanged", 5):
        for c, T in cases:
            r = retract(T, c)
            assert len(r.values) == len(V) ** 2
            assert all(r(*k) == c(*k) for k in r.values)


def test_criterion_02_retraction_equivariance():
    rng = random.Random(102)
    V = list(cayley_ball(F2, 2))
    big = list(cayley_ball(F2, 3))
    shifts = list(cayley_ball(F2, 1))
    cases = []
    for _ in range(50):
        c = random_window_cochain(F2, SYM3, big, rng)
        cases.append((random_tree(F2, V, rng, keep=rng.uniform(0.3, 1)), c, rng.choice(shifts)))
    with criterion(2, "retraction commutes with translation on 50 triples", 5):
        for T, c, g in cases:
            assert retract(T.translate(g), c.t_action(g)) == retract(T, c).t_action(g)


def test_criterion_03_monotone_coupling():
    rng = random.Random(103)
    W = ball(F2, 1)
    with criterion(3, "monotone coupling marginals, comonotonicity, diagonal", 5):
        for _ in range(200):
            window = W[: rng.randrange(1, 4)]
            k0 = random_rational_measure(window, 2, rng)
            k1 = random_rational_measure(window, 2, rng)
            joint = monotone_coupling(k1, k0)
            m0, m1 = coupling_marginals(joint)
            assert m0 == k0.weights and m1 == k1.weights
            assert is_comonotone(joint)
            assert joint.weights == coupling_oracle(k0.items(), k1.items())
            diag = monotone_coupling(k0, k0)
            assert diag.weights == {(z, z): m for z, m in k0.items()}
            assert psi_pair(k0, k0).is_identity_ae()


def test_criterion_04_forest_measure_of_coherent_family():
    rng = random.Random(104)
    W = ball(F2, 2)
    cases = []
    for _ in range(50):
        om = sparse_measure(W, 2, rng)
        F = random_tree(F2, W, rng, keep=rng.uniform(0.6, 1.0))
        cases.append((om, F, {c[0]: rng.choice(c) for c in F.components().classes}))
    with criterion(4, "forest measure of a coherent family equals rerandomize", 10):
        for om, F, roots in cases:
            fam = WindowMeasureFamily.coherent(F2, om)
            ref = forest_measure(fam, F)
            assert ref == rerandomize(om, F)
            assert forest_measure(fam, F, roots=roots) == ref


def test_criterion_05_transport_algebra():
    rng = random.Random(105)
    W0 = ball(F2, 1)
    cases = [(random_family(F2, W0, 2, rng), random_tree(F2, W0, rng, keep=rng.uniform(0.4, 1))) for _ in range(50)]
    with criterion(5, "transport pushforward, inverses and root choice", 10):
        for fam, F in cases:
            rel = F.components()
            for d, g in product(W0, repeat=2):
                there = edge_transport(fam, d, g)
                assert compose_pairs(reverse_transport(fam, g, d), there).is_identity_ae()
                if rel.same(d, g):
                    pair = path_transport(fam, F, d, g)
                    assert pair.source == fam[g] and pair.target == fam[d]
                    m0, m1 = coupling_marginals(pair.joint())
                    assert m0 == fam[g].weights and m1 == fam[d].weights
            ref = forest_measure(fam, F)
            roots = {c[0]: c[-1] for c in rel.classes}
            assert forest_measure(fam, F, roots=roots) == ref


def _joint_from(window, rng):
    y_meas = random_rational_measure(window, 2, rng, atoms=3)
    parts = [(m, y, random_rational_measure(window, 2, rng, atoms=4)) for y, m in y_meas.items()]
    return JointMeasure.from_parts(window, 2, 2, parts)


def test_criterion_06_zeta_and_xi():
    rng = random.Random(106)
    W = ball(F2, 1)
    cases = []
    for _ in range(30):
        lam = _joint_from(W, rng)
        nu = random_rational_measure(W, 2, rng, atoms=3)
        table = {y: random_rational_measure(W, 2, rng, atoms=4) for y, _ in nu.items()}
        mu_F = [(random_tree(F2, W, rng, keep=0.5), Fraction(1, 3)), (random_tree(F2, W, rng), Fraction(2, 3))]
        cases.append((lam, random_tree(F2, W, rng), nu, Kernel(F2, 2, 2, base=W, table=table), mu_F))
    with criterion(6, "zeta of a spanning tree returns λ; xi keeps ν′", 10):
        for lam, T, nu, kern, mu_F in cases:
            assert zeta_construct(lam, [(T, 1)]) == lam
            assert xi_construct(kern, nu, mu_F).q_marginal() == nu


def _broken(sigma, rng):
    """Change one value on a supported product γδ so the cocycle identity fails."""
    a, K = sigma.action, sigma.K
    x = rng.randrange(a.n)
    key = (F2.parse("ab"), x)
    vals = dict(sigma.values)
    vals[key] = (vals[key] + rng.randrange(1, K.order)) % K.order
    return Cochain(a, K, vals, sigma.support)


def test_criterion_07_cocycle_suite():
    rng = random.Random(107)
    support = list(cayley_ball(F2, 2))
    gens = list(F2.generators())
    cob, ext, bad, density = [], [], [], []
    for _ in range(20):
        a = random_action(F2, rng.randrange(1, 6), rng)
        f = [rng.randrange(SYM3.order) for _ in range(a.n)]
        cob.append(coboundary_from(a, f, SYM3, support))
        assignment = [[rng.randrange(SYM3.order) for _ in range(a.n)] for _ in range(2)]
        ext.append(extend_free_cochain(a, SYM3, assignment, support))
        bad.append(_broken(ext[-1], rng))
        density.append((a, coboundary_from(a, f, SYM3, gens)))
    with criterion(7, "cocycle defects and coboundary recovery", 10):
        for sigma in cob + ext:
            assert cocycle_defect(sigma) == 0
        for sigma in bad:
            assert cocycle_defect(sigma) > 0
            assert not cocycle_identity_holds(sigma.action, SYM3, sigma, support)
        for a, sigma in density:
            res = coboundary_density_search(sigma, gens, 0)
            assert res.success and res.value == 1
            assert coboundary_from(a, res.witness, SYM3, gens) == sigma


def test_criterion_08_skew_products():
    rng = random.Random(108)
    cases = []
    for _ in range(50):
        K = rng.choice([SYM2, SYM3])
        a = random_action(F2, rng.randrange(1, 6), rng, den=4)
        assignment = [[rng.randrange(K.order) for _ in range(a.n)] for _ in range(2)]
        f = [rng.randrange(K.order) for _ in range(a.n)]
        cases.append((a, K, assignment, f))
    G = list(cayley_ball(F2, 2))
    with criterion(8, "skew products preserve measure, factor onto the base, coboundaries trivialise", 5):
        for a, K, assignment, f in cases:
            e = skew_product(extend_free_cochain(a, K, assignment, F2.generators()))
            src = e.source
            perms, weights, phi = skew_oracle(a, K.labels, assignment)
            assert list(src.perms) == perms and src.weights == weights and list(e.phi) == phi
            for p in src.perms:
                assert all(src.weights[p[y]] == src.weights[y] for y in range(src.n))
            for g in G:
                assert all(e.phi[act(src, g, y)] == act(a, g, e.phi[y]) for y in range(src.n))
            cob = skew_product(coboundary_from(a, f, K, F2.generators())).source
            triv = trivial_extension(a, len(K.labels[0])).source
            m = coboundary_trivialising_map(f, K)
            assert sorted(m) == list(range(triv.n))
            assert all(cob.weights[y] == triv.weights[m[y]] for y in range(cob.n))
            for pc, pt in zip(cob.perms, triv.perms):
                assert all(m[pc[y]] == pt[m[y]] for y in range(cob.n))


def test_criterion_09_coinduction():
    z4 = GroupContext.quotient(FiniteGroup.cyclic(4), [1])
    a2 = z4.parse("a^2")
    lam = [z4.identity, a2]
    half, quarter, eighth = Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)
    x = FiniteAction(z4, [half, half], [(1, 0)])
    quotient = QuotientData.from_elements(z4, lam, [z4.identity, z4.generator(0)])
    subgroup_actions = [
        ([half, half], (0, 1), [0, 1]),
        ([quarter] * 4, (1, 0, 3, 2), [0, 0, 1, 1]),
        ([quarter] * 4, (1, 0, 2, 3), [0, 0, 1, 1]),
        ([quarter] * 4, (0, 1, 2, 3), [0, 0, 1, 1]),
        ([eighth, 3 * eighth, quarter, quarter], (0, 1, 3, 2), [0, 0, 1, 1]),
        ([quarter] * 4, (2, 3, 0, 1), [0, 1, 0, 1]),
    ]
    y = FiniteAction(z4, [quarter] * 4, [(1, 2, 3, 0)])
    with criterion(9, "coinduction from index 2 in the Z/4 model of Z", 5):
        for weights, perm, phi in subgroup_actions:
            b = SubgroupAction.from_table(z4, quotient, weights, {a2: perm})
            e = coinduce(z4, quotient, b, x, phi)
            src = e.source
            assert is_invariant(src)
            assert all(src.weights[src.perms[0][z]] == src.weights[z] for z in range(src.n))
            assert sum(src.weights) == 1
            assert projection_equivariant(e, b, lam)
            assert factor_equivariant(e, z4.elements_by_bfs())
        whole = QuotientData.whole(z4)
        e = coinduce(z4, whole, SubgroupAction.restrict(y, whole), y, [0, 1, 2, 3])
        assert e.source.perms == y.perms and e.source.weights == y.weights


REPEATS = 5


def _criterion_instances():
    subsets = [[F2.identity], [F2.identity, F2.generator(0)], [F2.generator(0), F2.generator(1)]]
    for n in range(1, 7):
        for p, q in product([1, 2], repeat=2):
            for S in subsets:
                for _ in range(REPEATS):
                    yield n, p, q, S


def test_criterion_10_search_oracle_equivalence():
    rng = random.Random(110)
    gens_sets = [[F2.generator(0)], [F2.generator(0), F2.generator(1)], [F2.generator(1), F2.parse("ab")]]
    with criterion(10, "exhaustive searches agree with brute-force oracles", 60):
        count = 0
        for n, p, q, S in _criterion_instances():
            a = random_action(F2, n, rng)
            e = random_skew_extension(a, 2, rng)
            alpha = random_labels(e.source.n, p, rng)
            beta = random_labels(n, q, rng)
            res = ec_criterion_search(ECQuery(e, Labeling(alpha, p), Labeling(beta, q), S))
            best, arg = criterion_oracle(e, alpha, beta, S, p)
            assert (res.value, tuple(res.witness)) == (best, arg)
            count += 1

            K = FiniteGroup.symmetric(p)
            F = gens_sets[len(S) - 1] if len(S) < 3 else S
            sigma = extend_free_cochain(a, K, [random_labels(n, K.order, rng) for _ in range(2)], F)
            slack = Fraction(rng.randrange(3), 6)
            res = finite_ext_ec_search(a, p, sigma, F, 0, beta, slack=slack)
            kind, value, arg = finite_ext_oracle(
                a, p, K.labels, lambda f, x: K.permutation(sigma(f, x)), F, beta, slack
            )
            assert (res.value, tuple(res.witness)) == (value, arg)
            assert (res.reason == "pushforward infeasible") == (kind == "infeasible")
            count += 1

            W = canonical_window(F2, S)
            other = random_action(F2, rng.randrange(1, 7), rng)
            lam = JointMeasure(W, q, p, joint_pattern(other, random_labels(other.n, q, rng),
                                                      random_labels(other.n, p, rng), W, q, p))
            res = ec_lemma_search(a, beta, lam, 0)
            best, arg = ec_lemma_oracle(a, beta, lam.weights, W, p)
            assert (res.value, tuple(res.witness)) == (best, arg)
            count += 1
        assert count == 3 * 6 * 4 * 3 * REPEATS


def _cylinder_oracle(base, A, gamma, B):
    """μ(A ∩ γB) by summing the product measure over the coordinates involved."""
    shifted = {F2.multiply(gamma, g): d for g, d in B.constraints}
    coords = sorted(set(A.as_dict()) | set(shifted))
    total = Fraction(0)
    for cfg in product(range(len(base)), repeat=len(coords)):
        x = dict(zip(coords, cfg))
        if all(x[g] == d for g, d in A.constraints) and all(x[g] == d for g, d in shifted.items()):
            m = Fraction(1)
            for d in cfg:
                m *= base[d]
            total += m
    return total


def test_criterion_11_weak_mixing_of_bernoulli():
    rng = random.Random(111)
    model = BernoulliShift(F2)
    coords = list(cayley_ball(F2, 1))
    G0 = [g for g in cayley_ball(F2, 2) if g != F2.identity]
    pairs = [(Cylinder.of({F2.identity: 0}), Cylinder.of({F2.identity: 0}))]
    for _ in range(10):
        A = Cylinder.of({g: rng.randrange(2) for g in rng.sample(coords, rng.randrange(1, 3))})
        B = Cylinder.of({g: rng.randrange(2) for g in rng.sample(coords, rng.randrange(1, 3))})
        pairs.append((A, B))
    with criterion(11, "Bernoulli defect is 0 off the identity for disjoint coordinates", 2):
        checked = 0
        for A, B in pairs:
            dA = set(A.as_dict())
            for g in G0:
                if dA & {F2.multiply(g, h) for h in B.as_dict()}:
                    continue
                assert mixing_defect(model, A, g, B) == 0
                assert _cylinder_oracle(model.base, A, g, B) == model.measure(A) * model.measure(B)
                checked += 1
        assert checked >= len(G0)


def test_criterion_12_entropy():
    rng = random.Random(112)
    cases = []
    for _ in range(100):
        n = rng.randrange(1, 13)
        raw = [rng.randrange(1, 10) for _ in range(n)]
        w = [Fraction(r, sum(raw)) for r in raw]
        cases.append((w, random_labels(n, rng.randrange(1, 5), rng), random_labels(n, rng.randrange(1, 4), rng)))
    with criterion(12, "entropy chain rule and uniform entropy to 1e-12", 2):
        for w, alpha, beta in cases:
            cond = 0.0
            for b in set(beta):
                mb = sum(w[x] for x in range(len(w)) if beta[x] == b)
                masses = [sum((w[x] for x in range(len(w)) if beta[x] == b and alpha[x] == i), Fraction(0)) / mb
                          for i in set(alpha)]
                cond += float(mb) * entropy_oracle(masses)
            assert abs(entropy(w, join(alpha, beta)) - (entropy(w, beta) + cond)) <= 1e-12
            assert abs(relative_entropy(w, alpha, beta) - cond) <= 1e-12
        for k in range(1, 101):
            assert abs(entropy([Fraction(1, k)] * k, list(range(k))) - math.log(k)) <= 1e-12


def test_criterion_13_cli_determinism():
    with criterion(13, "every CLI fixture run twice gives identical bytes"):
        for args, code in CASES:
            first, second = run_cli(args), run_cli(args)
            assert first.returncode == second.returncode == code
            assert first.stdout == second.stdout and first.stderr == second.stderr

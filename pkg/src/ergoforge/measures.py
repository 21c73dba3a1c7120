"""Finite probability spaces, finite actions, labelings and window measures.

All weights are exact ``Fraction`` values. Logarithms in the entropy
functions are the only floating point computations.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from fractions import Fraction
from itertools import product

import numpy as np

from .groups import GroupContext
from .search import CapExceeded, integer_weights

DEFAULT_CAP = 1 << 20


class MeasureError(ValueError):
    pass


def default_cap(fallback=DEFAULT_CAP):
    env = os.environ.get("ERGOFORGE_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise MeasureError(f"ERGOFORGE_CAP must be an integer, got {env!r}") from None
    return fallback


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise MeasureError("floats are not accepted as weights; use Fraction or 'n/d'")
    return Fraction(x)


def check_weights(weights):
    ws = [as_fraction(w) for w in weights]
    if any(w < 0 for w in ws):
        raise MeasureError("weights must be nonnegative")
    if sum(ws) != 1:
        raise MeasureError(f"weights sum to {sum(ws)}, not 1")
    return ws


class FiniteAction:
    """A group acting by permutations on a finite probability space.

    ``perms[i][x]`` is the index of ``s_i · x`` for generator i.
    """

    def __init__(self, ctx: GroupContext, weights, perms, points=None, check=True):
        self.ctx = ctx
        self.weights = check_weights(weights)
        self.n = len(self.weights)
        self.points = list(points) if points is not None else list(range(self.n))
        if len(self.points) != self.n:
            raise MeasureError("one point label per weight required")
        if len(perms) != ctx.rank:
            raise MeasureError(f"need {ctx.rank} generator permutations, got {len(perms)}")
        self.perms = [tuple(p) for p in perms]
        for i, p in enumerate(self.perms):
            if sorted(p) != list(range(self.n)):
                raise MeasureError(f"generator {ctx.gen_names[i]} is not a permutation")
        self.inv_perms = [_invert(p) for p in self.perms]
        self._cache = {}
        if check:
            self.check()

    def check(self):
        for i, p in enumerate(self.perms):
            for x in range(self.n):
                if self.weights[p[x]] != self.weights[x]:
                    raise MeasureError(
                        f"generator {self.ctx.gen_names[i]} does not preserve the weights"
                    )
        ctx = self.ctx
        if ctx.is_finite:
            for g in ctx.elements_by_bfs():
                pg = self.perm(g)
                for i, s in enumerate(ctx.generators()):
                    lhs = self.perm(ctx.multiply(s, g))
                    rhs = tuple(self.perms[i][pg[x]] for x in range(self.n))
                    if lhs != rhs:
                        raise MeasureError("group relations fail as permutation identities")
        elif ctx.kind == "abelian":
            for i in range(ctx.rank):
                for j in range(i + 1, ctx.rank):
                    a, b = self.perms[i], self.perms[j]
                    if any(a[b[x]] != b[a[x]] for x in range(self.n)):
                        raise MeasureError("generators of an abelian group must commute")

    def perm(self, g):
        """The permutation of point indices induced by g."""
        if g in self._cache:
            return self._cache[g]
        p = list(range(self.n))
        for i, sign in reversed(self.ctx.word(g)):
            q = self.perms[i] if sign == 1 else self.inv_perms[i]
            p = [q[x] for x in p]
        out = tuple(p)
        self._cache[g] = out
        return out

    def act(self, g, x):
        return self.perm(g)[x]

    def image(self, g, subset):
        p = self.perm(g)
        return frozenset(p[x] for x in subset)

    def measure(self, subset):
        return sum((self.weights[x] for x in subset), Fraction(0))

    def __repr__(self):
        return f"FiniteAction({self.ctx.describe()}, {self.n} points)"

    @classmethod
    def trivial(cls, ctx, weights):
        n = len(weights)
        return cls(ctx, weights, [tuple(range(n))] * ctx.rank)

    @classmethod
    def uniform(cls, ctx, perms):
        n = len(perms[0]) if perms else 1
        return cls(ctx, [Fraction(1, n)] * n, perms)


def _invert(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


class Labeling:
    """A map from point indices to {0, ..., arity - 1}."""

    def __init__(self, values, arity=None):
        self.values = tuple(int(v) for v in values)
        self.arity = arity if arity is not None else (max(self.values, default=0) + 1)
        if any(not 0 <= v < self.arity for v in self.values):
            raise MeasureError("label out of range")

    def __getitem__(self, x):
        return self.values[x]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        return isinstance(other, Labeling) and (self.values, self.arity) == (
            other.values,
            other.arity,
        )

    def __repr__(self):
        return f"Labeling({list(self.values)}, arity={self.arity})"

    def blocks(self):
        out = [[] for _ in range(self.arity)]
        for x, v in enumerate(self.values):
            out[v].append(x)
        return [frozenset(b) for b in out]


def _labels(alpha):
    return alpha.values if isinstance(alpha, Labeling) else tuple(alpha)


def _arity(alpha):
    return alpha.arity if isinstance(alpha, Labeling) else max(alpha, default=0) + 1


class WindowMeasure:
    """An exact probability measure on configurations p^W.

    Configurations are tuples of digits aligned with ``window``. Zero
    weights are dropped so equality is equality of measures.
    """

    def __init__(self, window, p, weights, check=True):
        self.window = tuple(window)
        self.p = int(p)
        if len(set(self.window)) != len(self.window):
            raise MeasureError("window elements must be distinct")
        w = {}
        for cfg, m in dict(weights).items():
            m = as_fraction(m)
            cfg = tuple(cfg)
            if m < 0:
                raise MeasureError("weights must be nonnegative")
            if m:
                w[cfg] = w.get(cfg, 0) + m
        self.weights = w
        if check:
            for cfg in w:
                if len(cfg) != len(self.window):
                    raise MeasureError(f"configuration {cfg} does not match the window")
                if any(not 0 <= d < self.p for d in cfg):
                    raise MeasureError(f"configuration {cfg} uses a digit outside {self.p}")
            if sum(w.values()) != 1:
                raise MeasureError(f"weights sum to {sum(w.values())}, not 1")

    def __eq__(self, other):
        return (
            isinstance(other, WindowMeasure)
            and self.window == other.window
            and self.p == other.p
            and self.weights == other.weights
        )

    def __repr__(self):
        return f"WindowMeasure(|W|={len(self.window)}, p={self.p}, atoms={len(self.weights)})"

    def __getitem__(self, cfg):
        return self.weights.get(tuple(cfg), Fraction(0))

    def items(self):
        """Atoms in lexicographic order of configurations."""
        return sorted(self.weights.items())

    def support(self):
        return sorted(self.weights)

    def marginal(self, sub):
        """The pushforward onto the coordinates ``sub`` (in the given order)."""
        idx = [self.window.index(g) for g in sub]
        out = defaultdict(Fraction)
        for cfg, m in self.weights.items():
            out[tuple(cfg[i] for i in idx)] += m
        return WindowMeasure(tuple(sub), self.p, out, check=False)

    def reorder(self, order):
        """The same measure with the window listed in ``order``."""
        if set(order) != set(self.window) or len(order) != len(self.window):
            raise MeasureError("reorder needs a permutation of the window")
        return self.marginal(order)

    def pushforward(self, fn, window, p):
        out = defaultdict(Fraction)
        for cfg, m in self.weights.items():
            out[tuple(fn(cfg))] += m
        return WindowMeasure(window, p, out)

    def total_variation(self, other):
        keys = set(self.weights) | set(other.weights)
        return sum((abs(self[k] - other[k]) for k in keys), Fraction(0)) / 2

    @classmethod
    def point_mass(cls, window, p, cfg):
        return cls(window, p, {tuple(cfg): Fraction(1)})

    @classmethod
    def product(cls, window, p, marginals):
        """Independent product of one distribution over {0..p-1} per coordinate."""
        out = {}
        for cfg in product(range(p), repeat=len(window)):
            m = Fraction(1)
            for d, marg in zip(cfg, marginals):
                m *= as_fraction(marg[d])
            if m:
                out[cfg] = m
        return cls(window, p, out)


def pushforward_distribution(a: FiniteAction, alpha, F) -> WindowMeasure:
    """Distribution of x ↦ (α(f^{-1}·x))_{f∈F} under μ."""
    labels = _labels(alpha)
    if len(labels) != a.n:
        raise MeasureError("labeling does not match the point set")
    ctx = a.ctx
    F = tuple(F)
    perms = [a.perm(ctx.inverse(f)) for f in F]
    out = defaultdict(Fraction)
    for x in range(a.n):
        cfg = tuple(labels[p[x]] for p in perms)
        out[cfg] += a.weights[x]
    return WindowMeasure(F, _arity(alpha), out)


# entropy


def _blocks_mass(weights, labels):
    out = defaultdict(Fraction)
    for w, l in zip(weights, labels):
        out[l] += as_fraction(w)
    return out


def entropy(weights, alpha) -> float:
    """Shannon entropy (natural log) of the partition given by a labeling."""
    if isinstance(weights, FiniteAction):
        weights = weights.weights
    labels = _labels(alpha)
    if len(labels) != len(weights):
        raise MeasureError("labeling does not match the point set")
    h = 0.0
    for m in _blocks_mass(weights, labels).values():
        if m > 0:
            h -= float(m) * math.log(m.numerator / m.denominator)
    return h


def join(alpha, beta):
    """The common refinement α∨β as a labeling (pair index a*|β| + b)."""
    la, lb = _labels(alpha), _labels(beta)
    qb = _arity(beta)
    return Labeling([x * qb + y for x, y in zip(la, lb)], _arity(alpha) * qb)


def relative_entropy(weights, alpha, beta) -> float:
    """Conditional entropy H(α|β) = H(α∨β) − H(β)."""
    return entropy(weights, join(alpha, beta)) - entropy(weights, beta)


def entropy_of(dist) -> float:
    """Entropy of a plain list of probabilities."""
    return entropy(list(dist), list(range(len(dist))))


# subset searches


def _all_subsets(n):
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(bool)


def freeness_defect(a: FiniteAction, gamma, n: int, cap=None) -> Fraction:
    """min over subsets x of max(|μ(x) − 1/n|, max_{i<j<n} μ(γ^i x ∩ γ^j x))."""
    cap = default_cap() if cap is None else cap
    if n < 1:
        raise MeasureError("order bound must be positive")
    if (1 << a.n) > cap:
        raise CapExceeded(f"2^{a.n} subsets exceed the cap {cap}")
    w, den = integer_weights(a.weights)
    bits = _all_subsets(a.n)
    powers = [a.perm(a.ctx.power(gamma, i)) for i in range(n)]
    # image of subset under permutation p: y in p(x) iff p^{-1}(y) in x
    images = [bits[:, _invert(p)] for p in powers]
    mass = bits @ w
    value = np.abs(n * mass - den)  # scaled by n*den
    for i in range(n):
        for j in range(i + 1, n):
            inter = (images[i] & images[j]) @ w
            value = np.maximum(value, n * inter)
    best = int(value.min())
    return Fraction(best, n * den)


def _set_measure(weights, s):
    return sum((weights[x] for x in s), Fraction(0))


def weak_containment_defect(a: FiniteAction, b: FiniteAction, A, F, B) -> Fraction:
    """max over i, j, γ∈F of |μ(γA_i ∩ A_j) − ν(γB_i ∩ B_j)|."""
    if len(A) != len(B):
        raise MeasureError("need as many candidate sets as target sets")
    A = [frozenset(s) for s in A]
    B = [frozenset(s) for s in B]
    best = Fraction(0)
    for g in F:
        ga = [a.image(g, s) for s in A]
        gb = [b.image(g, s) for s in B]
        for i in range(len(A)):
            for j in range(len(A)):
                d = abs(a.measure(ga[i] & A[j]) - b.measure(gb[i] & B[j]))
                best = max(best, d)
    return best


def weak_containment_search(a: FiniteAction, b: FiniteAction, A, F, cap=None):
    """Brute force over tuples of subsets of Y; returns (best defect, sets).

    Ties go to the first tuple in enumeration order (subsets as bitmasks in
    increasing order).
    """
    cap = default_cap() if cap is None else cap
    total = 1 << (b.n * len(A))
    if total > cap:
        raise CapExceeded(f"{total} candidate tuples exceed the cap {cap}")
    subsets = [frozenset(x for x in range(b.n) if m >> x & 1) for m in range(1 << b.n)]
    best, arg = None, None
    for combo in product(subsets, repeat=len(A)):
        d = weak_containment_defect(a, b, A, F, combo)
        if best is None or d < best:
            best, arg = d, combo
            if d == 0:
                break
    return best, [set(s) for s in arg]


class ExtensionTriple:
    """A factor map φ from a source action b on Y onto a target action a on X.

    Equivariance is checked exactly on every point of positive weight.
    """

    def __init__(self, source: FiniteAction, target: FiniteAction, phi, check=True):
        self.source = source
        self.target = target
        self.phi = tuple(phi)
        if check:
            self.check()

    def check(self):
        b, a, phi = self.source, self.target, self.phi
        if b.ctx is not a.ctx and (b.ctx.kind, b.ctx.rank) != (a.ctx.kind, a.ctx.rank):
            raise MeasureError("source and target act by different groups")
        if len(phi) != b.n or any(not 0 <= v < a.n for v in phi):
            raise MeasureError("factor map has the wrong shape")
        push = [Fraction(0)] * a.n
        for y, v in enumerate(phi):
            push[v] += b.weights[y]
        if push != a.weights:
            raise MeasureError("factor map does not push the source measure to the target")
        for i in range(b.ctx.rank):
            for y in range(b.n):
                if b.weights[y] and phi[b.perms[i][y]] != a.perms[i][phi[y]]:
                    raise MeasureError(
                        f"factor map is not equivariant for generator {b.ctx.gen_names[i]}"
                    )

    def preimage(self, subset):
        s = set(subset)
        return frozenset(y for y, v in enumerate(self.phi) if v in s)


def extension_neighborhood_defect(e1: ExtensionTriple, e2: ExtensionTriple, As, Bs, F) -> Fraction:
    """max of ν(φ^{-1}A △ ψ^{-1}A) over As and ν(γ^b B △ γ^c B) over Bs, F."""
    if e1.target.n != e2.target.n or e1.target.weights != e2.target.weights:
        raise MeasureError("extensions must share the target space")
    if e1.source.weights != e2.source.weights:
        raise MeasureError("extensions must share the source space")
    nu = e1.source
    best = Fraction(0)
    for A in As:
        best = max(best, nu.measure(e1.preimage(A) ^ e2.preimage(A)))
    for B in Bs:
        B = frozenset(B)
        for g in F:
            best = max(best, nu.measure(e1.source.image(g, B) ^ e2.source.image(g, B)))
    return best


def relative_independent_joining(mu, phi, nu, psi, eta=None):
    """λ(x, y) = μ(x)ν(y)/η(φ(x)) when φ(x) = ψ(y), else 0.

    ``mu`` and ``nu`` are weight lists; ``phi`` and ``psi`` map indices into
    a common finite Z. ``eta`` defaults to the pushforward of μ, and both
    pushforwards must equal it.
    """
    mu = [as_fraction(m) for m in mu]
    nu = [as_fraction(m) for m in nu]
    push_mu = defaultdict(Fraction)
    push_nu = defaultdict(Fraction)
    for x, z in enumerate(phi):
        push_mu[z] += mu[x]
    for y, z in enumerate(psi):
        push_nu[z] += nu[y]
    if eta is None:
        eta = dict(push_mu)
    else:
        eta = {z: as_fraction(m) for z, m in (eta.items() if isinstance(eta, dict) else enumerate(eta))}
    for z in set(push_mu) | set(push_nu) | set(eta):
        ez = eta.get(z, Fraction(0))
        if ez == 0 and (push_mu.get(z) or push_nu.get(z)):
            raise MeasureError(f"η vanishes at {z} but its preimage has positive mass")
        if push_mu.get(z, 0) != ez or push_nu.get(z, 0) != ez:
            raise MeasureError("maps are not measure preserving onto the common factor")
    out = {}
    for x, zx in enumerate(phi):
        for y, zy in enumerate(psi):
            if zx == zy and mu[x] and nu[y]:
                out[(x, y)] = mu[x] * nu[y] / eta[zx]
    return out


def all_labelings(n, p):
    """Every labeling of n points with p symbols, lexicographic order."""
    return product(range(p), repeat=n)


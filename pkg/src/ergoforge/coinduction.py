"""Exact disintegration and coinduction from a finite-index subgroup.

Given Λ ≤ Γ of finite index with transversal r_0 = e, r_1, ..., a Λ-action
b on Y and a Λ-equivariant factor φ: Y → X onto a Γ-action a, the
coinduced Γ-action lives on Y^{Γ/Λ}:

    (γȳ)(aΛ) = ρ(γ^{-1}, aΛ)^{-1} · ȳ(γ^{-1}aΛ),  ρ(γ, aΛ) = r(γaΛ)^{-1} γ r(aΛ),

with measure ν̄(ȳ) = Σ_x μ(x) ∏_i ν_{r_i^{-1}x}(ȳ_i), where ν_x is the
conditional law of ν on the fiber over x.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .groups import GroupContext, GroupError, QuotientData, coset_cocycle
from .measures import ExtensionTriple, FiniteAction, MeasureError, check_weights

ZERO = Fraction(0)


class CoinductionError(ValueError):
    pass


@dataclass
class Disintegration:
    """Conditional measures ν_x on the fibers φ^{-1}(x), for μ(x) > 0."""

    phi: tuple
    base: list
    conditionals: dict

    def __getitem__(self, x):
        try:
            return self.conditionals[x]
        except KeyError:
            raise MeasureError(f"no conditional measure over the null point {x}") from None

    def recompose(self):
        """Σ_x μ(x)·ν_x as a weight list on Y."""
        out = [ZERO] * len(self.phi)
        for x, cond in self.conditionals.items():
            for y, m in cond.items():
                out[y] += self.base[x] * m
        return out


def disintegrate(e: ExtensionTriple) -> Disintegration:
    """ν_x(y) = ν(y)/μ(φ(y)) on each fiber."""
    return _disintegrate(e.source.weights, e.target.weights, e.phi)


def _disintegrate(nu, mu, phi):
    conds = {}
    for y, x in enumerate(phi):
        if mu[x] == 0:
            if nu[y]:
                raise MeasureError(f"μ vanishes at {x} but its fiber carries mass")
            continue
        conds.setdefault(x, {})
        if nu[y]:
            conds[x][y] = nu[y] / mu[x]
    return Disintegration(tuple(phi), list(mu), conds)


class SubgroupAction:
    """A finite-index subgroup Λ ≤ Γ acting on a finite probability space.

    ``perm_of(λ)`` returns the permutation of point indices for λ ∈ Λ,
    where λ is an element of the ambient group.
    """

    def __init__(self, ctx: GroupContext, quotient: QuotientData, weights, perm_of):
        self.ctx = ctx
        self.quotient = quotient
        self.weights = check_weights(weights)
        self.n = len(self.weights)
        self._perm_of = perm_of
        self._cache = {}

    def perm(self, lam):
        if lam in self._cache:
            return self._cache[lam]
        if not self.quotient.member(lam):
            raise CoinductionError(f"{self.ctx.format(lam)} is not in the subgroup")
        p = tuple(self._perm_of(lam))
        if sorted(p) != list(range(self.n)):
            raise CoinductionError(f"action of {self.ctx.format(lam)} is not a permutation")
        if any(self.weights[p[y]] != self.weights[y] for y in range(self.n)):
            raise CoinductionError(f"action of {self.ctx.format(lam)} does not preserve the measure")
        self._cache[lam] = p
        return p

    def act(self, lam, y):
        return self.perm(lam)[y]

    @classmethod
    def restrict(cls, a: FiniteAction, quotient: QuotientData):
        """The restriction of a Γ-action to the subgroup."""
        return cls(a.ctx, quotient, a.weights, a.perm)

    @classmethod
    def from_table(cls, ctx, quotient, weights, table):
        """Explicit permutations for the subgroup elements that will be needed."""
        table = {g: tuple(p) for g, p in table.items()}

        def perm_of(lam):
            if lam in table:
                return table[lam]
            if lam == ctx.identity:
                return tuple(range(len(weights)))
            raise CoinductionError(f"no permutation given for subgroup element {ctx.format(lam)}")

        return cls(ctx, quotient, weights, perm_of)


def check_factor(b: SubgroupAction, a: FiniteAction, phi, elements):
    """Whether φ pushes ν to μ and φ(λy) = λφ(y) for λ in ``elements``."""
    push = [ZERO] * a.n
    for y, x in enumerate(phi):
        push[x] += b.weights[y]
    if push != a.weights:
        return False
    for lam in elements:
        pb, pa = b.perm(lam), a.perm(lam)
        if any(phi[pb[y]] != pa[phi[y]] for y in range(b.n) if b.weights[y]):
            return False
    return True


def _needed_elements(ctx, quotient):
    """ρ(s^{-1}, i)^{-1} for every generator s and coset i."""
    out = []
    for s in ctx.generators():
        si = ctx.inverse(s)
        for i in range(quotient.n):
            out.append(ctx.inverse(coset_cocycle(ctx, quotient, si, i)))
    return out


def coinduce(ctx: GroupContext, quotient: QuotientData, b: SubgroupAction, a: FiniteAction, phi) -> ExtensionTriple:
    """The coinduced Γ-extension of a with points ȳ ∈ Y^{Γ/Λ}.

    Points are tuples indexed by transversal order, enumerated
    lexicographically; the factor map is x = φ(ȳ(Λ)).
    """
    phi = tuple(phi)
    if len(phi) != b.n or any(not 0 <= x < a.n for x in phi):
        raise CoinductionError("factor map has the wrong shape")
    try:
        needed = _needed_elements(ctx, quotient)
    except GroupError as exc:
        raise CoinductionError(str(exc)) from None
    if not check_factor(b, a, phi, needed + [s for s in ctx.generators() if quotient.member(s)]):
        raise CoinductionError("φ is not a measure-preserving Λ-equivariant factor")
    n = quotient.n
    points = list(product(range(b.n), repeat=n))
    index = {pt: i for i, pt in enumerate(points)}
    dis = _disintegrate(b.weights, a.weights, phi)
    inv_r = [a.perm(ctx.inverse(r)) for r in quotient.transversal]
    weights = []
    for pt in points:
        total = ZERO
        for x in range(a.n):
            if not a.weights[x]:
                continue
            m = a.weights[x]
            for i, yi in enumerate(pt):
                m *= dis.conditionals.get(inv_r[i][x], {}).get(yi, ZERO)
                if not m:
                    break
            total += m
        weights.append(total)
    perms = []
    for s in ctx.generators():
        si = ctx.inverse(s)
        src, twist = [], []
        for i, r in enumerate(quotient.transversal):
            src.append(quotient.coset_of(ctx.multiply(si, r)))
            twist.append(b.perm(ctx.inverse(coset_cocycle(ctx, quotient, si, i))))
        perms.append(tuple(index[tuple(twist[i][pt[src[i]]] for i in range(n))] for pt in points))
    try:
        action = FiniteAction(ctx, weights, perms, points=points)
    except MeasureError as exc:
        raise CoinductionError(f"coinduced maps do not form a measure-preserving action: {exc}") from None
    return ExtensionTriple(action, a, [phi[pt[0]] for pt in points])


def projection(ext: ExtensionTriple):
    """π(ȳ) = ȳ(Λ) as a list of Y-indices."""
    return [pt[0] for pt in ext.source.points]


def is_invariant(action: FiniteAction):
    """Every generator permutation preserves the weights atom by atom."""
    w = action.weights
    return all(w[p[x]] == w[x] for p in action.perms for x in range(action.n))


def projection_equivariant(ext: ExtensionTriple, b: SubgroupAction, elements):
    """π(λȳ) = λπ(ȳ) on every point, for λ in ``elements``."""
    pi = projection(ext)
    for lam in elements:
        p, pb = ext.source.perm(lam), b.perm(lam)
        if any(pi[p[z]] != pb[pi[z]] for z in range(ext.source.n)):
            return False
    return True


def factor_equivariant(ext: ExtensionTriple, elements):
    """φ∘π(γȳ) = γ·φ∘π(ȳ) on every point of positive mass."""
    src, tgt, phi = ext.source, ext.target, ext.phi
    for g in elements:
        p, pa = src.perm(g), tgt.perm(g)
        if any(phi[p[z]] != pa[phi[z]] for z in range(src.n) if src.weights[z]):
            return False
    return True

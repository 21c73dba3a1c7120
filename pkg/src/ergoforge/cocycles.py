"""Cochains and cocycles of finite actions valued in finite groups.

A cochain stores σ(γ, x) for γ in an explicit finite support. The cocycle
identity is σ(γδ, x) = σ(γ, δx) σ(δ, x). Window cochains ``c`` store the
values c(β)(α) of a map Γ → G^Γ on a finite set of pairs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .groups import FiniteGroup, GroupContext
from .measures import CapExceeded, ExtensionTriple, FiniteAction, MeasureError, default_cap
from .search import EXHAUSTIVE, LOCAL, SearchResult, check_engine, integer_weights, labeling_chunks

DENSITY_CAP = 2_000_000


class CocycleError(ValueError):
    pass


class WindowEscape(CocycleError):
    pass


class Cochain:
    """σ: S × X → K on an explicit support S, stored as K-indices."""

    def __init__(self, action: FiniteAction, K: FiniteGroup, values, support=None):
        self.action = action
        self.K = K
        vals = {}
        for (g, x), k in dict(values).items():
            vals[(g, x)] = k
        if support is None:
            support = []
            for g, _ in vals:
                if g not in support:
                    support.append(g)
        self.support = list(support)
        self.values = vals
        for g in self.support:
            for x in range(action.n):
                k = vals.get((g, x))
                if k is None:
                    raise CocycleError(
                        f"cochain undefined at ({action.ctx.format(g)}, {x})"
                    )
                if not 0 <= k < K.order:
                    raise CocycleError(f"value {k} is not an element of K")

    def __call__(self, g, x):
        try:
            return self.values[(g, x)]
        except KeyError:
            raise WindowEscape(
                f"{self.action.ctx.format(g)} is outside the cochain support"
            ) from None

    def column(self, g):
        return [self(g, x) for x in range(self.action.n)]

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return set(self.support) == set(other.support) and all(
            self.values[(g, x)] == other.values[(g, x)]
            for g in self.support
            for x in range(self.action.n)
        )

    def restrict(self, support):
        return Cochain(
            self.action,
            self.K,
            {(g, x): self(g, x) for g in support for x in range(self.action.n)},
            support,
        )

    @classmethod
    def constant(cls, action, K, k, support):
        return cls(action, K, {(g, x): k for g in support for x in range(action.n)}, support)


@dataclass
class DefectWeights:
    """Enumerations of the support and of the (γ, δ, k) triples.

    Triple i receives weight 2^{-(i+1)}, renormalised to sum to 1 over the
    truncated list. Only the zero set of the defect is order independent.
    """

    support_order: list | None = None
    triple_order: list | None = None


def _weights(n):
    raw = [Fraction(1, 2 ** (i + 1)) for i in range(n)]
    total = sum(raw)
    return [w / total for w in raw]


def supported_pairs(sigma: Cochain):
    """Pairs (γ, δ) of support elements whose product is also supported."""
    ctx = sigma.action.ctx
    sup = set(sigma.support)
    return [
        (g, d) for g in sigma.support for d in sigma.support if ctx.multiply(g, d) in sup
    ]


def cocycle_defect(sigma: Cochain, weights: DefectWeights | None = None) -> Fraction:
    """max(Φ1, Φ2) truncated to the support of σ.

    Φ1 measures how far the level sets (σ(γ, ·) = k)_k are from a partition;
    a total cochain gives exactly 0. Φ2 sums, over triples (γ, δ, k), the
    mass of {x : σ(γ, δx)σ(δ, x) = k} △ {x : σ(γδ, x) = k}.
    """
    a, K = sigma.action, sigma.K
    ctx = a.ctx
    weights = weights or DefectWeights()
    sup = set(sigma.support)
    if weights.triple_order is not None:
        triples = list(weights.triple_order)
        for g, d, _ in triples:
            if g not in sup or d not in sup or ctx.multiply(g, d) not in sup:
                raise CocycleError(
                    f"support not closed under the product {ctx.format(g)}·{ctx.format(d)}"
                )
    else:
        order = weights.support_order or sigma.support
        triples = [
            (g, d, k)
            for g in order
            for d in order
            if ctx.multiply(g, d) in sup
            for k in range(K.order)
        ]
    phi1 = Fraction(0)  # level sets of a total map always form a partition
    if not triples:
        return phi1
    ws = _weights(len(triples))
    phi2 = Fraction(0)
    for w, (g, d, k) in zip(ws, triples):
        pd = a.perm(d)
        gd = ctx.multiply(g, d)
        bad = Fraction(0)
        for x in range(a.n):
            lhs = K.mul(sigma(g, pd[x]), sigma(d, x)) == k
            rhs = sigma(gd, x) == k
            if lhs != rhs:
                bad += a.weights[x]
        phi2 += w * bad
    return max(phi1, phi2)


def cocycle_violations(sigma: Cochain):
    """All (γ, δ, x) on the supported pairs where the cocycle identity fails."""
    a, K = sigma.action, sigma.K
    ctx = a.ctx
    out = []
    for g, d in supported_pairs(sigma):
        pd = a.perm(d)
        gd = ctx.multiply(g, d)
        for x in range(a.n):
            if sigma(gd, x) != K.mul(sigma(g, pd[x]), sigma(d, x)):
                out.append((g, d, x))
    return out


def coboundary_from(a: FiniteAction, f, K: FiniteGroup, support) -> Cochain:
    """σ(γ, x) = f(γx) f(x)^{-1}."""
    f = list(f)
    if len(f) != a.n:
        raise CocycleError("transfer function must have one value per point")
    vals = {}
    for g in support:
        p = a.perm(g)
        for x in range(a.n):
            vals[(g, x)] = K.mul(f[p[x]], K.inv[f[x]])
    return Cochain(a, K, vals, list(support))


def cohomologous_transform(sigma: Cochain, s) -> Cochain:
    """σ'(γ, x) = s(γx)^{-1} σ(γ, x) s(x)."""
    a, K = sigma.action, sigma.K
    vals = {}
    for g in sigma.support:
        p = a.perm(g)
        for x in range(a.n):
            vals[(g, x)] = K.prod(K.inv[s[p[x]]], sigma(g, x), s[x])
    return Cochain(a, K, vals, sigma.support)


def extend_free_cochain(a: FiniteAction, K: FiniteGroup, assignment, support) -> Cochain:
    """The unique cocycle on ``support`` extending generator values.

    ``assignment[i][x]`` is σ(s_i, x). Uses σ(sw, x) = σ(s, wx)σ(w, x) and
    σ(s^{-1}, x) = σ(s, s^{-1}x)^{-1}.
    """
    ctx = a.ctx
    if not ctx.is_free:
        raise CocycleError("free extension needs a free group context")
    if len(assignment) != ctx.rank:
        raise CocycleError("need one value list per generator")
    for col in assignment:
        if len(col) != a.n:
            raise CocycleError("generator values must cover every point")
    for g in support:
        ctx.validate(g)
    return _extend_by_words(a, K, assignment, support)


def agreement_mass(sigma: Cochain, p, F) -> Fraction:
    """μ{x : p(γx) p(x)^{-1} = σ(γ, x) for every γ in F}."""
    a, K = sigma.action, sigma.K
    ok = [True] * a.n
    for g in F:
        pg = a.perm(g)
        for x in range(a.n):
            if ok[x] and K.mul(p[pg[x]], K.inv[p[x]]) != sigma(g, x):
                ok[x] = False
    return sum((w for w, o in zip(a.weights, ok) if o), Fraction(0))


def coboundary_density_search(
    sigma: Cochain,
    F,
    eps=0,
    engine=EXHAUSTIVE,
    seed=0,
    cap=None,
    restarts=8,
) -> SearchResult:
    """Find p: X → K maximising the agreement mass with σ on F.

    Success means mass ≥ 1 − ε. The exhaustive engine scans K^X in
    lexicographic order with p(x_0) pinned to the first element of K, which
    loses nothing since right-multiplying p by a constant leaves the mass
    unchanged; the witness is the lexicographically smallest optimiser.
    """
    check_engine(engine)
    a, K = sigma.action, sigma.K
    F = list(F)
    for g in F:
        sigma(g, 0)
    eps = Fraction(eps)
    cap = default_cap(DENSITY_CAP) if cap is None else cap
    if engine == EXHAUSTIVE:
        if K.order**a.n > cap:
            raise CapExceeded(f"|K|^|X| = {K.order ** a.n} exceeds the cap {cap}")
        best, witness = _density_exhaustive(sigma, F)
        exact = True
    else:
        best, witness = _density_local(sigma, F, random.Random(seed), restarts)
        exact = False
    ok = best >= 1 - eps
    return SearchResult(
        success=ok,
        value=best,
        witness=list(witness),
        engine=engine,
        seed=seed if engine == LOCAL else None,
        exact=exact,
        reason="" if ok else "agreement mass below 1 - eps",
    )


def _density_exhaustive(sigma, F):
    a, K = sigma.action, sigma.K
    if a.n == 0:
        return Fraction(1), []
    table = np.array(K.table, dtype=np.int64)
    inv = np.array(K.inv, dtype=np.int64)
    w, den = integer_weights(a.weights)
    perms = [a.perm(g) for g in F]
    targets = [np.array(sigma.column(g), dtype=np.int64) for g in F]
    best, arg = -1, None
    for _, P in labeling_chunks(a.n, K.order, first_fixed=0):
        ok = np.ones(P.shape, dtype=bool)
        for pg, t in zip(perms, targets):
            ok &= table[P[:, list(pg)], inv[P]] == t[None, :]
        mass = ok.astype(np.int64) @ w
        i = int(np.argmax(mass))
        if mass[i] > best:
            best, arg = int(mass[i]), P[i].tolist()
    return Fraction(best, den), arg


def _density_local(sigma, F, rng, restarts):
    a, K = sigma.action, sigma.K
    best = None
    for _ in range(max(1, restarts)):
        p = [rng.randrange(K.order) for _ in range(a.n)]
        cur = agreement_mass(sigma, p, F)
        improved = True
        while improved:
            improved = False
            for x in range(a.n):
                for k in range(K.order):
                    if k == p[x]:
                        continue
                    old = p[x]
                    p[x] = k
                    m = agreement_mass(sigma, p, F)
                    if m > cur:
                        cur, improved = m, True
                    else:
                        p[x] = old
        cand = (-cur, tuple(p))
        if best is None or cand < best:
            best = cand
    return -best[0], list(best[1])


# skew products


def skew_product(sigma: Cochain, translate=False) -> ExtensionTriple:
    """The extension X ×_σ k with γ(x, u) = (γx, σ(γ, x)u).

    K acts on {0..k-1} through its permutation labels (Sym(k)) or, with
    ``translate``, on itself by left translation. Point (x, u) has index
    x*k + u and weight μ(x)/k.
    """
    a, K = sigma.action, sigma.K
    ctx = a.ctx
    if cocycle_defect(sigma) != 0:
        raise CocycleError("cochain has nonzero defect; the skew product is not an action")
    if translate or K.labels is None:
        k = K.order
        act = [tuple(K.table[g]) for g in range(K.order)]
    else:
        k = len(K.labels[0])
        act = [tuple(K.labels[g]) for g in range(K.order)]
    perms = []
    for i, s in enumerate(ctx.generators()):
        col = sigma.column(s)
        perm = []
        for x in range(a.n):
            sx = a.perms[i][x]
            for u in range(k):
                perm.append(sx * k + act[col[x]][u])
        perms.append(tuple(perm))
    weights = [a.weights[x] / k for x in range(a.n) for _ in range(k)]
    try:
        b = FiniteAction(ctx, weights, perms, points=[(x, u) for x in range(a.n) for u in range(k)])
    except MeasureError as exc:
        raise CocycleError(f"skew product is not an action: {exc}") from None
    phi = [x for x in range(a.n) for _ in range(k)]
    return ExtensionTriple(b, a, phi)


def trivial_extension(a: FiniteAction, k: int) -> ExtensionTriple:
    """a × (trivial action on k uniform points)."""
    perms = [tuple(a.perms[i][x] * k + u for x in range(a.n) for u in range(k)) for i in range(a.ctx.rank)]
    weights = [a.weights[x] / k for x in range(a.n) for _ in range(k)]
    b = FiniteAction(a.ctx, weights, perms)
    return ExtensionTriple(b, a, [x for x in range(a.n) for _ in range(k)])


def is_isomorphism(b1: FiniteAction, b2: FiniteAction, m) -> bool:
    """Whether index map m is a weight-preserving equivariant bijection."""
    m = list(m)
    if sorted(m) != list(range(b2.n)) or len(m) != b1.n:
        return False
    if any(b1.weights[y] != b2.weights[m[y]] for y in range(b1.n)):
        return False
    for i in range(b1.ctx.rank):
        if any(m[b1.perms[i][y]] != b2.perms[i][m[y]] for y in range(b1.n)):
            return False
    return True


def coboundary_trivialising_map(f, K: FiniteGroup, k=None, translate=False):
    """(x, u) ↦ (x, f(x)^{-1}u) as an index map between X × k spaces."""
    if translate or K.labels is None:
        k = K.order
        act = [tuple(K.table[g]) for g in range(K.order)]
    else:
        k = len(K.labels[0])
        act = [tuple(K.labels[g]) for g in range(K.order)]
    out = []
    for x, fx in enumerate(f):
        inv = act[K.inv[fx]]
        for u in range(k):
            out.append(x * k + inv[u])
    return out


# the cochain / equivariant map correspondence


class WindowCochain:
    """Finitely many values c(β)(α) ∈ G of a map c: Γ → G^Γ.

    Keys are pairs (β, α).
    """

    def __init__(self, ctx: GroupContext, G: FiniteGroup, values):
        self.ctx = ctx
        self.G = G
        self.values = dict(values)

    def __call__(self, beta, alpha):
        try:
            return self.values[(beta, alpha)]
        except KeyError:
            raise WindowEscape(
                f"value at β={self.ctx.format(beta)}, α={self.ctx.format(alpha)} is outside the window"
            ) from None

    def defined(self, beta, alpha):
        return (beta, alpha) in self.values

    def __eq__(self, other):
        return isinstance(other, WindowCochain) and self.values == other.values

    def __repr__(self):
        return f"WindowCochain({len(self.values)} values)"

    def t_action(self, gamma):
        """(γ^t c)(β)(α) = c(β)(γ^{-1}α)."""
        ctx = self.ctx
        return WindowCochain(
            ctx, self.G, {(b, ctx.multiply(gamma, a)): v for (b, a), v in self.values.items()}
        )

    def restrict(self, keys):
        return WindowCochain(self.ctx, self.G, {k: self.values[k] for k in keys})

    def common(self, other):
        """Keys where both cochains are defined."""
        return set(self.values) & set(other.values)

    @classmethod
    def from_potential(cls, ctx, G, u, window):
        """c(β)(α) = u(αβ) u(α)^{-1} for α, αβ in the window (a cocycle)."""
        vals = {}
        for a in window:
            for v in window:
                b = ctx.multiply(ctx.inverse(a), v)
                vals[(b, a)] = G.mul(u[v], G.inv[u[a]])
        return cls(ctx, G, vals)


def window_pairs(ctx, window):
    """All (β, α) with α and αβ in the window."""
    return [(ctx.multiply(ctx.inverse(a), v), a) for a in window for v in window]


def cochain_correspondence(theta: Cochain, window):
    """c(x)(β)(α) = θ(β^{-1}, α^{-1}·x) for α, β in an inverse-closed window."""
    a = theta.action
    ctx = a.ctx
    window = list(window)
    wset = set(window)
    if any(ctx.inverse(g) not in wset for g in window):
        raise CocycleError("window is not closed under inverses")
    out = []
    for x in range(a.n):
        vals = {}
        for al in window:
            y = a.act(ctx.inverse(al), x)
            for be in window:
                vals[(be, al)] = theta(ctx.inverse(be), y)
        out.append(WindowCochain(ctx, theta.K, vals))
    return out


def cochain_from_correspondence(a: FiniteAction, cs, support) -> Cochain:
    """θ(γ, x) = c(x)(γ^{-1})(e)."""
    ctx = a.ctx
    K = cs[0].G
    vals = {}
    for g in support:
        for x in range(a.n):
            vals[(g, x)] = cs[x](ctx.inverse(g), ctx.identity)
    return Cochain(a, K, vals, list(support))


def coboundary_operator(c: WindowCochain, triples=None):
    """∂c(α, β)(γ) = c(αβ)(γ)^{-1} c(β)(γα) c(α)(γ).

    Without ``triples`` every (α, β, γ) whose three inputs are stored is
    evaluated; explicitly requested triples outside the window raise.
    """
    ctx, G = c.ctx, c.G
    out = {}
    if triples is None:
        by_alpha = {}
        for (b, a) in c.values:
            by_alpha.setdefault(a, []).append(b)
        triples = []
        for (al, ga) in c.values:
            # c(α)(γ) is stored; need c(β)(γα) and c(αβ)(γ)
            ga_al = ctx.multiply(ga, al)
            for be in by_alpha.get(ga_al, []):
                if c.defined(ctx.multiply(al, be), ga):
                    triples.append((al, be, ga))
    for al, be, ga in triples:
        v = G.prod(
            G.inv[c(ctx.multiply(al, be), ga)],
            c(be, ctx.multiply(ga, al)),
            c(al, ga),
        )
        out[(al, be, ga)] = v
    return out


def is_window_cocycle(c: WindowCochain) -> bool:
    return all(v == c.G.identity for v in coboundary_operator(c).values())


def t_action_pairs(ctx, d, gamma):
    """(γ^t d)(α, β)(δ) = d(α, β)(γ^{-1}δ) for 2-cochains keyed (α, β, δ)."""
    return {(a, b, ctx.multiply(gamma, g)): v for (a, b, g), v in d.items()}


def random_cochain(a: FiniteAction, K: FiniteGroup, support, rng) -> Cochain:
    return Cochain(
        a, K, {(g, x): rng.randrange(K.order) for g in support for x in range(a.n)}, list(support)
    )


def all_generator_assignments(a: FiniteAction, K: FiniteGroup):
    """Every map S × X → K, as lists indexed [generator][point]."""
    cells = a.ctx.rank * a.n
    for flat in product(range(K.order), repeat=cells):
        yield [list(flat[i * a.n:(i + 1) * a.n]) for i in range(a.ctx.rank)]


def generator_cocycle(a: FiniteAction, K: FiniteGroup, assignment, support=None):
    """A cocycle from generator values, or None if they violate relations.

    Free groups extend any assignment; other kinds are accepted when the
    skew product over the assignment is a genuine action.
    """
    ctx = a.ctx
    if ctx.is_free:
        return extend_free_cochain(a, K, assignment, support or ctx.generators())
    gens = ctx.generators()
    vals = {(g, x): assignment[i][x] for i, g in enumerate(gens) for x in range(a.n)}
    sigma = Cochain(a, K, vals, gens)
    # evaluate on further elements along shortest words, then verify relations
    els = ctx.elements_by_bfs() if ctx.is_finite else None
    if els is None:
        try:
            skew_product(sigma, translate=True)
        except CocycleError:
            return None
        if support is None:
            return sigma
        return _extend_by_words(a, K, assignment, support)
    full = _extend_by_words(a, K, assignment, els)
    if cocycle_defect(full) != 0:
        return None
    return full.restrict(support) if support is not None else full


def _extend_by_words(a, K, assignment, support):
    """σ(s_1⋯s_n, x) by walking the word right to left."""
    ctx = a.ctx
    vals = {}
    for g in support:
        word = ctx.word(g)
        for x in range(a.n):
            acc = K.identity
            y = x
            for i, sign in reversed(word):
                if sign == 1:
                    v = assignment[i][y]
                    y2 = a.perms[i][y]
                else:
                    y2 = a.inv_perms[i][y]
                    v = K.inv[assignment[i][y2]]
                acc = K.mul(v, acc)
                y = y2
            vals[(g, x)] = acc
    return Cochain(a, K, vals, list(support))


"""Monotone couplings, map-measure pairs, re-randomisation and forest measures.

Finite measures are atomic, so a measure ω on p^W is lifted to the unit
interval: the atoms, in lexicographic order, tile [0, 1) by consecutive
intervals of length ω(z), and the quantile function Q_ω reads a
configuration back off a point u. A map-measure pair carries an exact
piecewise-translation bijection of [0, 1) between two such tilings. The
monotone map of two measures is the identity on [0, 1), a shift of
coordinates is the interval exchange that moves each atom to the interval
of its image, and composition is composition of interval maps. Every
pushforward and inverse identity then holds exactly, and each pair also
has a configuration-level joint distribution.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from fractions import Fraction
from math import gcd

from .groups import GroupContext
from .measures import MeasureError, WindowMeasure, as_fraction
from .trees import ComponentRelation, DirectedForest, ForestError

ZERO = Fraction(0)
ONE = Fraction(1)


class CouplingError(ValueError):
    pass


# windows and shifts


def canonical_window(ctx: GroupContext, elements):
    """The elements sorted by the group's fixed enumeration."""
    return tuple(sorted(elements, key=ctx.sort_key))


def canonical(ctx: GroupContext, omega: WindowMeasure) -> WindowMeasure:
    order = canonical_window(ctx, omega.window)
    return omega if order == omega.window else omega.reorder(order)


def shift_config(ctx, window, cfg, beta):
    """β^s on one configuration: returns (βW in canonical order, new config)."""
    moved = {ctx.multiply(beta, w): d for w, d in zip(window, cfg)}
    new_window = canonical_window(ctx, moved)
    return new_window, tuple(moved[w] for w in new_window)


def shift_measure(ctx: GroupContext, omega: WindowMeasure, beta) -> WindowMeasure:
    """β^s_*ω, where (β^s z)(βw) = z(w); the result lives on βW."""
    new_window = None
    out = {}
    for cfg, m in omega.weights.items():
        new_window, c2 = shift_config(ctx, omega.window, cfg, beta)
        out[c2] = m
    if new_window is None:
        new_window = canonical_window(ctx, [ctx.multiply(beta, w) for w in omega.window])
    return WindowMeasure(new_window, omega.p, out, check=False)


# quantile tilings


def tiling(omega: WindowMeasure):
    """(starts, configs): atom i occupies [starts[i], starts[i+1])."""
    starts, cfgs = [], []
    acc = ZERO
    for cfg, m in omega.items():
        starts.append(acc)
        cfgs.append(cfg)
        acc += m
    starts.append(acc)
    return starts, cfgs


def quantile(omega_tiling, u):
    starts, cfgs = omega_tiling
    i = bisect_right(starts, u) - 1
    return cfgs[min(i, len(cfgs) - 1)]


class IntervalMap:
    """A bijection of [0, 1) that translates each piece [a, b) by t."""

    def __init__(self, pieces):
        pcs = sorted((as_fraction(a), as_fraction(b), as_fraction(t)) for a, b, t in pieces if b > a)
        merged = []
        for a, b, t in pcs:
            if merged and merged[-1][1] == a and merged[-1][2] == t:
                merged[-1] = (merged[-1][0], b, t)
            else:
                merged.append((a, b, t))
        self.pieces = merged
        self._starts = [a for a, _, _ in merged]

    @classmethod
    def identity(cls):
        return cls([(ZERO, ONE, ZERO)])

    def __eq__(self, other):
        return isinstance(other, IntervalMap) and self.pieces == other.pieces

    def __repr__(self):
        return f"IntervalMap({len(self.pieces)} pieces)"

    def is_identity(self):
        return all(t == 0 for _, _, t in self.pieces)

    def __call__(self, u):
        i = bisect_right(self._starts, u) - 1
        a, b, t = self.pieces[i]
        return u + t

    def breakpoints(self):
        return [a for a, _, _ in self.pieces] + [ONE]

    def inverse(self):
        return IntervalMap([(a + t, b + t, -t) for a, b, t in self.pieces])

    def preimages(self, points):
        """All u in [0, 1) with self(u) in points."""
        out = []
        for a, b, t in self.pieces:
            for v in points:
                if a <= v - t < b:
                    out.append(v - t)
        return out

    def then(self, other: "IntervalMap") -> "IntervalMap":
        """other ∘ self."""
        cuts = other.breakpoints()
        out = []
        for a, b, t in self.pieces:
            lo, hi = a + t, b + t
            inner = [c for c in cuts if lo < c < hi]
            edges = [lo] + inner + [hi]
            for x, y in zip(edges, edges[1:]):
                s = other(x) - x
                out.append((x - t, y - t, t + s))
        return IntervalMap(out)

    def is_measure_preserving(self):
        images = sorted((a + t, b + t) for a, b, t in self.pieces)
        pos = ZERO
        for lo, hi in images:
            if lo != pos:
                return False
            pos = hi
        return pos == ONE and self.pieces[0][0] == 0 and self.pieces[-1][1] == ONE


class MapMeasurePair:
    """A measure ω with a measure-preserving map onto a target measure.

    ``lift`` maps the tiling of ``source`` onto the tiling of ``target``.
    """

    def __init__(self, source: WindowMeasure, target: WindowMeasure, lift: IntervalMap):
        self.source = source
        self.target = target
        self.lift = lift
        if not lift.is_measure_preserving():
            raise CouplingError("lift is not a bijection of the unit interval")

    def joint(self):
        """Law of (Q_source(U), Q_target(lift(U))) as a dict of pairs."""
        ts, tt = tiling(self.source), tiling(self.target)
        cuts = set(ts[0]) | set(self.lift.breakpoints()) | set(self.lift.preimages(tt[0]))
        cuts = sorted(c for c in cuts if 0 <= c <= 1)
        out = defaultdict(Fraction)
        for a, b in zip(cuts, cuts[1:]):
            if b > a:
                out[(quantile(ts, a), quantile(tt, self.lift(a)))] += b - a
        return dict(out)

    def as_map(self):
        """The configuration map z ↦ h(z) if the pair is deterministic, else None."""
        out = {}
        for (z0, z1) in self.joint():
            if out.setdefault(z0, z1) != z1:
                return None
        return out

    def is_identity_ae(self):
        """Whether the configuration-level joint is concentrated on the diagonal."""
        return all(z0 == z1 for z0, z1 in self.joint()) and self.source.window == self.target.window

    def __repr__(self):
        return f"MapMeasurePair({self.source!r} -> {self.target!r})"


def identity_pair(omega: WindowMeasure) -> MapMeasurePair:
    return MapMeasurePair(omega, omega, IntervalMap.identity())


def map_pair(omega: WindowMeasure, fn, window, p) -> MapMeasurePair:
    """Pair for a deterministic configuration map, with its canonical lift.

    Inside each target atom the preimage atoms are stacked in lexicographic
    order of the source configurations.
    """
    target = omega.pushforward(fn, window, p)
    t_starts, t_cfgs = tiling(target)
    fill = {cfg: s for cfg, s in zip(t_cfgs, t_starts)}
    pieces = []
    s_starts, s_cfgs = tiling(omega)
    for i, cfg in enumerate(s_cfgs):
        a, b = s_starts[i], s_starts[i + 1]
        img = tuple(fn(cfg))
        pieces.append((a, b, fill[img] - a))
        fill[img] += b - a
    return MapMeasurePair(omega, target, IntervalMap(pieces))


def shift_pair(ctx: GroupContext, omega: WindowMeasure, beta) -> MapMeasurePair:
    """The shift β^s as a map-measure pair with source ω."""
    new_window = canonical_window(ctx, [ctx.multiply(beta, w) for w in omega.window])

    def fn(cfg):
        return shift_config(ctx, omega.window, cfg, beta)[1]

    return map_pair(omega, fn, new_window, omega.p)


def _aligned(k1: WindowMeasure, k0: WindowMeasure):
    if k1.p != k0.p:
        raise CouplingError("measures use different alphabets")
    if k1.window != k0.window:
        if set(k1.window) != set(k0.window):
            raise CouplingError("measures live on different windows")
        k1 = k1.reorder(k0.window)
    return k1


def psi_pair(k1: WindowMeasure, k0: WindowMeasure) -> MapMeasurePair:
    """The monotone map from κ0 to κ1: identity on the unit interval."""
    k1 = _aligned(k1, k0)
    return MapMeasurePair(k0, k1, IntervalMap.identity())


def monotone_coupling(k1: WindowMeasure, k0: WindowMeasure) -> "JointMeasure":
    """The comonotone coupling of κ0 and κ1 keyed by (κ0-config, κ1-config).

    Both measures are ordered lexicographically along κ0's window
    enumeration and matched along cumulative mass.
    """
    k1 = _aligned(k1, k0)
    a, b = k0.items(), k1.items()
    out = {}
    i = j = 0
    ra = a[0][1] if a else ZERO
    rb = b[0][1] if b else ZERO
    while i < len(a) and j < len(b):
        m = min(ra, rb)
        if m:
            key = (a[i][0], b[j][0])
            out[key] = out.get(key, ZERO) + m
        ra -= m
        rb -= m
        if ra == 0:
            i += 1
            ra = a[i][1] if i < len(a) else ZERO
        if rb == 0:
            j += 1
            rb = b[j][1] if j < len(b) else ZERO
    return JointMeasure(k0.window, k0.p, k0.p, out)


def psi_map(k1: WindowMeasure, k0: WindowMeasure, z):
    """ψ(κ1, κ0)(z) = the ⪯-least z' with κ1(L_{z'}) ≥ κ0(L_z)."""
    k1 = _aligned(k1, k0)
    level = sum((m for c, m in k0.items() if c <= tuple(z)), ZERO)
    acc = ZERO
    last = None
    for c, m in k1.items():
        acc += m
        last = c
        if acc >= level:
            return c
    return last


def coupling_marginals(joint):
    """The two marginals of a coupling as plain dicts."""
    weights = joint.weights if isinstance(joint, JointMeasure) else joint
    m0, m1 = defaultdict(Fraction), defaultdict(Fraction)
    for (z0, z1), m in weights.items():
        m0[z0] += m
        m1[z1] += m
    return dict(m0), dict(m1)


def is_comonotone(joint):
    """No two support pairs cross: z0 < w0 together with z1 > w1."""
    pairs = sorted(joint.weights if isinstance(joint, JointMeasure) else joint)
    for i, (z0, z1) in enumerate(pairs):
        for w0, w1 in pairs[i + 1:]:
            if z0 < w0 and z1 > w1:
                return False
    return True


def compose_pairs(p1: MapMeasurePair, p0: MapMeasurePair) -> MapMeasurePair:
    """(h1, ω1)·(h0, ω0) = (h1 ∘ h0, ω0); needs ω1 to equal the target of p0."""
    if p1.source != p0.target:
        raise CouplingError("pairs are not composable: source of the outer pair differs from the pushforward")
    return MapMeasurePair(p0.source, p1.target, p0.lift.then(p1.lift))


def inverse_pair(pair: MapMeasurePair) -> MapMeasurePair:
    return MapMeasurePair(pair.target, pair.source, pair.lift.inverse())


# re-randomisation


def _as_relation(E, window):
    if isinstance(E, DirectedForest):
        return E.components()
    if isinstance(E, ComponentRelation):
        return E
    return ComponentRelation(E)


def rerandomize(omega: WindowMeasure, E) -> WindowMeasure:
    """φ(ω, E): the independent product of the marginals of ω on the classes of E."""
    rel = _as_relation(E, omega.window)
    covered = [v for c in rel.classes for v in c]
    if sorted(map(omega.window.index, covered)) != list(range(len(omega.window))):
        raise CouplingError("E must partition the window of ω")
    margs = [omega.marginal(c).items() for c in rel.classes]
    pos = [[omega.window.index(v) for v in c] for c in rel.classes]
    return WindowMeasure(omega.window, omega.p, _independent_product(len(omega.window), margs, pos), check=False)


def _independent_product(n, laws, positions):
    """Product of independent laws on disjoint coordinate blocks of an n-window.

    Each law is a list of (sub-configuration, mass). Factors are merged one
    block at a time with integer numerators over a common denominator, so
    the cost is dominated by the size of the output rather than by n.
    """
    acc = {(): 1}
    den = 1
    order = []
    for law, idx in sorted(zip(laws, positions), key=lambda t: len(t[0])):
        d = 1
        for _, w in law:
            d = d * w.denominator // gcd(d, w.denominator)
        law = [(sub, w.numerator * (d // w.denominator)) for sub, w in law]
        acc = {cfg + sub: m * w for cfg, m in acc.items() for sub, w in law}
        den *= d
        order += idx
    inv = sorted(range(n), key=order.__getitem__)
    return {tuple(cfg[j] for j in inv): Fraction(m, den) for cfg, m in acc.items()}


# families and forest measures


class WindowMeasureFamily:
    """ω(γ) for γ in a base window W0, each a measure on γ^{-1}W0.

    Windows are stored in canonical order so lexicographic orders are
    those of the group's fixed enumeration.
    """

    def __init__(self, ctx: GroupContext, base, members):
        self.ctx = ctx
        self.base = canonical_window(ctx, base)
        self.members = {}
        for g in self.base:
            if g not in members:
                raise CouplingError(f"family has no measure at {ctx.format(g)}")
            om = members[g]
            want = set(ctx.multiply(ctx.inverse(g), w) for w in self.base)
            if set(om.window) != want:
                raise CouplingError(
                    f"ω({ctx.format(g)}) must live on the window {ctx.format(g)}^-1·W0"
                )
            self.members[g] = canonical(ctx, om)
        self.p = self.members[self.base[0]].p

    def __getitem__(self, g):
        try:
            return self.members[g]
        except KeyError:
            raise CouplingError(f"{self.ctx.format(g)} is outside the family window") from None

    @classmethod
    def coherent(cls, ctx, omega_e: WindowMeasure):
        """ω(γ) = (γ^{-1})^s_* ω(e), so that γ^s_* ω(γ) = ω(e)."""
        base = canonical_window(ctx, omega_e.window)
        if ctx.identity not in base:
            raise CouplingError("the base window must contain the identity")
        return cls(ctx, base, {g: shift_measure(ctx, omega_e, ctx.inverse(g)) for g in base})

    def is_shift_coherent(self):
        e = self.ctx.identity
        if e not in self.members:
            return False
        ref = self.members[e]
        return all(shift_measure(self.ctx, om, g) == ref for g, om in self.members.items())

    def shift(self, beta):
        """(β^s·ω)(βγ) = ω(γ)."""
        m = self.ctx.multiply
        return WindowMeasureFamily(
            self.ctx, [m(beta, g) for g in self.base], {m(beta, g): om for g, om in self.members.items()}
        )

    def replace(self, g, omega):
        members = dict(self.members)
        members[g] = omega
        return WindowMeasureFamily(self.ctx, self.base, members)


def edge_transport(family: WindowMeasureFamily, delta, gamma) -> MapMeasurePair:
    """g_{δ,γ} = ψ(ω(δ), (δ^{-1}γ)^s_*ω(γ)) ∘ (δ^{-1}γ)^s, from ω(γ) to ω(δ)."""
    ctx = family.ctx
    if delta == gamma:
        return identity_pair(family[gamma])
    step = ctx.multiply(ctx.inverse(delta), gamma)
    sp = shift_pair(ctx, family[gamma], step)
    return compose_pairs(psi_pair(family[delta], sp.target), sp)


def reverse_transport(family: WindowMeasureFamily, delta, gamma) -> MapMeasurePair:
    """ḡ_{δ,γ} = (δ^{-1}γ)^s ∘ ψ((γ^{-1}δ)^s_*ω(δ), ω(γ)), from ω(γ) to ω(δ)."""
    ctx = family.ctx
    if delta == gamma:
        return identity_pair(family[gamma])
    back = shift_measure(ctx, family[delta], ctx.multiply(ctx.inverse(gamma), delta))
    first = psi_pair(back, family[gamma])
    sp = shift_pair(ctx, first.target, ctx.multiply(ctx.inverse(delta), gamma))
    return compose_pairs(sp, first)


def path_transport(family: WindowMeasureFamily, F: DirectedForest, delta, gamma) -> MapMeasurePair:
    """σ_F^ω(δ, γ): composition of edge transports along the path γ → δ."""
    if delta == gamma:
        return identity_pair(family[gamma])
    path = F.path(gamma, delta)
    directed = set(F.edges)
    acc = identity_pair(family[gamma])
    for frm, to in zip(path, path[1:]):
        if (to, frm) in directed:
            step = edge_transport(family, to, frm)
        else:
            step = reverse_transport(family, to, frm)
        acc = compose_pairs(step, acc)
    return acc


def _component_law(family, F, comp, root):
    """Joint law of (ω-flattened coordinates) over one component."""
    ctx = family.ctx
    e = ctx.identity
    maps = {}
    cuts = {ZERO, ONE}
    tilings = {}
    for d in comp:
        pair = path_transport(family, F, d, root)
        maps[d] = pair.lift
        tilings[d] = tiling(pair.target)
        cuts.update(pair.lift.breakpoints())
        cuts.update(pair.lift.preimages(tilings[d][0]))
    cuts = sorted(c for c in cuts if 0 <= c <= 1)
    epos = {d: family[d].window.index(e) for d in comp}
    out = defaultdict(Fraction)
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            cfg = tuple(quantile(tilings[d], maps[d](a))[epos[d]] for d in comp)
            out[cfg] += b - a
    return out


def forest_measure(family: WindowMeasureFamily, F: DirectedForest, roots=None) -> WindowMeasure:
    """θ(ω, F) = f_* ∏_C (∏_{δ∈C} σ_F^ω(δ, γ_C))_* ω(γ_C), with f(z)(γ) = z(γ)(e).

    ``roots`` optionally picks γ_C per component (keyed by any member);
    the default is the first vertex of each component.
    """
    if set(F.vertices) != set(family.base):
        raise ForestError("forest vertices must be exactly the family window")
    roots = roots or {}
    window = family.base
    laws, positions = [], []
    for comp in F.components().classes:
        chosen = [roots[v] for v in comp if v in roots]
        root = chosen[0] if chosen else comp[0]
        if root not in comp:
            raise ForestError("root lies outside its component")
        laws.append(sorted(_component_law(family, F, comp, root).items()))
        positions.append([window.index(v) for v in comp])
    return WindowMeasure(window, family.p, _independent_product(len(window), laws, positions), check=False)


# joint measures on q^W × p^W and the ζ, ξ constructions


class JointMeasure:
    """An exact measure on q^W × p^W keyed by (y, z) configuration pairs."""

    def __init__(self, window, q, p, weights, check=True):
        self.window = tuple(window)
        self.q, self.p = int(q), int(p)
        self.weights = {}
        for (y, z), m in dict(weights).items():
            m = as_fraction(m)
            if m:
                key = (tuple(y), tuple(z))
                self.weights[key] = self.weights.get(key, ZERO) + m
        if check:
            n = len(self.window)
            for y, z in self.weights:
                if len(y) != n or len(z) != n:
                    raise MeasureError("configuration does not match the window")
                if any(not 0 <= d < self.q for d in y) or any(not 0 <= d < self.p for d in z):
                    raise MeasureError("digit outside the alphabet")
            if sum(self.weights.values()) != 1:
                raise MeasureError("joint weights must sum to 1")

    def __eq__(self, other):
        return (
            isinstance(other, JointMeasure)
            and (self.window, self.q, self.p, self.weights)
            == (other.window, other.q, other.p, other.weights)
        )

    def __repr__(self):
        return f"JointMeasure(|W|={len(self.window)}, q={self.q}, p={self.p}, atoms={len(self.weights)})"

    def items(self):
        return sorted(self.weights.items())

    def q_marginal(self) -> WindowMeasure:
        out = defaultdict(Fraction)
        for (y, _), m in self.weights.items():
            out[y] += m
        return WindowMeasure(self.window, self.q, out)

    def p_marginal(self) -> WindowMeasure:
        out = defaultdict(Fraction)
        for (_, z), m in self.weights.items():
            out[z] += m
        return WindowMeasure(self.window, self.p, out)

    def disintegrate(self):
        """y ↦ λ_y, the conditional law of z given y, over the q-marginal."""
        nu = self.q_marginal()
        cond = defaultdict(dict)
        for (y, z), m in self.weights.items():
            cond[y][z] = m / nu[y]
        return nu, {y: WindowMeasure(self.window, self.p, c) for y, c in cond.items()}

    @classmethod
    def from_parts(cls, window, q, p, parts):
        """Σ w · δ_y × ρ over (w, y, ρ) triples."""
        out = defaultdict(Fraction)
        for w, y, rho in parts:
            for z, m in rho.weights.items():
                out[(tuple(y), z)] += w * m
        return cls(window, q, p, out)


def _forest_mixture(mu_F):
    out = []
    for item, w in mu_F:
        out.append((item, as_fraction(w)))
    if sum(w for _, w in out) != 1:
        raise CouplingError("forest distribution weights must sum to 1")
    return out


def zeta_construct(lam: JointMeasure, mu_F) -> JointMeasure:
    """ζ(μ) = ∫∫ δ_y × φ(λ_y, E) dν(y) dμ(E).

    ``mu_F`` lists (forest or partition, weight) pairs.
    """
    nu, cond = lam.disintegrate()
    parts = []
    for E, w in _forest_mixture(mu_F):
        for y, m in nu.items():
            parts.append((w * m, y, rerandomize(cond[y], E)))
    return JointMeasure.from_parts(lam.window, lam.q, lam.p, parts)


class Kernel:
    """κ: q-configurations on a window ↦ measures on p^(same window).

    Built either from a table on a base window, extended to translates by
    covariance (κ(β^s y) = β^s_* κ(y)), or from an arbitrary callable
    ``fn(window, cfg)``.
    """

    def __init__(self, ctx: GroupContext, q, p, base=None, table=None, fn=None, covariant=True):
        self.ctx = ctx
        self.q, self.p = q, p
        self.base = canonical_window(ctx, base) if base is not None else None
        self.table = {}
        if table is not None:
            if self.base is None:
                raise CouplingError("a kernel table needs its base window")
            for y, om in table.items():
                self.table[tuple(y)] = canonical(ctx, om)
                if set(om.window) != set(self.base):
                    raise CouplingError("kernel values must live on the base window")
        self.fn = fn
        self.covariant = covariant

    def __call__(self, window, cfg):
        window = tuple(window)
        if self.fn is not None:
            return canonical(self.ctx, self.fn(window, tuple(cfg)))
        ctx = self.ctx
        if set(window) == set(self.base):
            key = tuple(cfg[window.index(w)] for w in self.base)
            return self._lookup(key)
        if not self.covariant:
            raise CouplingError("kernel undefined on a translated window")
        b0 = self.base[0]
        for v in window:
            beta = ctx.multiply(v, ctx.inverse(b0))
            if set(ctx.multiply(beta, w) for w in self.base) == set(window):
                back_w, back_c = shift_config(ctx, window, cfg, ctx.inverse(beta))
                key = tuple(back_c[back_w.index(w)] for w in self.base)
                return shift_measure(ctx, self._lookup(key), beta)
        raise CouplingError("window is not a translate of the kernel's base window")

    def _lookup(self, key):
        try:
            return self.table[key]
        except KeyError:
            raise CouplingError(f"kernel undefined on configuration {key}") from None


def family_from_kernel(kernel: Kernel, window, y) -> WindowMeasureFamily:
    """ω_y(γ) = κ((γ^{-1})^s·y) for γ in the window."""
    ctx = kernel.ctx
    window = canonical_window(ctx, window)
    members = {}
    for g in window:
        w2, c2 = shift_config(ctx, window, y, ctx.inverse(g))
        members[g] = kernel(w2, c2)
    return WindowMeasureFamily(ctx, window, members)


def xi_construct(kernel: Kernel, nu_prime: WindowMeasure, mu_F) -> JointMeasure:
    """ξ(ν′) = ∫∫ δ_y × θ(ω_y, F) dν′(y) dμ(F)."""
    ctx = kernel.ctx
    nu_prime = canonical(ctx, nu_prime)
    window = nu_prime.window
    parts = []
    mix = _forest_mixture(mu_F)
    for y, m in nu_prime.items():
        fam = family_from_kernel(kernel, window, y)
        for F, w in mix:
            parts.append((w * m, y, forest_measure(fam, F)))
    return JointMeasure.from_parts(window, nu_prime.p, kernel.p, parts)

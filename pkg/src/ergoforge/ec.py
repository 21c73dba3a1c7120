"""Finite searches behind existential closedness.

Every search minimises an exact rational defect over labelings of a
finite space. The exhaustive engine scans all labelings in lexicographic
order (capped) and certifies its minimum; the local engine is seeded
steepest descent with restarts and only reports the best value it saw.
Tolerances are non-strict: a witness succeeds when its defect is ≤ ε.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .cocycles import (
    Cochain,
    CocycleError,
    all_generator_assignments,
    cocycle_defect,
    generator_cocycle,
    skew_product,
)
from .groups import FiniteGroup
from .measures import (
    ExtensionTriple,
    FiniteAction,
    Labeling,
    MeasureError,
    as_fraction,
    default_cap,
    pushforward_distribution,
)
from .search import (
    EXHAUSTIVE,
    LOCAL,
    CapExceeded,
    SearchResult,
    check_engine,
    integer_weights,
    minimize_labeling,
)

ZERO = Fraction(0)


def _labels(alpha):
    return list(alpha.values if isinstance(alpha, Labeling) else alpha)


def _common_weights(*weight_lists):
    flat = [w for ws in weight_lists for w in ws]
    ints, den = integer_weights(flat)
    out, pos = [], 0
    for ws in weight_lists:
        out.append(ints[pos:pos + len(ws)])
        pos += len(ws)
    return out, den


def _pattern_bins(a: FiniteAction, F, p):
    """Index arrays idx[t][x] = point of f_t^{-1}·x, for the codes α_F(x)."""
    ctx = a.ctx
    return [np.array(a.perm(ctx.inverse(f)), dtype=np.int64) for f in F], p ** len(F)


def _pattern_masses(digits, idx, p, extra, w, nbins):
    """(R, nbins) masses of the bins code(α_F(x))·q + extra(x)."""
    R = digits.shape[0]
    code = np.zeros(digits.shape, dtype=np.int64)
    for ix in idx:
        code = code * p + digits[:, ix]
    bins = code * (nbins // (p ** len(idx))) + extra[None, :]
    out = np.zeros((R, nbins), dtype=np.int64)
    rows = np.arange(R)
    for x in range(digits.shape[1]):
        out[rows, bins[:, x]] += w[x]
    return out


def _pattern_table(a: FiniteAction, labels, F, p, extra, q):
    """Exact masses keyed by (π, j) for a fixed labeling."""
    ctx = a.ctx
    perms = [a.perm(ctx.inverse(f)) for f in F]
    out = {}
    for x in range(a.n):
        key = (tuple(labels[pf[x]] for pf in perms), extra[x])
        out[key] = out.get(key, ZERO) + a.weights[x]
    return out


def _max_gap(t1, t2):
    keys = set(t1) | set(t2)
    return max((abs(t1.get(k, ZERO) - t2.get(k, ZERO)) for k in keys), default=ZERO)


# pattern statistics of an extension


@dataclass
class ECQuery:
    """Extension φ: Y → X with labelings α: Y → p, β: X → q, set S and tolerance."""

    extension: ExtensionTriple
    alpha: Labeling
    beta: Labeling
    S: list
    eps: Fraction = ZERO

    def __post_init__(self):
        b, a = self.extension.source, self.extension.target
        if not isinstance(self.alpha, Labeling):
            self.alpha = Labeling(self.alpha)
        if not isinstance(self.beta, Labeling):
            self.beta = Labeling(self.beta)
        if len(self.alpha) != b.n:
            raise MeasureError("α must label every point of Y")
        if len(self.beta) != a.n:
            raise MeasureError("β must label every point of X")
        self.S = list(self.S)
        for s in self.S:
            a.ctx.validate(s)
        self.eps = as_fraction(self.eps)
        if not 0 <= self.eps <= 1:
            raise MeasureError("ε must lie in [0, 1]")

    @property
    def p(self):
        return self.alpha.arity

    @property
    def q(self):
        return self.beta.arity

    def target(self):
        """ν(α_S^{-1}(π) ∩ φ^{-1}β^{-1}(j)) keyed by (π, j)."""
        e = self.extension
        extra = [self.beta[e.phi[y]] for y in range(e.source.n)]
        return _pattern_table(e.source, self.alpha.values, self.S, self.p, extra, self.q)


def criterion_discrepancy(query: ECQuery, alpha_tilde) -> Fraction:
    """max over π, j of |ν(α_S^{-1}π ∩ φ^{-1}β^{-1}j) − μ(α̃_S^{-1}π ∩ β^{-1}j)|."""
    a = query.extension.target
    got = _pattern_table(a, _labels(alpha_tilde), query.S, query.p, query.beta.values, query.q)
    return _max_gap(query.target(), got)


def _target_vector(table, p, m, q, den):
    vec = np.zeros(p**m * q, dtype=np.int64)
    for (pi, j), mass in table.items():
        code = 0
        for d in pi:
            code = code * p + d
        vec[code * q + j] = int(mass * den)
    return vec


def ec_criterion_search(query: ECQuery, engine=EXHAUSTIVE, seed=0, cap=None, restarts=8) -> SearchResult:
    """Search α̃: X → p whose pattern statistics match those of α within ε."""
    check_engine(engine)
    cap = default_cap() if cap is None else cap
    e = query.extension
    a, b = e.target, e.source
    p, q, S = query.p, query.q, query.S
    (wx, _), den = _common_weights(a.weights, b.weights)
    target = _target_vector(query.target(), p, len(S), q, den)
    idx, nb = _pattern_bins(a, S, p)
    extra = np.array(query.beta.values, dtype=np.int64)

    def score(digits):
        m = _pattern_masses(digits, idx, p, extra, wx, nb * q)
        return np.abs(m - target[None, :]).max(axis=1)

    best, arg = minimize_labeling(a.n, p, score, engine, seed, cap, restarts, stop_at=int(query.eps * den))
    value = Fraction(best, den)
    ok = value <= query.eps
    return SearchResult(
        success=ok,
        value=value,
        witness=Labeling(arg, p),
        engine=engine,
        seed=seed if engine == LOCAL else None,
        exact=engine == EXHAUSTIVE,
        reason="" if ok else "minimum discrepancy exceeds ε",
    )


# finite-to-one conditions


def finite_ext_conditions(a: FiniteAction, k, sigma: Cochain, F, beta, alpha):
    """(pushforward gap, independence gap, agreement mass) for α: X → k."""
    labels = _labels(alpha)
    beta = _labels(beta)
    K = sigma.K
    mass_i = [ZERO] * k
    for x, i in enumerate(labels):
        mass_i[i] += a.weights[x]
    gap1 = max(abs(m - Fraction(1, k)) for m in mass_i)
    qs = sorted(set(beta))
    gap2 = ZERO
    for j in qs:
        bj = sum((a.weights[x] for x in range(a.n) if beta[x] == j), ZERO)
        for i in range(k):
            both = sum((a.weights[x] for x in range(a.n) if beta[x] == j and labels[x] == i), ZERO)
            gap2 = max(gap2, abs(both - bj * mass_i[i]))
    good = ZERO
    for x in range(a.n):
        if all(labels[a.act(f, x)] == K.permutation(sigma(f, x))[labels[x]] for f in F):
            good += a.weights[x]
    return gap1, gap2, good


def finite_ext_ec_search(
    a: FiniteAction,
    k,
    sigma: Cochain,
    F,
    eps,
    beta,
    slack=ZERO,
    engine=EXHAUSTIVE,
    seed=0,
    cap=None,
    restarts=8,
) -> SearchResult:
    """Search α: X → k meeting the three finite-to-one conditions.

    (1) |α_*μ(i) − 1/k| ≤ slack for every i; (2) |μ(α^{-1}i ∩ β^{-1}j) −
    μ(α^{-1}i)μ(β^{-1}j)| ≤ ε; (3) μ{x : α(fx) = σ(f, x)(α(x)) ∀f∈F} ≥ 1 − ε.
    Among labelings meeting (1) the search minimises the larger of the
    defects in (2) and (3) (the latter as 1 − mass). When no labeling meets
    (1) the reason is "pushforward infeasible" and ``value`` is the least
    pushforward gap.
    """
    check_engine(engine)
    cap = default_cap() if cap is None else cap
    K = sigma.K
    if K.labels is None or len(K.labels[0]) != k:
        raise CocycleError(f"σ must take values in Sym({k})")
    F = list(F)
    for f in F:
        sigma(f, 0)
    if cocycle_defect(sigma) != 0:
        raise CocycleError("σ is not a cocycle on its support")
    eps, slack = as_fraction(eps), as_fraction(slack)
    beta = _labels(beta)
    if len(beta) != a.n:
        raise MeasureError("β must label every point of X")
    w, den = integer_weights(a.weights)
    scale = k * den * den
    big = 4 * scale
    if big >= 1 << 62:
        raise OverflowError("weights too fine for exact vectorised search")
    bmask = [np.array([bx == j for bx in beta]) for j in sorted(set(beta))]
    bmass = [int(w[m].sum()) for m in bmask]
    fperm = [np.array(a.perm(f), dtype=np.int64) for f in F]
    ptab = np.array(K.labels, dtype=np.int64)
    scol = [np.array(sigma.column(f), dtype=np.int64) for f in F]
    slack_num, slack_den = slack.numerator, slack.denominator

    def score(L):
        masses = np.stack([(L == i).astype(np.int64) @ w for i in range(k)], axis=1)
        g1 = np.abs(k * masses - den).max(axis=1) * den
        feasible = g1 * slack_den <= slack_num * scale
        g2 = np.zeros(L.shape[0], dtype=np.int64)
        for m, bm in zip(bmask, bmass):
            for i in range(k):
                both = ((L == i) & m[None, :]).astype(np.int64) @ w
                g2 = np.maximum(g2, k * np.abs(den * both - bm * masses[:, i]))
        ok = np.ones(L.shape, dtype=bool)
        for fp, sc in zip(fperm, scol):
            ok &= L[:, fp] == ptab[sc[None, :], L]
        g3 = (den - ok.astype(np.int64) @ w) * k * den
        inner = np.maximum(g2, g3)
        return np.where(feasible, inner, big + g1)

    best, arg = minimize_labeling(a.n, k, score, engine, seed, cap, restarts, stop_at=int(eps * scale))
    witness = Labeling(arg, k)
    if best >= big:
        value = Fraction(best - big, scale)
        reason = (
            "pushforward infeasible"
            if engine == EXHAUSTIVE
            else "no labeling found meeting the pushforward condition"
        )
        ok = False
    else:
        value = Fraction(best, scale)
        ok = value <= eps
        reason = "" if ok else "independence or agreement defect exceeds ε"
    g1, g2, good = finite_ext_conditions(a, k, sigma, F, beta, arg)
    return SearchResult(
        success=ok,
        value=value,
        witness=witness,
        engine=engine,
        seed=seed if engine == LOCAL else None,
        exact=engine == EXHAUSTIVE,
        reason=reason,
        details={"pushforward_gap": g1, "independence_gap": g2, "agreement_mass": good},
    )


# the axiom value θ_{k,q,F}


@dataclass
class ThetaInstance:
    k: int
    q: int
    F: list
    A: list | None = None
    B: Cochain | None = None

    def __post_init__(self):
        if self.k < 1 or self.q < 1:
            raise ValueError("k and q must be at least 1")
        self.F = list(self.F)


def theta_components(a: FiniteAction, k, A, B: Cochain, C, F):
    """(φ1(C), φ2(A, C), φ3(B, C)) evaluated point by point."""
    C, A = _labels(C), _labels(A)
    mu = a.weights
    mc = [sum((mu[x] for x in range(a.n) if C[x] == i), ZERO) for i in range(k)]
    phi1 = max(abs(m - Fraction(1, k)) for m in mc)
    phi2 = ZERO
    for j in sorted(set(A)):
        ma = sum((mu[x] for x in range(a.n) if A[x] == j), ZERO)
        for i in range(k):
            both = sum((mu[x] for x in range(a.n) if A[x] == j and C[x] == i), ZERO)
            phi2 = max(phi2, abs(both - ma * mc[i]))
    phi3 = ZERO
    K = B.K
    for g in F:
        for r in range(K.order):
            rho = K.permutation(r)
            P = [x for x in range(a.n) if B(g, x) == r]
            for i in range(k):
                left = {x for x in P if C[x] == i}
                right = {x for x in P if C[a.act(g, x)] == rho[i]}
                phi3 = max(phi3, a.measure(left ^ right))
    return phi1, phi2, phi3


def _theta_inner(a, k, A, B, F, engine, seed, cap, restarts):
    """inf over C of max(φ1, φ2, φ3) for fixed A and B."""
    w, den = integer_weights(a.weights)
    scale = k * den * den
    if scale >= 1 << 62:
        raise OverflowError("weights too fine for exact vectorised search")
    A = _labels(A)
    amask = [np.array([v == j for v in A]) for j in sorted(set(A))]
    amass = [int(w[m].sum()) for m in amask]
    K = B.K
    ptab = np.array(K.labels, dtype=np.int64)
    pieces = []
    for g in F:
        gp = np.array(a.perm(g), dtype=np.int64)
        col = np.array(B.column(g), dtype=np.int64)
        for r in sorted(set(col.tolist())):
            pieces.append((gp, col == r, ptab[r]))

    def score(L):
        masses = np.stack([(L == i).astype(np.int64) @ w for i in range(k)], axis=1)
        out = np.abs(k * masses - den).max(axis=1) * den
        for m, am in zip(amask, amass):
            for i in range(k):
                both = ((L == i) & m[None, :]).astype(np.int64) @ w
                out = np.maximum(out, k * np.abs(den * both - am * masses[:, i]))
        for gp, P, rho in pieces:
            Lg = L[:, gp]
            for i in range(k):
                diff = ((L == i) ^ (Lg == rho[i])) & P[None, :]
                out = np.maximum(out, k * den * (diff.astype(np.int64) @ w))
        return out

    best, arg = minimize_labeling(a.n, k, score, engine, seed, cap, restarts, stop_at=0)
    return Fraction(best, scale), arg


def _cocycles_on(a, K, F, rng=None, samples=None):
    """Sym(k)-valued cocycles with support F: all of them, or a random sample."""
    if rng is None:
        for assignment in all_generator_assignments(a, K):
            sigma = generator_cocycle(a, K, assignment, F)
            if sigma is not None:
                yield sigma
        return
    for _ in range(samples):
        assignment = [[rng.randrange(K.order) for _ in range(a.n)] for _ in range(a.ctx.rank)]
        sigma = generator_cocycle(a, K, assignment, F)
        if sigma is not None:
            yield sigma


def theta_axiom_eval(
    a: FiniteAction,
    inst: ThetaInstance,
    engine=EXHAUSTIVE,
    seed=0,
    cap=None,
    restarts=8,
    samples=32,
) -> SearchResult:
    """sup over A and B of inf over C of max(φ1(C), φ2(A, C), φ3(B, C)).

    Missing A or B are swept exhaustively when the number of outer
    candidates is within the cap, otherwise sampled with the seed; the
    value is then only a lower bound and ``exact`` is false. ``witness``
    holds the worst (A, B) found and the optimal C for them.
    """
    check_engine(engine)
    cap = default_cap() if cap is None else cap
    k, q, F = inst.k, inst.q, inst.F
    K = FiniteGroup.symmetric(k)
    ctx = a.ctx
    rng = random.Random(seed)
    exact = engine == EXHAUSTIVE
    if inst.A is not None:
        As = [_labels(inst.A)]
    elif q**a.n <= cap:
        As = [list(t) for t in product(range(q), repeat=a.n)]
    else:
        As = [[rng.randrange(q) for _ in range(a.n)] for _ in range(samples)]
        exact = False
    if inst.B is not None:
        B = inst.B
        if B.K.labels is None or len(B.K.labels[0]) != k:
            raise CocycleError(f"B must take values in Sym({k})")
        for f in F:
            B(f, 0)
        if cocycle_defect(B) != 0:
            raise CocycleError("B is not a cocycle on its support")
        Bs = [B]
    elif K.order ** (ctx.rank * a.n) <= cap:
        Bs = list(_cocycles_on(a, K, F))
    else:
        Bs = list(_cocycles_on(a, K, F, rng, samples))
        exact = False
    best = None
    for B in Bs:
        for A in As:
            v, C = _theta_inner(a, k, A, B, F, engine, seed, cap, restarts)
            if best is None or v > best[0]:
                best = (v, A, B, C)
    value, A, B, C = best
    return SearchResult(
        success=True,
        value=value,
        witness={"A": Labeling(A, q), "B": B, "C": Labeling(C, k)},
        engine=engine,
        seed=seed,
        exact=exact,
        reason="" if exact else "outer supremum sampled; value is a lower bound",
        details={"outer_candidates": len(As) * len(Bs)},
    )


# weak mixing


@dataclass(frozen=True)
class Cylinder:
    """{x ∈ p^Γ : x(g) = d for every (g, d) in constraints}."""

    constraints: tuple

    @classmethod
    def of(cls, mapping):
        return cls(tuple(sorted(dict(mapping).items())))

    def as_dict(self):
        return dict(self.constraints)


@dataclass
class BernoulliShift:
    """The shift of Γ on p^Γ with i.i.d. coordinates of law ``base``.

    (γx)(δ) = x(γ^{-1}δ), so γ maps the cylinder {x(g) = d} to {x(γg) = d}.
    """

    ctx: object
    base: list = field(default_factory=lambda: [Fraction(1, 2), Fraction(1, 2)])

    def __post_init__(self):
        self.base = [as_fraction(b) for b in self.base]
        if sum(self.base) != 1 or any(b < 0 for b in self.base):
            raise MeasureError("base distribution must be a probability vector")

    def measure(self, cyl: Cylinder):
        out = Fraction(1)
        for _, d in cyl.constraints:
            out *= self.base[d]
        return out

    def translate(self, gamma, cyl: Cylinder):
        m = self.ctx.multiply
        return Cylinder.of({m(gamma, g): d for g, d in cyl.constraints})

    def intersect(self, c1: Cylinder, c2: Cylinder):
        """The intersection, or None when the constraints clash (measure 0)."""
        out = c1.as_dict()
        for g, d in c2.constraints:
            if out.setdefault(g, d) != d:
                return None
        return Cylinder.of(out)

    def correlation(self, A, gamma, B):
        """μ(A ∩ γB)."""
        c = self.intersect(A, self.translate(gamma, B))
        return ZERO if c is None else self.measure(c)


def mixing_defect(model, A, gamma, B):
    """|μ(A ∩ γB) − μ(A)μ(B)| for a FiniteAction or a BernoulliShift."""
    if isinstance(model, BernoulliShift):
        return abs(model.correlation(A, gamma, B) - model.measure(A) * model.measure(B))
    A, B = frozenset(A), frozenset(B)
    return abs(model.measure(A & model.image(gamma, B)) - model.measure(A) * model.measure(B))


def weak_mixing_certificate(model, pairs, eps, G0) -> SearchResult:
    """The first γ in G0 with every |μ(A_i ∩ γB_i) − μ(A_i)μ(B_i)| ≤ ε.

    ``details['worst']`` lists the worst defect of every γ scanned.
    """
    eps = as_fraction(eps)
    worst = []
    found = None
    for g in G0:
        d = max((mixing_defect(model, A, g, B) for A, B in pairs), default=ZERO)
        worst.append((g, d))
        if found is None and d <= eps:
            found = (g, d)
    if found is not None:
        return SearchResult(True, found[1], found[0], EXHAUSTIVE, details={"worst": worst})
    best = min(worst, key=lambda gd: gd[1]) if worst else (None, ZERO)
    return SearchResult(
        False, best[1], best[0], EXHAUSTIVE, reason="no γ in the search set meets ε", details={"worst": worst}
    )


# extension-MD approximation


def extension_pattern_table(e: ExtensionTriple, alpha, beta, F, p):
    """ν(α_F^{-1}π ∩ φ^{-1}β^{-1}j) keyed by (π, j)."""
    beta = _labels(beta)
    extra = [beta[e.phi[y]] for y in range(e.source.n)]
    return _pattern_table(e.source, _labels(alpha), F, p, extra, max(beta, default=0) + 1)


def finite_extension_approx(
    e: ExtensionTriple,
    alpha,
    beta,
    F,
    eps,
    k_max,
    engine=EXHAUSTIVE,
    seed=0,
    cap=None,
    restarts=8,
) -> SearchResult:
    """Skew products X ×_σ k (k ≤ k_max) with α′ matching the pattern statistics of e.

    Candidates are scanned by k, then generator assignment in
    lexicographic order, then α′; the first one within ε is returned,
    otherwise the best seen. The witness is the skew-product extension;
    ``details`` holds k, the generator assignment and α′.
    """
    check_engine(engine)
    cap = default_cap() if cap is None else cap
    eps = as_fraction(eps)
    alpha = alpha if isinstance(alpha, Labeling) else Labeling(alpha)
    p = alpha.arity
    beta = _labels(beta)
    q = max(beta, default=0) + 1
    F = list(F)
    a = e.target
    target_table = extension_pattern_table(e, alpha, beta, F, p)
    best = None
    for k in range(1, k_max + 1):
        K = FiniteGroup.symmetric(k)
        n2 = a.n * k
        if p**n2 > cap and engine == EXHAUSTIVE:
            raise CapExceeded(f"{p}^{n2} labelings of the skew product exceed the cap {cap}")
        for assignment in all_generator_assignments(a, K):
            sigma = generator_cocycle(a, K, assignment, a.ctx.generators())
            if sigma is None:
                continue
            try:
                ext = skew_product(sigma)
            except CocycleError:
                continue
            b = ext.source
            (wb, _), den = _common_weights(b.weights, e.source.weights)
            target = _target_vector(target_table, p, len(F), q, den)
            idx, nb = _pattern_bins(b, F, p)
            extra = np.array([beta[ext.phi[y]] for y in range(b.n)], dtype=np.int64)

            def score(digits, idx=idx, extra=extra, wb=wb, target=target, nb=nb):
                m = _pattern_masses(digits, idx, p, extra, wb, nb * q)
                return np.abs(m - target[None, :]).max(axis=1)

            v, arg = minimize_labeling(b.n, p, score, engine, seed, cap, restarts, stop_at=0)
            value = Fraction(v, den)
            if best is None or value < best[0]:
                best = (value, ext, k, assignment, arg)
            if value <= eps:
                break
        if best is not None and best[0] <= eps:
            break
    value, ext, k, assignment, arg = best
    ok = value <= eps
    return SearchResult(
        success=ok,
        value=value,
        witness=ext,
        engine=engine,
        seed=seed if engine == LOCAL else None,
        exact=engine == EXHAUSTIVE,
        reason="" if ok else "no skew product within ε up to k_max",
        details={"k": k, "assignment": assignment, "alpha": Labeling(arg, p)},
    )


# open mapping on window measures


def joint_pattern(a: FiniteAction, beta, gamma, window, q, p):
    """((β × γ)_W)_*μ as a dict keyed by (y, z) window configurations."""
    ctx = a.ctx
    beta, gamma = _labels(beta), _labels(gamma)
    perms = [a.perm(ctx.inverse(w)) for w in window]
    out = {}
    for x in range(a.n):
        key = (tuple(beta[pw[x]] for pw in perms), tuple(gamma[pw[x]] for pw in perms))
        out[key] = out.get(key, ZERO) + a.weights[x]
    return out


def ec_lemma_search(a: FiniteAction, beta, lam, eps, engine=EXHAUSTIVE, seed=0, cap=None, restarts=8) -> SearchResult:
    """Search γ: X → p with ((β × γ)_W)_*μ within ε of λ on every window configuration.

    ``lam`` is a :class:`~ergoforge.coupling.JointMeasure` on q^W × p^W.
    ``details['marginal_gap']`` records how far (β_W)_*μ is from the
    q-marginal of λ; the search is only meaningful when that gap is within ε.
    """
    check_engine(engine)
    cap = default_cap() if cap is None else cap
    eps = as_fraction(eps)
    beta = _labels(beta)
    window, q, p = lam.window, lam.q, lam.p
    m = len(window)
    ctx = a.ctx
    coded = pushforward_distribution(a, Labeling(beta, q), window).weights
    marginal_gap = _max_gap(coded, lam.q_marginal().weights)
    (wx, wl), den = _common_weights(a.weights, list(lam.weights.values()))
    nz = p**m
    target = np.zeros(q**m * nz, dtype=np.int64)
    for ((y, z), _), mass in zip(lam.weights.items(), wl):
        yc = 0
        for d in y:
            yc = yc * q + d
        zc = 0
        for d in z:
            zc = zc * p + d
        target[yc * nz + zc] = mass
    idx = [np.array(a.perm(ctx.inverse(w)), dtype=np.int64) for w in window]
    ycode = np.zeros(a.n, dtype=np.int64)
    for ix in idx:
        ycode = ycode * q + np.array(beta, dtype=np.int64)[ix]
    rows_extra = ycode * nz

    def score(digits):
        R = digits.shape[0]
        zc = np.zeros(digits.shape, dtype=np.int64)
        for ix in idx:
            zc = zc * p + digits[:, ix]
        bins = zc + rows_extra[None, :]
        masses = np.zeros((R, target.size), dtype=np.int64)
        rows = np.arange(R)
        for x in range(a.n):
            masses[rows, bins[:, x]] += wx[x]
        return np.abs(masses - target[None, :]).max(axis=1)

    best, arg = minimize_labeling(a.n, p, score, engine, seed, cap, restarts, stop_at=int(eps * den))
    value = Fraction(best, den)
    ok = value <= eps
    return SearchResult(
        success=ok,
        value=value,
        witness=Labeling(arg, p),
        engine=engine,
        seed=seed if engine == LOCAL else None,
        exact=engine == EXHAUSTIVE,
        reason="" if ok else "minimum cylinder defect exceeds ε",
        details={"marginal_gap": marginal_gap},
    )


def ec_lemma_defect(a: FiniteAction, beta, gamma, lam) -> Fraction:
    """max over (y, z) of |((β × γ)_W)_*μ(y, z) − λ(y, z)|."""
    got = joint_pattern(a, beta, gamma, lam.window, lam.q, lam.p)
    return _max_gap(got, lam.weights)

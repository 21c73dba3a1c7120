"""Seeded random instances shared by the unit, property and acceptance tests."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from ergoforge.cocycles import WindowCochain, extend_free_cochain, skew_product
from ergoforge.coupling import WindowMeasureFamily, canonical_window
from ergoforge.groups import FiniteGroup
from ergoforge.measures import FiniteAction, WindowMeasure
from ergoforge.trees import DirectedForest


def random_tree(ctx, vertices, rng, keep=1.0):
    """A random directed forest on ``vertices``; keep < 1 drops edges at random."""
    vertices = list(vertices)
    edges = []
    for i, v in enumerate(vertices[1:], start=1):
        if rng.random() >= keep:
            continue
        u = vertices[rng.randrange(i)]
        edges.append((v, u) if rng.random() < 0.5 else (u, v))
    return DirectedForest(ctx, vertices, edges)


def random_cayley_tree(ctx, ball, rng):
    """A random spanning tree of a Cayley ball using only generator edges."""
    ball = list(ball)
    seen = {ball[0]}
    edges = []
    for v in ball[1:]:
        nbrs = [ctx.multiply(v, s) for s in ctx.symmetric_generators()]
        nbrs = [u for u in nbrs if u in seen]
        u = nbrs[rng.randrange(len(nbrs))]
        edges.append((v, u) if rng.random() < 0.5 else (u, v))
        seen.add(v)
    return DirectedForest(ctx, ball, edges)


def random_window_cochain(ctx, G, vertices, rng):
    """Arbitrary values c(β)(α) for α, αβ in ``vertices``."""
    vals = {}
    for a in vertices:
        ia = ctx.inverse(a)
        for v in vertices:
            vals[(ctx.multiply(ia, v), a)] = rng.randrange(G.order)
    return WindowCochain(ctx, G, vals)


def random_window_cocycle(ctx, G, vertices, rng):
    u = {v: rng.randrange(G.order) for v in vertices}
    return WindowCochain.from_potential(ctx, G, u, vertices)


def random_rational_measure(window, p, rng, atoms=None, den=12):
    """A random measure on p^W with small denominators."""
    cfgs = list(product(range(p), repeat=len(window)))
    if atoms is not None:
        cfgs = rng.sample(cfgs, min(atoms, len(cfgs)))
    raw = [rng.randrange(den + 1) for _ in cfgs]
    if not any(raw):
        raw[0] = 1
    total = sum(raw)
    return WindowMeasure(window, p, {c: Fraction(r, total) for c, r in zip(cfgs, raw) if r})


def sparse_measure(window, p, rng, atoms=5, den=4):
    """A measure on a few random configurations, for windows too big to enumerate."""
    raw = {}
    for _ in range(atoms):
        cfg = tuple(rng.randrange(p) for _ in window)
        raw[cfg] = raw.get(cfg, 0) + rng.randrange(1, den + 1)
    total = sum(raw.values())
    return WindowMeasure(window, p, {c: Fraction(r, total) for c, r in raw.items()})


def random_family(ctx, W0, p, rng, atoms=4):
    """Independent random measures ω(γ) on γ^{-1}W0 for γ in W0."""
    members = {}
    for g in W0:
        win = canonical_window(ctx, [ctx.multiply(ctx.inverse(g), w) for w in W0])
        members[g] = random_rational_measure(win, p, rng, atoms=atoms)
    return WindowMeasureFamily(ctx, W0, members)


def random_action(ctx, n, rng, den=None):
    """Random generator permutations of n points with block-constant weights.

    Each generator permutes within blocks of equal weight so the measure
    is preserved; with ``den`` None the weights are uniform.
    """
    if den is None:
        weights = [Fraction(1, n)] * n
    else:
        raw = [rng.randrange(1, den + 1) for _ in range(n)]
        weights = [Fraction(r, sum(raw)) for r in raw]
    blocks = {}
    for x, w in enumerate(weights):
        blocks.setdefault(w, []).append(x)
    perms = []
    for _ in range(ctx.rank):
        perm = list(range(n))
        for pts in blocks.values():
            img = pts[:]
            rng.shuffle(img)
            for x, y in zip(pts, img):
                perm[x] = y
        perms.append(tuple(perm))
    return FiniteAction(ctx, weights, perms)


def canonical_ball(ctx, ball):
    return canonical_window(ctx, list(ball))


def random_skew_extension(a, k, rng):
    """A skew product of ``a`` over a random Sym(k) generator assignment."""
    K = FiniteGroup.symmetric(k)
    assignment = [[rng.randrange(K.order) for _ in range(a.n)] for _ in range(a.ctx.rank)]
    return skew_product(extend_free_cochain(a, K, assignment, a.ctx.generators()))


def random_labels(n, p, rng):
    return [rng.randrange(p) for _ in range(n)]

"""Directed forests on windows, their components, and tree retractions.

Edge (v, u) of a forest T carries the label g(v, u) = c(u^{-1}v)(u) for a
window cochain c, and g(u, v) = g(v, u)^{-1}. The retraction r_T(c)(β)(α)
multiplies the labels along the path from α to αβ, later steps on the left.
"""

from __future__ import annotations

from collections import deque

import networkx as nx

from .cocycles import CocycleError, WindowCochain, WindowEscape
from .groups import GroupContext


class ForestError(ValueError):
    pass


class DirectedForest:
    """An antisymmetric edge set on a vertex window whose undirected graph is acyclic."""

    def __init__(self, ctx: GroupContext, vertices, edges):
        self.ctx = ctx
        self.vertices = tuple(vertices)
        self.edges = tuple(tuple(e) for e in edges)
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ForestError("vertices must be distinct")
        seen = set()
        for v, u in self.edges:
            if v not in vset or u not in vset:
                raise ForestError(f"edge ({ctx.format(v)}, {ctx.format(u)}) leaves the vertex set")
            if v == u:
                raise ForestError(f"self-loop at {ctx.format(v)}")
            if (v, u) in seen:
                raise ForestError("repeated edge")
            if (u, v) in seen:
                raise ForestError("edge set meets its reverse")
            seen.add((v, u))
        g = self.graph()
        if not nx.is_forest(g):
            raise ForestError("edges contain an undirected cycle")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self._components = None

    def graph(self):
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    def __eq__(self, other):
        return (
            isinstance(other, DirectedForest)
            and set(self.vertices) == set(other.vertices)
            and set(self.edges) == set(other.edges)
        )

    def __hash__(self):
        return hash((frozenset(self.vertices), frozenset(self.edges)))

    def __repr__(self):
        return f"DirectedForest({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def translate(self, gamma):
        """γ^d·F: every vertex and edge multiplied on the left by γ."""
        m = self.ctx.multiply
        return DirectedForest(
            self.ctx,
            [m(gamma, v) for v in self.vertices],
            [(m(gamma, v), m(gamma, u)) for v, u in self.edges],
        )

    def components(self):
        if self._components is None:
            self._components = components(self)
        return self._components

    def is_spanning_tree(self):
        return len(self.components().classes) == 1

    def path(self, start, end):
        """The unique vertex path from start to end."""
        comp = self.components()
        if start not in self._index or end not in self._index:
            raise WindowEscape("path endpoint outside the forest")
        if comp.class_of(start) != comp.class_of(end):
            raise WindowEscape(
                f"{self.ctx.format(start)} and {self.ctx.format(end)} lie in different components"
            )
        return nx.shortest_path(self.graph(), start, end)


class ComponentRelation:
    """A partition of a window into classes, each listed in window order."""

    def __init__(self, classes):
        self.classes = [tuple(c) for c in classes]
        self._of = {}
        for i, c in enumerate(self.classes):
            for v in c:
                if v in self._of:
                    raise ForestError("classes overlap")
                self._of[v] = i

    def class_of(self, v):
        try:
            return self._of[v]
        except KeyError:
            raise WindowEscape("vertex outside the partitioned window") from None

    def same(self, u, v):
        return self.class_of(u) == self.class_of(v)

    def __eq__(self, other):
        return isinstance(other, ComponentRelation) and {frozenset(c) for c in self.classes} == {
            frozenset(c) for c in other.classes
        }

    def __len__(self):
        return len(self.classes)

    def __repr__(self):
        return f"ComponentRelation({[len(c) for c in self.classes]})"

    @classmethod
    def singletons(cls, window):
        return cls([(v,) for v in window])

    @classmethod
    def whole(cls, window):
        return cls([tuple(window)])


def components(F: DirectedForest) -> ComponentRelation:
    """Connected components of F ∪ F̄, ordered by first vertex in window order."""
    order = {v: i for i, v in enumerate(F.vertices)}
    comps = [sorted(c, key=order.__getitem__) for c in nx.connected_components(F.graph())]
    comps.sort(key=lambda c: order[c[0]])
    return ComponentRelation(comps)


def edge_label(ctx, c: WindowCochain, v, u):
    """g(v, u) = c(u^{-1}v)(u)."""
    return c(ctx.multiply(ctx.inverse(u), v), u)


def _oriented_label(F, c, frm, to, directed):
    """Label of the step frm → to, i.e. g(to, frm)."""
    ctx, G = F.ctx, c.G
    if (to, frm) in directed:
        return edge_label(ctx, c, to, frm)
    return G.inv[edge_label(ctx, c, frm, to)]


def _potentials(F: DirectedForest, c: WindowCochain):
    """P(v) = product of labels along the path root → v, per component."""
    G = c.G
    directed = set(F.edges)
    adj = {v: [] for v in F.vertices}
    for v, u in F.edges:
        adj[v].append(u)
        adj[u].append(v)
    pot = {}
    for comp in F.components().classes:
        root = comp[0]
        pot[root] = G.identity
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in pot:
                    pot[v] = G.mul(_oriented_label(F, c, u, v, directed), pot[u])
                    queue.append(v)
    return pot


def retract(T: DirectedForest, c: WindowCochain, pairs=None) -> WindowCochain:
    """r_T(c) on the requested (β, α) pairs.

    Defaults to every pair with α and αβ in one component. A requested pair
    whose endpoints are outside the forest or in different components raises
    :class:`WindowEscape`.
    """
    ctx, G = T.ctx, c.G
    pot = _potentials(T, c)
    comp = T.components()
    if pairs is None:
        pairs = []
        for cl in comp.classes:
            for a in cl:
                ia = ctx.inverse(a)
                for v in cl:
                    pairs.append((ctx.multiply(ia, v), a))
    out = {}
    for b, a in pairs:
        v = ctx.multiply(a, b)
        if a not in pot or v not in pot:
            raise WindowEscape(
                f"pair β={ctx.format(b)}, α={ctx.format(a)} leaves the forest"
            )
        if not comp.same(a, v):
            raise WindowEscape(
                f"α={ctx.format(a)} and αβ={ctx.format(v)} lie in different components"
            )
        out[(b, a)] = G.mul(pot[v], G.inv[pot[a]])
    return WindowCochain(ctx, G, out)


def retract_along_path(T: DirectedForest, c: WindowCochain, beta, alpha, path=None):
    """r_T(c)(β)(α) as the explicit product g(v_n, v_{n-1}) ⋯ g(v_1, v_0).

    ``path`` may be any walk from α to αβ in T; by default the geodesic.
    """
    ctx, G = T.ctx, c.G
    end = ctx.multiply(alpha, beta)
    if path is None:
        path = T.path(alpha, end)
    if path[0] != alpha or path[-1] != end:
        raise CocycleError("path does not join α to αβ")
    directed = set(T.edges)
    acc = G.identity
    for frm, to in zip(path, path[1:]):
        if (to, frm) not in directed and (frm, to) not in directed:
            raise CocycleError("path uses a non-edge")
        acc = G.mul(_oriented_label(T, c, frm, to, directed), acc)
    return acc


def lift(T: DirectedForest, window):
    """ℓ(T)(γ) = (γ^{-1})^d·T for γ in the window."""
    ctx = T.ctx
    return {g: T.translate(ctx.inverse(g)) for g in window}


def shift_tree_field(ctx, y, gamma):
    """(γ^s y)(δ) = y(γ^{-1}δ)."""
    return {ctx.multiply(gamma, a): t for a, t in y.items()}


def lifted_retraction(y, c: WindowCochain, pairs=None) -> WindowCochain:
    """r̂_y(c)(β)(α) = r_{y(α)}((α^{-1})^t·c)(β)(e).

    ``y`` maps each α to a forest. Defaults to every (β, α) with β in the
    component of e in y(α).
    """
    if not y:
        return WindowCochain(c.ctx, c.G, {})
    ctx = next(iter(y.values())).ctx
    e = ctx.identity
    out = {}
    wanted = {}
    if pairs is None:
        for a, tree in y.items():
            comp = tree.components()
            if e not in tree._index:
                raise WindowEscape(f"y({ctx.format(a)}) does not contain the identity")
            wanted[a] = [b for b in comp.classes[comp.class_of(e)]]
    else:
        for b, a in pairs:
            wanted.setdefault(a, []).append(b)
    for a, betas in wanted.items():
        if a not in y:
            raise WindowEscape(f"no tree assigned to α={ctx.format(a)}")
        shifted = c.t_action(ctx.inverse(a))
        r = retract(y[a], shifted, [(b, e) for b in betas])
        for b in betas:
            out[(b, a)] = r(b, e)
    return WindowCochain(ctx, c.G, out)

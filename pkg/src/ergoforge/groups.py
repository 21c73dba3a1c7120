"""Finitely generated groups with computable normal forms.

Four kinds are supported:

* ``free``: free group on k generators. Elements are freely reduced tuples of
  nonzero ints; ``i + 1`` is generator i and ``-(i + 1)`` its inverse.
* ``abelian``: free abelian group of rank d. Elements are exponent tuples.
* ``finite``: finite group given by a multiplication table. Elements are
  indices into the table.
* ``quotient``: finite quotient of a free group, given by the images of the
  free generators in a finite table group. Elements are the image indices.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Hashable, Sequence

Element = Hashable


class GroupError(ValueError):
    pass


class FiniteGroup:
    """A finite group stored as a multiplication table.

    ``table[i][j]`` is the index of ``elements[i] * elements[j]``.
    """

    def __init__(self, table, names=None, labels=None):
        n = len(table)
        self.table = [list(row) for row in table]
        if any(len(row) != n for row in self.table):
            raise GroupError("multiplication table is not square")
        for row in self.table:
            for v in row:
                if not 0 <= v < n:
                    raise GroupError(f"table entry {v} out of range")
        self.order = n
        ident = [i for i in range(n) if all(self.table[i][j] == j for j in range(n))]
        if not ident:
            raise GroupError("table has no identity")
        self.identity = ident[0]
        self.inv = []
        for i in range(n):
            cand = [j for j in range(n) if self.table[i][j] == self.identity]
            if len(cand) != 1 or self.table[cand[0]][i] != self.identity:
                raise GroupError(f"element {i} has no two-sided inverse")
            self.inv.append(cand[0])
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        if len(set(self.names)) != n:
            raise GroupError("element names must be distinct")
        # optional concrete labels, e.g. permutation tuples for Sym(k)
        self.labels = list(labels) if labels is not None else None

    def check_associative(self):
        t = self.table
        n = self.order
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise GroupError(f"table not associative at ({a},{b},{c})")

    def mul(self, a, b):
        return self.table[a][b]

    def prod(self, *xs):
        out = self.identity
        for x in xs:
            out = self.table[out][x]
        return out

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise GroupError(f"unknown element name {name!r}") from None

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self):
        return hash(tuple(map(tuple, self.table)))

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    @classmethod
    def symmetric(cls, k):
        """Sym(k) with elements the permutation tuples in lexicographic order.

        The identity comes first. Composition is ``(s*t)(i) = s(t(i))``, so a
        product acts on {0..k-1} by applying the right factor first.
        """
        perms = list(permutations(range(k)))
        pos = {p: i for i, p in enumerate(perms)}
        table = [[pos[tuple(s[t[i]] for i in range(k))] for t in perms] for s in perms]
        names = ["(" + " ".join(map(str, p)) + ")" for p in perms]
        return cls(table, names, labels=perms)

    @classmethod
    def cyclic(cls, n):
        table = [[(i + j) % n for j in range(n)] for i in range(n)]
        return cls(table, [str(i) for i in range(n)])

    def permutation(self, g):
        """The permutation of {0..k-1} attached to g (Sym(k) only)."""
        if self.labels is None:
            raise GroupError("group elements carry no permutation labels")
        return self.labels[g]


@dataclass(frozen=True)
class Window:
    """An ordered finite list of distinct group elements."""

    elements: tuple
    is_ball: bool = False

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise GroupError("window elements must be distinct")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in set(self.elements)


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?")


class GroupContext:
    """A finitely generated group with unique normal forms.

    Use the classmethods :meth:`free`, :meth:`abelian`, :meth:`finite` and
    :meth:`quotient` to build one.
    """

    def __init__(self, kind, gen_names, table=None, images=None):
        self.kind = kind
        self.gen_names = list(gen_names)
        if len(set(self.gen_names)) != len(self.gen_names):
            raise GroupError("generator names must be distinct")
        self.table = table
        self.images = list(images) if images is not None else None
        self._words = None

    # constructors

    @classmethod
    def free(cls, k, names=None):
        names = names or _default_names(k)
        if len(names) != k:
            raise GroupError("need one name per generator")
        return cls("free", names)

    @classmethod
    def abelian(cls, d, names=None):
        names = names or _default_names(d)
        if len(names) != d:
            raise GroupError("need one name per generator")
        return cls("abelian", names)

    @classmethod
    def finite(cls, group: FiniteGroup, generators, names=None):
        """Finite group with chosen generating elements (indices or names)."""
        gens = [g if isinstance(g, int) else group.index(g) for g in generators]
        names = names or [group.names[g] for g in gens]
        ctx = cls("finite", names, table=group, images=gens)
        ctx._check_generates()
        return ctx

    @classmethod
    def quotient(cls, group: FiniteGroup, images, names=None):
        """Quotient of the free group on len(images) generators onto ``group``.

        Generator i maps to ``images[i]``; the images must generate.
        """
        imgs = [g if isinstance(g, int) else group.index(g) for g in images]
        names = names or _default_names(len(imgs))
        ctx = cls("quotient", names, table=group, images=imgs)
        ctx._check_generates()
        return ctx

    def _check_generates(self):
        if len(self.elements_by_bfs()) != self.table.order:
            raise GroupError("generators do not generate the finite group")

    # basic structure

    @property
    def rank(self):
        return len(self.gen_names)

    @property
    def is_free(self):
        return self.kind == "free"

    @property
    def is_finite(self):
        return self.kind in ("finite", "quotient")

    @property
    def identity(self):
        if self.kind == "free":
            return ()
        if self.kind == "abelian":
            return (0,) * self.rank
        return self.table.identity

    def generator(self, i, sign=1):
        """The element for generator i (sign -1 gives its inverse)."""
        if not 0 <= i < self.rank:
            raise GroupError(f"generator index {i} out of range")
        if self.kind == "free":
            return (sign * (i + 1),)
        if self.kind == "abelian":
            v = [0] * self.rank
            v[i] = sign
            return tuple(v)
        g = self.images[i]
        return g if sign == 1 else self.table.inv[g]

    def generators(self):
        return [self.generator(i) for i in range(self.rank)]

    def symmetric_generators(self):
        """Generators and inverses, in the order s0, s0^-1, s1, s1^-1, ..."""
        out = []
        for i in range(self.rank):
            for sign in (1, -1):
                g = self.generator(i, sign)
                if g not in out:
                    out.append(g)
        return out

    def validate(self, g):
        if self.kind == "free":
            if not isinstance(g, tuple) or any(
                not isinstance(s, int) or s == 0 or abs(s) > self.rank for s in g
            ):
                raise GroupError(f"malformed free group word {g!r}")
            if any(g[i] == -g[i + 1] for i in range(len(g) - 1)):
                raise GroupError(f"word {g!r} is not freely reduced")
        elif self.kind == "abelian":
            if not isinstance(g, tuple) or len(g) != self.rank or any(
                not isinstance(s, int) for s in g
            ):
                raise GroupError(f"malformed exponent vector {g!r}")
        else:
            if not isinstance(g, int) or not 0 <= g < self.table.order:
                raise GroupError(f"malformed finite group element {g!r}")
        return g

    def multiply(self, g, h):
        if self.kind == "free":
            return _free_reduce(g, h)
        if self.kind == "abelian":
            return tuple(a + b for a, b in zip(g, h))
        return self.table.table[g][h]

    def prod(self, *xs):
        out = self.identity
        for x in xs:
            out = self.multiply(out, x)
        return out

    def inverse(self, g):
        if self.kind == "free":
            return tuple(-s for s in reversed(g))
        if self.kind == "abelian":
            return tuple(-s for s in g)
        return self.table.inv[g]

    def power(self, g, n):
        if n < 0:
            g, n = self.inverse(g), -n
        out = self.identity
        for _ in range(n):
            out = self.multiply(out, g)
        return out

    def word(self, g):
        """A word for g as a list of (generator index, sign) pairs.

        Free groups return the reduced word, abelian groups the sorted
        exponent word, finite kinds a shortest word found by BFS.
        """
        if self.kind == "free":
            return [(abs(s) - 1, 1 if s > 0 else -1) for s in g]
        if self.kind == "abelian":
            out = []
            for i, e in enumerate(g):
                out.extend([(i, 1 if e > 0 else -1)] * abs(e))
            return out
        if self._words is None:
            self.elements_by_bfs()
        return list(self._words[g])

    def elements_by_bfs(self):
        """All elements of a finite kind, in BFS order from the identity."""
        if not self.is_finite:
            raise GroupError("only finite kinds can be enumerated")
        words = {self.identity: ()}
        order = [self.identity]
        queue = deque([self.identity])
        while queue:
            g = queue.popleft()
            for i in range(self.rank):
                for sign in (1, -1):
                    h = self.multiply(self.generator(i, sign), g)
                    if h not in words:
                        words[h] = ((i, sign),) + words[g]
                        order.append(h)
                        queue.append(h)
        self._words = words
        return order

    def sort_key(self, g):
        """Fixed enumeration of the group used for lexicographic orders.

        Free groups use shortlex with s0 < s0^-1 < s1 < ...; this agrees with
        the order in which :func:`cayley_ball` lists elements.
        """
        if self.kind == "free":
            return (len(g), tuple(2 * (abs(s) - 1) + (s < 0) for s in g))
        if self.kind == "abelian":
            return (sum(map(abs, g)), tuple((abs(s), s < 0) for s in g))
        return (g,)

    # text form

    def format(self, g):
        if self.kind == "free":
            if not g:
                return "e"
            parts = []
            i = 0
            while i < len(g):
                j = i
                while j < len(g) and g[j] == g[i]:
                    j += 1
                name = self.gen_names[abs(g[i]) - 1]
                exp = (j - i) * (1 if g[i] > 0 else -1)
                parts.append(name if exp == 1 else f"{name}^{exp}")
                i = j
            return "*".join(parts)
        if self.kind == "abelian":
            parts = [
                n if e == 1 else f"{n}^{e}" for n, e in zip(self.gen_names, g) if e
            ]
            return "*".join(parts) or "e"
        return self.table.names[g]

    def parse(self, text):
        """Parse a word such as ``a*b^-1*a`` (or ``ab^-1a`` with one-letter names).

        For finite kinds an element name of the table is also accepted.
        """
        text = text.strip()
        if self.is_finite and text in self.table.names and text not in self.gen_names:
            return self.table.names.index(text)
        if text in ("", "e", "1"):
            return self.identity
        g = self.identity
        pos = 0
        s = text.replace("*", " ")
        while pos < len(s):
            if s[pos].isspace():
                pos += 1
                continue
            name = self._match_name(s, pos)
            if name is None:
                raise GroupError(f"cannot parse word {text!r} at position {pos}")
            pos += len(name)
            exp = 1
            m = re.match(r"\^(-?\d+)", s[pos:])
            if m:
                exp = int(m.group(1))
                pos += m.end()
            gen = self.generator(self.gen_names.index(name))
            g = self.multiply(g, self.power(gen, exp))
        return g

    def _match_name(self, s, pos):
        best = None
        for name in self.gen_names:
            if s.startswith(name, pos) and (best is None or len(name) > len(best)):
                best = name
        return best

    def describe(self):
        if self.kind == "free":
            return f"free group on {self.rank} generators"
        if self.kind == "abelian":
            return f"free abelian group of rank {self.rank}"
        if self.kind == "finite":
            return f"finite group of order {self.table.order}"
        return f"quotient of F{self.rank} of order {self.table.order}"


def _default_names(k):
    letters = "abcdefghijklmnopqrstuvwxyz"
    if k <= len(letters):
        return list(letters[:k])
    return [f"s{i}" for i in range(k)]


def _free_reduce(g, h):
    out = list(g)
    for s in h:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def multiply(ctx: GroupContext, g, h):
    ctx.validate(g)
    ctx.validate(h)
    return ctx.multiply(g, h)


def cayley_ball(ctx: GroupContext, radius: int, S: Sequence | None = None) -> Window:
    """All products of at most ``radius`` elements of S, identity first.

    S defaults to the symmetric generating set. Elements appear in BFS order,
    each level in the order its parents were found and then the order of S.
    """
    if radius < 0:
        raise GroupError("radius must be nonnegative")
    S = list(S) if S is not None else ctx.symmetric_generators()
    seen = {ctx.identity}
    order = [ctx.identity]
    frontier = [ctx.identity]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in S:
                h = ctx.multiply(g, s)
                if h not in seen:
                    seen.add(h)
                    order.append(h)
                    nxt.append(h)
        frontier = nxt
    return Window(tuple(order), is_ball=True)


def free_ball_size(k, r):
    """Closed-form size of the radius-r ball in the free group of rank k."""
    return 1 + sum(2 * k * (2 * k - 1) ** (i - 1) for i in range(1, r + 1))


@dataclass
class QuotientData:
    """A finite-index subgroup given by a membership test and a transversal.

    ``transversal[i]`` represents coset i; ``transversal[0]`` must be the
    identity. Construction verifies the data, it never derives it.
    """

    ctx: GroupContext
    member: Callable
    transversal: list
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ctx = self.ctx
        if not self.transversal or self.transversal[0] != ctx.identity:
            raise GroupError("transversal must start with the identity")
        for r in self.transversal:
            ctx.validate(r)
        n = len(self.transversal)
        for i in range(n):
            for j in range(i + 1, n):
                ri, rj = self.transversal[i], self.transversal[j]
                if self.member(ctx.multiply(ctx.inverse(ri), rj)):
                    raise GroupError(
                        f"transversal entries {i} and {j} lie in the same coset"
                    )
        # closure under generators certifies that every coset is represented
        for r in self.transversal:
            for s in ctx.symmetric_generators():
                self.coset_of(ctx.multiply(s, r))

    @property
    def n(self):
        return len(self.transversal)

    def coset_of(self, g):
        """Index of the coset gΛ."""
        if g in self._cache:
            return self._cache[g]
        ctx = self.ctx
        hits = [
            i
            for i, r in enumerate(self.transversal)
            if self.member(ctx.multiply(ctx.inverse(r), g))
        ]
        if len(hits) != 1:
            raise GroupError(
                f"element {ctx.format(g)} matches {len(hits)} cosets; "
                "transversal inconsistent with subgroup"
            )
        self._cache[g] = hits[0]
        return hits[0]

    @classmethod
    def whole(cls, ctx):
        return cls(ctx, lambda g: True, [ctx.identity], "whole group")

    @classmethod
    def from_elements(cls, ctx, members, transversal):
        """Subgroup of a finite kind listed element by element."""
        ms = set(members)
        return cls(ctx, lambda g: g in ms, list(transversal), "listed elements")

    @classmethod
    def from_homomorphism(cls, ctx, target: FiniteGroup, images, transversal, subgroup=None):
        """Preimage of ``subgroup`` (default trivial) under a map into ``target``.

        ``images[i]`` is the image of generator i.
        """
        hom = homomorphism(ctx, target, images)
        sub = set(subgroup) if subgroup is not None else {target.identity}
        return cls(ctx, lambda g: hom(g) in sub, list(transversal), "homomorphism kernel")


def homomorphism(ctx: GroupContext, target: FiniteGroup, images):
    """The map on ctx sending generator i to ``images[i]``, evaluated on words."""
    imgs = [g if isinstance(g, int) else target.index(g) for g in images]

    def hom(g):
        out = target.identity
        for i, sign in ctx.word(g):
            x = imgs[i] if sign == 1 else target.inv[imgs[i]]
            out = target.mul(out, x)
        return out

    if ctx.is_finite:
        # well-definedness: the map must respect the table
        els = ctx.elements_by_bfs()
        for g in els:
            for s in ctx.generators():
                if hom(ctx.multiply(g, s)) != target.mul(hom(g), hom(s)):
                    raise GroupError("generator images do not define a homomorphism")
    return hom


def coset_cocycle(ctx: GroupContext, q: QuotientData, gamma, coset: int):
    """The transversal cocycle ``r(γ a Λ)^{-1} γ r(a Λ)``; checked to lie in Λ."""
    r = q.transversal[coset]
    target = q.coset_of(ctx.multiply(gamma, r))
    val = ctx.prod(ctx.inverse(q.transversal[target]), gamma, r)
    if not q.member(val):
        raise GroupError("cocycle value escaped the subgroup; inconsistent quotient data")
    return val


def finite_quotient_action(ctx: GroupContext, q: QuotientData):
    """Left translation on the cosets, uniform weights."""
    from fractions import Fraction

    from .measures import FiniteAction

    perms = []
    for gen in ctx.generators():
        perms.append(tuple(q.coset_of(ctx.multiply(gen, r)) for r in q.transversal))
    weights = [Fraction(1, q.n)] * q.n
    points = [ctx.format(r) for r in q.transversal]
    return FiniteAction(ctx, weights, perms, points=points)

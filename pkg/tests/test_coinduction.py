from fractions import Fraction

import pytest

from ergoforge.cocycles import trivial_extension
from ergoforge.coinduction import (
    CoinductionError,
    SubgroupAction,
    coinduce,
    disintegrate,
    factor_equivariant,
    is_invariant,
    projection,
    projection_equivariant,
)
from ergoforge.groups import FiniteGroup, GroupContext, QuotientData
from ergoforge.measures import ExtensionTriple, FiniteAction, MeasureError

H = Fraction(1, 2)
Q = Fraction(1, 4)


@pytest.fixture
def z4():
    return GroupContext.quotient(FiniteGroup.cyclic(4), [1])


def even_subgroup(ctx):
    return QuotientData.from_homomorphism(ctx, FiniteGroup.cyclic(2), [1], [ctx.identity, ctx.generator(0)])


def coordinate_marginal(ext, i):
    out = [Fraction(0)] * (max(pt[i] for pt in ext.source.points) + 1)
    for pt, w in zip(ext.source.points, ext.source.weights):
        out[pt[i]] += w
    return out


# disintegration


def test_disintegrate_identity(rot4):
    d = disintegrate(ExtensionTriple(rot4, rot4, [0, 1, 2, 3]))
    assert all(d[x] == {x: 1} for x in range(4))


def test_disintegrate_onto_point(rot4, F1):
    pt = FiniteAction(F1, [Fraction(1)], [(0,)])
    d = disintegrate(ExtensionTriple(rot4, pt, [0] * 4))
    assert d[0] == {y: Q for y in range(4)}


def test_disintegrate_two_to_one(rot4):
    ext = trivial_extension(rot4, 2)
    d = disintegrate(ext)
    for x in range(4):
        fiber = [y for y in range(8) if ext.phi[y] == x]
        assert d[x] == {y: H for y in fiber}
    assert d.recompose() == ext.source.weights


def test_disintegrate_null_point(F1):
    a = FiniteAction(F1, [Fraction(1), Fraction(0)], [(0, 1)])
    d = disintegrate(ExtensionTriple(a, a, [0, 1]))
    with pytest.raises(MeasureError):
        d[1]


# coinduction


def test_coinduce_whole_group(rot4, F1):
    quotient = QuotientData.whole(F1)
    b = SubgroupAction.restrict(rot4, quotient)
    e = coinduce(F1, quotient, b, rot4, [0, 1, 2, 3])
    assert e.source.points == [(y,) for y in range(4)]
    assert e.source.perms == rot4.perms
    assert e.source.weights == rot4.weights


def test_coinduce_trivial_base_is_product(F1):
    quotient = even_subgroup(F1)
    y = FiniteAction(F1, [Q, Q, H], [(1, 0, 2)])
    point = FiniteAction(F1, [Fraction(1)], [(0,)])
    e = coinduce(F1, quotient, SubgroupAction.restrict(y, quotient), point, [0, 0, 0])
    assert e.source.n == 9
    for pt, w in zip(e.source.points, e.source.weights):
        assert w == y.weights[pt[0]] * y.weights[pt[1]]
    assert is_invariant(e.source)


def test_coinduce_z4_model(z4):
    x = FiniteAction(z4, [H, H], [(1, 0)])
    lam = [z4.identity, z4.parse("a^2")]
    quotient = QuotientData.from_elements(z4, lam, [z4.identity, z4.generator(0)])
    b = SubgroupAction.from_table(z4, quotient, [Q] * 4, {z4.parse("a^2"): (1, 0, 3, 2)})
    phi = [0, 0, 1, 1]
    e = coinduce(z4, quotient, b, x, phi)
    elements = z4.elements_by_bfs()
    assert e.source.n == 16
    assert is_invariant(e.source)
    assert projection_equivariant(e, b, lam)
    assert factor_equivariant(e, elements)
    for i in range(2):
        assert coordinate_marginal(e, i) == [Q] * 4
    pi = projection(e)
    assert all(e.phi[z] == phi[pi[z]] for z in range(e.source.n))


def test_coinduced_maps_compose(z4):
    x = FiniteAction(z4, [H, H], [(1, 0)])
    quotient = QuotientData.from_elements(z4, [0, 2], [0, 1])
    b = SubgroupAction.from_table(z4, quotient, [Q] * 4, {2: (1, 0, 3, 2)})
    e = coinduce(z4, quotient, b, x, [0, 0, 1, 1])
    g = e.source.perms[0]
    fourth = list(range(16))
    for _ in range(4):
        fourth = [g[z] for z in fourth]
    assert fourth == list(range(16))


def test_coinduce_rejects_bad_shape(F1, rot4):
    quotient = even_subgroup(F1)
    with pytest.raises(CoinductionError):
        coinduce(F1, quotient, SubgroupAction.restrict(rot4, quotient), rot4, [0, 1, 2])


def test_coinduce_rejects_non_equivariant_map(z4):
    x = FiniteAction(z4, [H, H], [(1, 0)])
    quotient = QuotientData.from_elements(z4, [0, 2], [0, 1])
    b = SubgroupAction.from_table(z4, quotient, [Q] * 4, {2: (1, 0, 3, 2)})
    with pytest.raises(CoinductionError):
        coinduce(z4, quotient, b, x, [0, 1, 0, 1])


def test_subgroup_action_rejects_outsider(F1, rot4):
    b = SubgroupAction.restrict(rot4, even_subgroup(F1))
    with pytest.raises(CoinductionError):
        b.perm(F1.generator(0))


def test_subgroup_action_rejects_weight_change(z4):
    quotient = QuotientData.from_elements(z4, [0, 2], [0, 1])
    b = SubgroupAction.from_table(z4, quotient, [Q, Q, H], {2: (2, 1, 0)})
    with pytest.raises(CoinductionError):
        b.perm(2)

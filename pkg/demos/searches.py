"""Finite searches: extension statistics, weak mixing and coinduction.

Run with ``python demos/searches.py``.
"""

from fractions import Fraction

from ergoforge.cocycles import trivial_extension
from ergoforge.coinduction import SubgroupAction, coinduce, factor_equivariant, is_invariant
from ergoforge.ec import BernoulliShift, Cylinder, ECQuery, ec_criterion_search, weak_mixing_certificate
from ergoforge.groups import FiniteGroup, GroupContext, QuotientData, cayley_ball
from ergoforge.measures import FiniteAction, Labeling

Z = GroupContext.free(1)
rot = FiniteAction(Z, [Fraction(1, 4)] * 4, [(1, 2, 3, 0)])

# can a labeling of X reproduce the pattern statistics of a labeling of its double cover?
ext = trivial_extension(rot, 2)
query = ECQuery(ext, Labeling([0, 1, 1, 0, 0, 0, 1, 1]), Labeling([0, 0, 1, 1]), [Z.identity, Z.generator(0)])
res = ec_criterion_search(query)
print(f"best discrepancy {res.value} with labeling {list(res.witness)} (exact: {res.exact})")

# the Bernoulli shift of F2 decorrelates a coordinate from any translate of itself
F2 = GroupContext.free(2)
A = Cylinder.of({F2.identity: 0})
cert = weak_mixing_certificate(BernoulliShift(F2), [(A, A)], 0, list(cayley_ball(F2, 2)))
print("mixing witness:", F2.format(cert.witness))

# coinduce an action of the even subgroup of Z/4 up to all of Z/4
z4 = GroupContext.quotient(FiniteGroup.cyclic(4), [1])
x = FiniteAction(z4, [Fraction(1, 2)] * 2, [(1, 0)])
even = QuotientData.from_elements(z4, [0, 2], [0, 1])
y = SubgroupAction.from_table(z4, even, [Fraction(1, 4)] * 4, {2: (1, 0, 3, 2)})
big = coinduce(z4, even, y, x, [0, 0, 1, 1])
print("coinduced points:", big.source.n, "invariant:", is_invariant(big.source),
      "equivariant:", factor_equivariant(big, z4.elements_by_bfs()))

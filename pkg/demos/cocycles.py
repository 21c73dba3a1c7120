"""Cocycles over a rotation: coboundaries, skew products and transfer functions.

Run with ``python demos/cocycles.py``.
"""

from fractions import Fraction

from ergoforge.cocycles import (
    Cochain,
    coboundary_density_search,
    coboundary_from,
    coboundary_trivialising_map,
    cocycle_defect,
    is_isomorphism,
    skew_product,
    trivial_extension,
)
from ergoforge.groups import FiniteGroup, GroupContext
from ergoforge.measures import FiniteAction

Z = GroupContext.free(1)
a = Z.generator(0)
K = FiniteGroup.symmetric(2)

# the rotation x -> x+1 on four equally weighted points
rot = FiniteAction(Z, [Fraction(1, 4)] * 4, [(1, 2, 3, 0)])

# f(x) alternates identity and swap; its coboundary is a cocycle
f = [0, 1, 0, 1]
sigma = coboundary_from(rot, f, K, [a, Z.parse("a^2")])
print("coboundary defect:", cocycle_defect(sigma))

# its skew product is the trivial double cover in disguise
ext = skew_product(sigma)
m = coboundary_trivialising_map(f, K)
print("isomorphic to the trivial extension:", is_isomorphism(ext.source, trivial_extension(rot, 2).source, m))

# the density search recovers a transfer function (up to the pinned base point)
res = coboundary_density_search(coboundary_from(rot, f, K, [a]), [a], 0)
print("recovered transfer function:", res.witness, "agreement", res.value)

# one swap around the cycle is not a coboundary: the best transfer function
# agrees on 3/4 of the space
odd = Cochain(rot, K, {(a, x): int(x == 0) for x in range(4)}, [a])
res = coboundary_density_search(odd, [a], 0)
print("odd cocycle:", "success" if res.success else "no exact transfer", "best agreement", res.value)

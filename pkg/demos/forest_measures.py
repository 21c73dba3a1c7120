"""Rerandomizing window measures along forests.

Run with ``python demos/forest_measures.py``.
"""

from fractions import Fraction

from ergoforge.coupling import WindowMeasureFamily, canonical_window, forest_measure, monotone_coupling, rerandomize
from ergoforge.groups import GroupContext, cayley_ball
from ergoforge.measures import WindowMeasure
from ergoforge.trees import DirectedForest

F2 = GroupContext.free(2)
e, a, b = F2.identity, F2.generator(0), F2.generator(1)

# the quantile coupling of two coin flips with different biases
W = (e,)
k0 = WindowMeasure(W, 2, {(0,): Fraction(1, 2), (1,): Fraction(1, 2)})
k1 = WindowMeasure(W, 2, {(0,): Fraction(1, 4), (1,): Fraction(3, 4)})
for (z0, z1), m in sorted(monotone_coupling(k1, k0).weights.items()):
    print(f"couple {z0} -> {z1}: {m}")

# a measure on the radius-1 ball where every coordinate copies the centre
W = canonical_window(F2, list(cayley_ball(F2, 1)))
copy = WindowMeasure(W, 2, {(0,) * len(W): Fraction(1, 2), (1,) * len(W): Fraction(1, 2)})
family = WindowMeasureFamily.coherent(F2, copy)

# a forest joining e to a and a^-1 keeps those three correlated and frees b, b^-1
forest = DirectedForest(F2, W, [(a, e), (e, F2.inverse(a))])
theta = forest_measure(family, forest)
print("forest classes:", [[F2.format(g) for g in c] for c in forest.components().classes])
print("atoms after rerandomizing:", len(theta.weights))
print("agrees with the product of class marginals:", theta == rerandomize(copy, forest))

# a different root for the big component gives the same measure
print("root independent:", forest_measure(family, forest, roots={e: a}) == theta)

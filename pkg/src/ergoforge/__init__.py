"""Exact finite computations for measure-preserving group actions.

Groups and windows live in :mod:`ergoforge.groups`; finite actions, window
measures and entropy in :mod:`ergoforge.measures`; cocycles and skew
products in :mod:`ergoforge.cocycles`; forests and tree retractions in
:mod:`ergoforge.trees`; couplings and forest measures in
:mod:`ergoforge.coupling`; witness searches in :mod:`ergoforge.ec`; and
coinduction in :mod:`ergoforge.coinduction`.
"""

from .cocycles import Cochain, WindowCochain, cocycle_defect, skew_product
from .coupling import (
    JointMeasure,
    MapMeasurePair,
    WindowMeasureFamily,
    compose_pairs,
    forest_measure,
    monotone_coupling,
    rerandomize,
    xi_construct,
    zeta_construct,
)
from .groups import FiniteGroup, GroupContext, QuotientData, cayley_ball
from .measures import ExtensionTriple, FiniteAction, Labeling, WindowMeasure
from .search import SearchResult
from .trees import DirectedForest, retract

__version__ = "0.1.0"

__all__ = [
    "Cochain",
    "DirectedForest",
    "ExtensionTriple",
    "FiniteAction",
    "FiniteGroup",
    "GroupContext",
    "JointMeasure",
    "Labeling",
    "MapMeasurePair",
    "QuotientData",
    "SearchResult",
    "WindowCochain",
    "WindowMeasure",
    "WindowMeasureFamily",
    "cayley_ball",
    "cocycle_defect",
    "compose_pairs",
    "forest_measure",
    "monotone_coupling",
    "rerandomize",
    "retract",
    "skew_product",
    "xi_construct",
    "zeta_construct",
]

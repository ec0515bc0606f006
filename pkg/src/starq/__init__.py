"""Non-formal invariant deformation quantization of the ISO(1,1) coadjoint orbit, numerically."""

from .grid import GridSpec, SampledField, SeminormIndex, sample
from .intertwiner import apply_T, apply_T_inv, invariant_product, trace_defect
from .lie import E, F, H, AlgebraElement, GroupElement, bch, bracket, group_exp, group_log
from .moyal import DeformationProfile, moyal_product
from .orbit import AnalyticField, OrbitPoint, coadjoint_act, gaussian, moment, pullback
from .oscillatory import osc_integral
from .star_exp import StarExponential, multiplier_apply, star_exp

__all__ = [
    "AlgebraElement", "GroupElement", "H", "E", "F", "bch", "bracket", "group_exp", "group_log",
    "OrbitPoint", "AnalyticField", "coadjoint_act", "gaussian", "moment", "pullback",
    "GridSpec", "SampledField", "SeminormIndex", "sample",
    "DeformationProfile", "moyal_product",
    "apply_T", "apply_T_inv", "invariant_product", "trace_defect",
    "osc_integral",
    "StarExponential", "star_exp", "multiplier_apply",
]

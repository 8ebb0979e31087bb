"""Deviation of ergodic integrals along unstable foliations: exact linear
pseudo-Anosov models, hyperbolic toral maps, closest-return decompositions,
finitely additive functionals, and the experiment CLI driving them."""

from .cohomology import (
    ExponentTable,
    IntegerMatrix,
    SpectralSplit,
    characteristic_polynomial,
    deviation_exponents,
    spectral_split,
)
from .iet import IetCombinatorics, PseudoAnosovModel, pa_from_loop, rauzy_step
from .numberfield import FieldElement, NumberField
from .suspension import (
    CellObservable,
    FlowPoint,
    UnstableCurve,
    birkhoff_integral,
    flow_step,
    mean,
)
from .returns import (
    FunctionalValue,
    HomologyClass,
    ReturnDecomposition,
    asymptotic_gap,
    bufetov_beta,
    c_plus,
    decompose_closest_returns,
)
from .torus import (
    ToralMap,
    TrigObservable,
    build_unstable_current,
    exact_correlation,
    make_toral_map,
    transfer_primitive,
    unstable_direction,
)
from .deviation import (
    CorrelationReport,
    DeviationReport,
    basic_current_check,
    correlation_expansion_check,
    deviation_series,
    fit_power_law,
    peel_expansion,
)

__version__ = "0.1.0"

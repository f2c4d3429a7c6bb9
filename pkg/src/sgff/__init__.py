"""Numerical form factors of the exponential operator in the sine-Gordon model.

The multi-soliton form factors are built from free-field averages of
``Z`` operators: products of the kernels ``G``, ``W`` and ``Gbar`` and
contour integrals over ``W`` products.  The integrals are made finite by
contour deformation and analytic continuation of their divergent tails
through asymptotic series in exponentials.
"""

__version__ = "0.1.0"

from .config import FFConfig
from .errors import (
    PoleError,
    QuadratureError,
    SeriesError,
    SGFFError,
    StripError,
    ZeroModeImbalanceError,
)
from .kernels import (
    KernelConfig,
    const_C1,
    const_C2,
    eval_G,
    eval_Gbar,
    eval_S,
    eval_SR,
    eval_ST,
    eval_W,
)
from .asym import AsymSeries, build_W_series, series_eval, series_integrate_neg_halfline, series_product, series_shift
from .contour import deformation_contributions, residue_W, xi_pole_positions
from .regint import IntegrandSpec, RegIntResult, integrand_series, regularized_integral
from .formfactors import (
    ChargeSignature,
    FormFactorEvaluator,
    FormFactorResult,
    ff2,
    ff4,
    ff6,
    form_factor,
    reorder_signature,
)
from .axioms import AxiomReport, free_fermion_ff4, free_fermion_ff6, run_axiom_suite

__all__ = [
    "__version__",
    "FFConfig",
    "KernelConfig",
    "SGFFError",
    "QuadratureError",
    "PoleError",
    "StripError",
    "SeriesError",
    "ZeroModeImbalanceError",
    "eval_G",
    "eval_W",
    "eval_Gbar",
    "eval_S",
    "eval_ST",
    "eval_SR",
    "const_C1",
    "const_C2",
    "AsymSeries",
    "build_W_series",
    "series_product",
    "series_shift",
    "series_eval",
    "series_integrate_neg_halfline",
    "xi_pole_positions",
    "residue_W",
    "deformation_contributions",
    "IntegrandSpec",
    "RegIntResult",
    "integrand_series",
    "regularized_integral",
    "ChargeSignature",
    "FormFactorEvaluator",
    "FormFactorResult",
    "form_factor",
    "ff2",
    "ff4",
    "ff6",
    "reorder_signature",
    "AxiomReport",
    "free_fermion_ff4",
    "free_fermion_ff6",
    "run_axiom_suite",
]

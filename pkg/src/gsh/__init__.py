"""Hermite-spectral toolkit for Gelfand-Shilov spaces and their duals.

Weight sequences and their associated function (``weights``), Hermite
analysis and synthesis (``hermite``), coefficient-space membership
diagnostics (``spaces``), the regularization round trip for dual elements
(``structural``) and kernel-operator coefficients (``kernel``).
"""

from .errors import (
    BoxError,
    GSHError,
    NumericalError,
    PrefixExhaustedError,
    SaturationError,
    ValidationError,
)
from .fields import CoefficientField, SampledFunction, load_field, save_field
from .hermite import (
    analyze,
    gauss_hermite_rule,
    hermite_eval,
    hermite_eval_multi,
    hermite_functions,
    ladder_apply,
    number_power,
    sup_norm_estimate,
    synthesize,
)
from .kernel import (
    KernelCoefficients,
    apply_operator,
    kernel_from_bilinear,
    kernel_growth_check,
    kernel_uniqueness_probe,
    pair_kernel,
    tensor,
    verify_kernel_identity,
)
from .spaces import classify, growth_check, parseval_pair, seminorm_estimate, weighted_norm
from .structural import divisor, oscillator_series_pair, regularize, synthesize_f, verify_bound
from .weights import (
    WeightSequence,
    associated_fn,
    check_m1,
    check_m2,
    check_m3_nontrivial,
    check_m3_quasi,
    log_weight,
    make_sequence,
)

__version__ = "0.1.0"

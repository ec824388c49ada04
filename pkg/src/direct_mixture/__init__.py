"""Finite mixture approximations with a guaranteed symmetrised-KL bound."""

from .convolution import convolution_grid, convolve
from .direct import (
    ConditionalFamily,
    DirectConfig,
    DirectError,
    Grid,
    advance_to_delta,
    bin_weights,
    direct_location,
    direct_sequential,
    location_family,
    normal_scale_family,
)
from .distributions import (
    ChiSquared,
    Distribution,
    Logistic,
    MomentUnavailableError,
    Normal,
    Shifted,
    SkewNormal,
    StudentT,
)
from .divergence import (
    QuadratureError,
    QuadratureSettings,
    SupportMismatchError,
    kl_normal,
    kl_numeric,
    sym_kl_normal,
    sym_kl_numeric,
)
from .mixture import ContinuousMixture, FiniteMixture, from_grid
from .verification import (
    BinCertificate,
    QQReport,
    certify_bins,
    chain_rule_check,
    marginal_divergence,
    qq_compare,
)

__version__ = "0.1.0"

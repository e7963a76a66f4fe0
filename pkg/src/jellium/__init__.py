"""Radial planar Coulomb gases at inverse temperature 2, random polynomial
zeros, and their limiting point processes."""
from .dpp import (
    Jellium,
    KernelSeries,
    PointConfiguration,
    RadialWeightDensity,
    coefficient_bkn,
    exact_extremal_cdf,
    finite_kernel,
    kernel_trace,
    radial_density,
    rescaled_kernel,
    sample_jellium,
)
from .errors import DivergenceError, QuadratureError, TruncationError
from .limits import (
    BulkLimitKernel,
    MittagLefflerFn,
    ProductCDF,
    bergman_kernel_eval,
    bulk_limit_kernel,
    bulk_max_cdf,
    bulk_min_cdf,
    max_modulus_cdf_outside,
    min_modulus_cdf_disk,
    mittag_leffler,
    ml_parameter_for_origin_exponent,
    sample_bergman_disk,
    sample_bergman_norms,
)
from .measures import (
    RadialMeasure,
    RadialPotential,
    builtin_measure,
    circle,
    fubini_study,
    invert,
    pareto_tail,
    potential,
    power_origin,
    scale,
    tabulated,
    uniform_disk,
)
from .polynomials import (
    BasisNorms,
    CoefficientLaw,
    PolynomialSample,
    RootSet,
    basis_norms,
    evaluate,
    find_roots,
    sample_polynomial,
    sample_weyl,
    split_by_region,
)
from .special import upper_incomplete_gamma
from .stats import EmpiricalCDF, KSResult, Model, extremal_campaign, kernel_sup_diff, ks_distance

__version__ = "0.1.0"

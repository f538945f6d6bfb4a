"""copulab: a numerical laboratory for copula-based Markov chains.

Builtin copula families, three perturbation schemes, noise-induced copulas,
fold products, dependence and mixing coefficients, and a Monte Carlo chain
simulator, with quadrature oracles throughout.
"""

__version__ = "0.1.0"

from .core import (
    FGM,
    Frank,
    GridCopula,
    M,
    MDensitySpec,
    Mixture,
    PI,
    Transformed,
    UnitPoint,
    W,
    density_unit_margins,
    make_m_copula,
    make_mixture,
    validate,
)
from .dependence import (
    CoefficientReport,
    blomqvist_beta,
    coefficient_reports,
    gini_gamma,
    kendall_tau,
    perturbation_identities,
    spearman_rho,
    tail_lower,
    tail_upper,
)
from .marginals import (
    ConvolvedMarginal,
    MarginalModel,
    exponential_marginal,
    normal_marginal,
    parse_marginal,
    uniform_marginal,
)
from .mixing import (
    DecayTable,
    MixingReport,
    beta_coeff,
    decay_table,
    geometric_rate_fit,
    mixing_report,
    phi_coeff,
    psi_coeff,
)
from .noise import (
    C5MUniform,
    C6IndepUniform,
    c5_general,
    c6_general,
    c7_general,
    c7_uniform_regions,
    irwin_hall2_cdf,
    irwin_hall2_inv,
    noise_copula,
    tail_coeffs_of_noise,
)
from .perturbations import dolati, hat, mesiar, tilde
from .products import (
    FoldResult,
    binomial_average,
    binomial_mixture_power,
    fold,
    joint_hat,
    joint_tilde,
    n_fold,
)
from .simulate import (
    ChainSample,
    ReachabilityMap,
    beta_noise_floor,
    empirical_beta,
    empirical_grid,
    reachability_map,
    sample_chain,
)
from .specio import PerturbationParams, copula_from_spec, parse_perturbation

__all__ = [
    "FGM", "Frank", "GridCopula", "M", "MDensitySpec", "Mixture", "PI",
    "Transformed", "UnitPoint", "W", "density_unit_margins", "make_m_copula",
    "make_mixture", "validate",
    "CoefficientReport", "blomqvist_beta", "coefficient_reports", "gini_gamma",
    "kendall_tau", "perturbation_identities", "spearman_rho", "tail_lower",
    "tail_upper",
    "ConvolvedMarginal", "MarginalModel", "exponential_marginal",
    "normal_marginal", "parse_marginal", "uniform_marginal",
    "DecayTable", "MixingReport", "beta_coeff", "decay_table",
    "geometric_rate_fit", "mixing_report", "phi_coeff", "psi_coeff",
    "C5MUniform", "C6IndepUniform", "c5_general", "c6_general", "c7_general",
    "c7_uniform_regions", "irwin_hall2_cdf", "irwin_hall2_inv", "noise_copula",
    "tail_coeffs_of_noise",
    "dolati", "hat", "mesiar", "tilde",
    "FoldResult", "binomial_average", "binomial_mixture_power", "fold",
    "joint_hat", "joint_tilde", "n_fold",
    "ChainSample", "ReachabilityMap", "beta_noise_floor", "empirical_beta",
    "empirical_grid", "reachability_map", "sample_chain",
    "PerturbationParams", "copula_from_spec", "parse_perturbation",
    "__version__",
]

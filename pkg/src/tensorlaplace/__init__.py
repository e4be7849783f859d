"""Matrix and tensor variate (generalized) asymmetric Laplace distributions.

Log-densities, characteristic functions, mixture-representation
samplers, analytic moments and affine closure for the matrix and tensor
variate asymmetric Laplace families and their gamma-mixed
generalizations, on Kronecker-structured scales that are never
materialized, plus a Monte Carlo / quadrature verification harness and
a CLI.
"""

from .linalg import (
    NotPositiveDefiniteError,
    SpdMatrix,
    kron_logdet,
    materialize_kron,
    mode_multiply,
    tensor_quadratic_form,
    trace_quadratic_form,
    unvec,
    vec,
)
from .special import bessel_k_integral_oracle, log_bessel_k, log_gamma
from .rng import RngStream, sample_gamma, sample_matrix_normal, sample_tensor_normal
from .distributions import (
    GalKernelInputs,
    MgalParams,
    SampleBatch,
    TgalParams,
    cf,
    cf_mgal,
    cf_tgal,
    covariance_action_mgal,
    covariance_action_tgal,
    gal_log_kernel,
    log_pdf,
    log_pdf_mgal,
    log_pdf_tgal,
    moments,
    moments_mgal,
    moments_tgal,
    sample,
    sample_mgal,
    sample_tgal,
    scale_quadratic_form,
    transform_mgal,
)
from .validation import (
    CfGrid,
    CheckReport,
    EmpiricalMoments,
    analytic_cf,
    cf_gof_distance,
    dense_gal_log_pdf,
    empirical_cf,
    empirical_moments,
    make_cf_grid,
    quadrature_normalization,
    run_check_suite,
)

__version__ = "0.1.0"

__all__ = [
    "NotPositiveDefiniteError",
    "SpdMatrix",
    "kron_logdet",
    "materialize_kron",
    "mode_multiply",
    "tensor_quadratic_form",
    "trace_quadratic_form",
    "unvec",
    "vec",
    "bessel_k_integral_oracle",
    "log_bessel_k",
    "log_gamma",
    "RngStream",
    "sample_gamma",
    "sample_matrix_normal",
    "sample_tensor_normal",
    "GalKernelInputs",
    "MgalParams",
    "SampleBatch",
    "TgalParams",
    "cf",
    "cf_mgal",
    "cf_tgal",
    "covariance_action_mgal",
    "covariance_action_tgal",
    "gal_log_kernel",
    "log_pdf",
    "log_pdf_mgal",
    "log_pdf_tgal",
    "moments",
    "moments_mgal",
    "moments_tgal",
    "sample",
    "sample_mgal",
    "sample_tgal",
    "scale_quadratic_form",
    "transform_mgal",
    "CfGrid",
    "CheckReport",
    "EmpiricalMoments",
    "analytic_cf",
    "cf_gof_distance",
    "dense_gal_log_pdf",
    "empirical_cf",
    "empirical_moments",
    "make_cf_grid",
    "quadrature_normalization",
    "run_check_suite",
]

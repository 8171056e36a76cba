"""Asymptotically distribution-free goodness-of-fit tests for regularly
varying (Pareto-type) right tails."""

__version__ = "0.1.0"

from .core_model import (
    DEFAULT_MIN_TAIL,
    DegenerateSampleError,
    NoExceedancesError,
    ParetoTailModel,
    ReferenceModel,
    SmallTailWarning,
    TailSample,
    fisher_information_h,
    fit_exponent_mle,
    h_cdf,
    h_pdf,
    h_quantile,
    hill_estimator,
    make_tail_sample,
)
from .l2h_geometry import (
    BasisCheckError,
    DenominatorError,
    ScoreBasis,
    beta_g,
    beta_h,
    ell,
    ell_beta_g,
    ell_beta_g_tilde,
    inner_product_h,
    integrate_h,
    make_score_basis,
)
from .quadrature import DEFAULT_ENGINE, QuadratureEngine, QuadratureError
from .simulation import (
    CriticalValueTable,
    EcdfCurve,
    SimulationConfig,
    ThresholdTooHighError,
    build_critical_table,
    build_critical_tables,
    ecdf_sup_distance,
    run_monte_carlo,
    sample_cauchy,
    sample_pareto,
    simulate_replications,
)
from .statistics import (
    StatisticReport,
    TransformedProcess,
    ad_statistic,
    cvm_statistic,
    evaluate_sample,
    ks_statistic,
    p_value,
    transformed_process,
)
from .unitary_transform import (
    TransformCoefficients,
    apply_k_fg,
    apply_k_hat,
    build_transform,
    default_grid,
    expected_phi_tilde,
    phi_tilde,
)

"""Periodic Polya urns: exact enumeration, limit laws, simulation, and the
corner statistics of triangular Young tableaux."""

from .errors import (
    BoundExceeded,
    EmptySample,
    EmptyUrn,
    InconsistentTree,
    InsufficientCounts,
    InvalidParams,
    NonZeroResidual,
    PeriodicUrnError,
    UnbalancedMatrix,
)
from .urn import (
    HistoryTable,
    ReplacementMatrix,
    ResidualReport,
    UrnSpec,
    YoungPolyaFamily,
    asymptotic_moment,
    closed_form_h,
    closed_form_log_h,
    closed_form_m1,
    exact_histories,
    exact_moment,
    float_factorial_moment,
    float_pmf,
    history_count,
    make_urn_spec,
    one_step_recurrence_h,
    pde_residual,
    recurrence_h,
    recurrence_h_sequence,
    young_polya_urn,
)
from .distributions import (
    GenGammaParams,
    ProdGenGammaSpec,
    beta_moment,
    beta_pdf,
    beta_sample,
    gengamma_cdf,
    gengamma_moment,
    gengamma_pdf,
    gengamma_sample,
    prodgengamma_cdf,
    prodgengamma_moment,
    prodgengamma_sample,
)
from .simulate import (
    EmpiricalSample,
    Trajectory,
    normalize,
    replication_stream,
    run_experiment,
    simulate_urn,
)
from .tableau import (
    CornerTrees,
    Tableau,
    TableauShape,
    TreeNode,
    build_trees,
    corner_entry,
    corner_reference_scale,
    corner_statistic,
    count_linear_extensions,
    enumerate_linear_extensions,
    enumerate_syt,
    hook_lengths,
    linear_extension_label_pmf,
    make_shape,
    sample_corner_entries,
    sample_corner_entry,
    sample_linear_extension,
    sample_syt_hookwalk,
    syt_count,
    write_tableau_csv,
)
from .stats import (
    ChiSquareResult,
    ComparisonReport,
    MomentComparison,
    MomentEstimate,
    build_comparison_report,
    chi_square_pmf,
    empirical_moments,
    ks_distance,
)

__version__ = "0.1.0"

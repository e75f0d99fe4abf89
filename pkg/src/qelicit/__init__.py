"""Quality elicitation with multiple price lists for multi-attribute choice.

The package bundles a catalog of context-dependent choice models, the two
price-list formats with their endowment encodings, numeric audits of the
assumptions behind accurate elicitation, a deterministic cohort simulator,
the statistical analysis pipeline (exact sign tests, type classification,
fixed-effects regressions), and prediction-region maps for three-option
price planes.
"""

from .audit import AuditGrid, AuditReport, Verdict, audit, check_injective
from .audit import check_linearity, check_symmetry
from .cohort import (
    DEFAULT_PRODUCTS,
    Dataset,
    Product,
    SubjectProfile,
    SubjectRecord,
    derive_subject_seed,
    simulate_cohort,
    simulate_subject,
    uniform_quality_profiles,
)
from .config import ConfigError, RunConfig, build_model, build_scenario, parse_config
from .dataio import DatasetFormatError, read_dataset, write_dataset
from .elicitation import (
    ElicitationResult,
    MplSpec,
    NoCrossingError,
    Scenario,
    elicit_bisect,
    elicit_marginal_attribute,
    elicit_rowscan,
    encode_row,
    implied_quality,
)
from .models import (
    ASSUMPTION_STATUS,
    CATALOG,
    Alternative,
    Menu,
    ModelError,
    ModelSpec,
    UtilitySpec,
    WeightSpec,
    attribute_evaluation,
    catalog_name,
    cc,
    evaluate,
    evaluate_margin,
    gpn,
    gpn_power,
    ncc,
    normalized_utility,
    pn,
    rn_kinked,
    rn_linear,
    rn_power,
)
from .regions import (
    NoBoundaryError,
    RegionGrid,
    RegionSpec,
    boundary_trace,
    predict_choice,
    region_grid,
)
from .stats import (
    AnalysisConfig,
    AnalysisReport,
    RegressionResult,
    SubjectSummary,
    binom_tail,
    cdf_points,
    cohort_means,
    fe_ols,
    run_analysis,
    sign_test,
    sign_test_counts,
    summarize_subjects,
    threshold_score,
)

__version__ = "0.1.0"

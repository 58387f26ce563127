"""Numerical laboratory for arithmetic structure of random vectors.

Computable pieces of the small-ball / distance-to-subspace story: least
common denominators with censored infimum solvers, the compressible /
incompressible sphere decomposition, weighted lattice nets with the
water-filling regularized matrix norm, Levy concentration and Esseen
bounds, and a deterministic experiment harness measuring the decay
P(dist(X, span A) <= t sqrt(d)) ~ (C t)^d.
"""

from .config import Constants, DEFAULT_CONSTANTS, load_config
from .errors import (
    BudgetError,
    ConfigError,
    InfeasibleError,
    LcdLabError,
    ResolutionError,
)
from .geometry import (
    CompressibilityReport,
    SphereParams,
    SpreadSet,
    compressibility,
    dist_to_integer_lattice,
    distance_to_colspan,
    orthonormal_colspan_basis,
    project_orthocomplement,
    spread_set,
)
from .lcd import (
    LcdQuery,
    LcdResult,
    LcdVariant,
    check_comparison,
    check_monotone_in_L,
    check_stability,
    expected_sq_dist,
    expected_sq_dist_mc,
    gaussian_lattice_sq,
    lcd_infimum,
    lgrid,
    log_rlcd_columns,
    log_rlcd_matrix,
    log_rlcd_subspace,
    stability_epsilon_bound,
    threshold,
)
from .models import (
    EntryDistribution,
    RandomMatrixModel,
    RandomVectorModel,
    SeedSpec,
    SymmetrizedDistribution,
    anticoncentration_level,
    distribution_from_spec,
    sample_matrix,
    sample_matrix_block,
    sample_vector,
    sample_vector_block,
    symmetrize,
)
from .nets import (
    AnnulusLattice,
    LevelSetQuery,
    LevelSetResult,
    NetApproximation,
    RegularizedHsResult,
    StructuredLatticeSample,
    WeightVector,
    approximate_on_net,
    column_norms_sq,
    dominated_element,
    enumerate_annulus_lattice,
    level_set_classify,
    regularized_hs,
    regularized_hs_batch,
    sample_structured_lattice,
    weight_net,
    weight_net_constant,
)
from .smallball import (
    ConcentrationEstimate,
    FiniteVectorLaw,
    SbpBoundInputs,
    charfn_modulus_product,
    charfn_modulus_projected,
    esseen_bound,
    levy_concentration,
    projection_sbp_bound,
    sbp_formula_bound,
)
from .experiments import (
    DistanceExperimentConfig,
    ExperimentRecord,
    PowerLawFit,
    emit_records,
    fit_power_law,
    parse_records,
    render_csv,
    run_compressible_probe,
    run_distance_experiment,
    run_property_suite,
    run_tensorization_probe,
    run_unstructured_probe,
    write_plots,
)

__version__ = "0.1.0"

__all__ = [
    "Constants",
    "DEFAULT_CONSTANTS",
    "load_config",
    "LcdLabError",
    "ConfigError",
    "BudgetError",
    "ResolutionError",
    "InfeasibleError",
    "SphereParams",
    "CompressibilityReport",
    "SpreadSet",
    "compressibility",
    "spread_set",
    "dist_to_integer_lattice",
    "distance_to_colspan",
    "project_orthocomplement",
    "orthonormal_colspan_basis",
    "EntryDistribution",
    "SymmetrizedDistribution",
    "symmetrize",
    "anticoncentration_level",
    "SeedSpec",
    "RandomVectorModel",
    "RandomMatrixModel",
    "sample_vector",
    "sample_vector_block",
    "sample_matrix",
    "sample_matrix_block",
    "distribution_from_spec",
    "LcdVariant",
    "LcdQuery",
    "LcdResult",
    "lcd_infimum",
    "expected_sq_dist",
    "expected_sq_dist_mc",
    "gaussian_lattice_sq",
    "threshold",
    "lgrid",
    "log_rlcd_columns",
    "log_rlcd_matrix",
    "log_rlcd_subspace",
    "check_monotone_in_L",
    "check_comparison",
    "check_stability",
    "stability_epsilon_bound",
    "WeightVector",
    "weight_net",
    "weight_net_constant",
    "dominated_element",
    "AnnulusLattice",
    "enumerate_annulus_lattice",
    "RegularizedHsResult",
    "regularized_hs",
    "regularized_hs_batch",
    "column_norms_sq",
    "NetApproximation",
    "approximate_on_net",
    "LevelSetQuery",
    "LevelSetResult",
    "level_set_classify",
    "StructuredLatticeSample",
    "sample_structured_lattice",
    "FiniteVectorLaw",
    "ConcentrationEstimate",
    "levy_concentration",
    "charfn_modulus_product",
    "charfn_modulus_projected",
    "esseen_bound",
    "SbpBoundInputs",
    "sbp_formula_bound",
    "projection_sbp_bound",
    "DistanceExperimentConfig",
    "ExperimentRecord",
    "run_distance_experiment",
    "PowerLawFit",
    "fit_power_law",
    "emit_records",
    "parse_records",
    "render_csv",
    "write_plots",
    "run_compressible_probe",
    "run_tensorization_probe",
    "run_unstructured_probe",
    "run_property_suite",
]

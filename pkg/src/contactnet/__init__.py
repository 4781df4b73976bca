"""Generative contact-network models benchmarked by the epidemics they produce.

Fit edge-probability models (Erdos-Renyi, degree-matched, blockmodel,
degree-corrected blockmodel) to an observed contact network, sample synthetic
networks, run chain-binomial SIR epidemics on both, and score each model by
how closely its mean epidemic curves track the real network's.
"""

from .community import Partition, SpectralConfig, spectral_cluster, write_partition_csv
from .errors import (
    ConfigError,
    ContactNetError,
    DataError,
    FitError,
    NumericError,
    ParseError,
    UndefinedStatisticError,
)
from .graph import (
    AttendanceRecord,
    ContactEvent,
    DegreeStats,
    Graph,
    attendance_to_graph,
    clustering_coefficient,
    contacts_to_graph,
    degree_stats,
    density,
    load_attendance,
    load_contacts,
    load_edge_list,
    read_graph,
    write_edge_list,
)
from .harness import (
    EnsembleConfig,
    ExperimentConfig,
    ModelSpec,
    ResultsReport,
    TOOL_VERSION,
    config_from_dict,
    config_to_dict,
    dataset_stats,
    fit_model,
    load_config,
    run_experiment,
)
from .metrics import (
    MeanCurves,
    QualityRow,
    area_between,
    mean_curves,
    quality_table,
    read_curves_csv,
    render_quality_table,
    write_curves_csv,
)
from .models import (
    DcsbmModel,
    DegreeModel,
    EdgeProbabilityModel,
    ErModel,
    ModelFitReport,
    SbmModel,
    fit_dcsbm,
    fit_degree,
    fit_er,
    fit_report,
    fit_sbm,
    load_model,
    log_likelihood_per_pair,
    sample_graph,
    save_model,
)
from .seeding import derived_rng, derived_seed, seed_sequence
from .sir import (
    SirParams,
    Trajectory,
    exact_sir_expected_curves,
    simulate_ensemble,
    simulate_sir,
    write_trajectories_csv,
)

__version__ = TOOL_VERSION

__all__ = [
    "AttendanceRecord",
    "ConfigError",
    "ContactEvent",
    "ContactNetError",
    "DataError",
    "DcsbmModel",
    "DegreeModel",
    "DegreeStats",
    "EdgeProbabilityModel",
    "EnsembleConfig",
    "ErModel",
    "ExperimentConfig",
    "FitError",
    "Graph",
    "MeanCurves",
    "ModelFitReport",
    "ModelSpec",
    "NumericError",
    "ParseError",
    "Partition",
    "QualityRow",
    "ResultsReport",
    "SbmModel",
    "SirParams",
    "SpectralConfig",
    "TOOL_VERSION",
    "Trajectory",
    "UndefinedStatisticError",
    "area_between",
    "attendance_to_graph",
    "clustering_coefficient",
    "config_from_dict",
    "config_to_dict",
    "contacts_to_graph",
    "dataset_stats",
    "degree_stats",
    "density",
    "derived_rng",
    "derived_seed",
    "exact_sir_expected_curves",
    "fit_dcsbm",
    "fit_degree",
    "fit_er",
    "fit_model",
    "fit_report",
    "fit_sbm",
    "load_attendance",
    "load_config",
    "load_contacts",
    "load_edge_list",
    "load_model",
    "log_likelihood_per_pair",
    "mean_curves",
    "quality_table",
    "read_curves_csv",
    "read_graph",
    "render_quality_table",
    "run_experiment",
    "sample_graph",
    "save_model",
    "seed_sequence",
    "simulate_ensemble",
    "simulate_sir",
    "spectral_cluster",
    "write_curves_csv",
    "write_edge_list",
    "write_partition_csv",
    "write_trajectories_csv",
    "__version__",
]

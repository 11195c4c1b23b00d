"""Truncated spectral decomposition of sparse random graphs.

The package covers the full pipeline: latent-position graph models and
samplers, a thick-restart Lanczos solver with a relative-residual stopping
rule, tolerance heuristics calibrated to sampling noise, subspace and
clustering metrics, and a reproducible experiment harness with a CLI.
"""
from .errors import (
    DegenerateDelta,
    DegenerateGraph,
    DimensionMismatch,
    DomainError,
    EmptyGraph,
    EmptyRange,
    EmptySpectrum,
    KTooLarge,
    LengthMismatch,
    NoConvergence,
    NotOrthonormal,
    NotPositiveSemidefinite,
    NotSymmetric,
    ParseError,
    RankDeficient,
    SingleCluster,
    SpectolError,
    TooFewValues,
    TooLarge,
    ZeroRho,
)
from .graph_model import (
    AssumptionReport,
    FactoredProbabilityMatrix,
    LatentPositions,
    SbmSpec,
    SparseGraph,
    check_assumptions,
    eigengap_ratio,
    max_row_sum,
    sample_adjacency,
    sbm_to_latent,
)
from .spectral_core import (
    SpectralDecomposition,
    dense_eig_oracle,
    estimate_spectral_norm,
    matvec,
    residual_norm,
    ritz_gap_rho,
    truncated_eigs,
)
from .tolerance import (
    BoundEnvelope,
    ToleranceReport,
    bound_envelope,
    conservative_tolerance,
    expected_squared_deviation_diagonal,
    heuristic_tolerance,
    sampling_error_constant,
    tolerance_report,
)
from .metrics import (
    Clustering,
    SilhouetteResult,
    adjusted_rand_index,
    canonical_angles,
    choose_k_by_silhouette,
    kmeans,
    procrustes_distance,
    silhouette_width,
    zhu_ghodsi_dimension,
)
from .experiments import (
    IngestResult,
    StabilityRecord,
    SweepConfig,
    SweepRecord,
    ingest_edge_list,
    load_sweep_config,
    run_clustering_stability,
    run_tolerance_sweep,
    write_edge_list,
    write_records_csv,
    read_sweep_csv,
)
from .cli import cli_main

__version__ = "0.1.0"

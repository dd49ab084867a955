"""Skewness-aware streaming vertex-cut graph partitioning toolkit."""

from .cluster_graph import (
    ClusterGraph,
    CountMinSketch,
    SketchConfig,
    build_cluster_graph,
    cms_insert,
    cms_query,
)
from .clustering import (
    ClusteringConfig,
    ClusterState,
    cluster_stream,
    head_edge_step,
    tail_edge_step,
)
from .game import (
    GameConfig,
    GameState,
    best_response,
    cluster_cost,
    compute_delta,
    init_game,
    is_pure_nash,
    run_game,
    social_welfare,
)
from .graph_io import (
    DegreeTable,
    EdgeKind,
    EdgeStream,
    classify_edge,
    compute_degrees,
    degree_threshold,
    open_edge_stream,
)
from .metrics import (
    BoundInputs,
    DegreeResolvedRF,
    QualityReport,
    SkewnessReport,
    degree_resolved_rf,
    imbalance,
    poa_bound,
    rd_bound,
    replication_factor,
    rf_bound,
    skewness,
)
from .pipeline import RunConfig, RunResult, run_partition
from .postprocess import (
    PartitionResult,
    PostprocessConfig,
    assign_edges,
    choose_partition,
    replicas_from_assignment,
)
from .reference import (
    OracleResult,
    oracle_optimal_rf,
    oracle_optimal_welfare,
    partition_dbh,
)
from .synth import RmatConfig, gen_rmat

__version__ = "0.1.0"

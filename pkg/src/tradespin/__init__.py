"""Ising model of USD/CNY trade-currency preference on world trade networks."""
from .network import (
    CountryTable,
    MoneyMatrix,
    TradeNetwork,
    build_trade_network,
    scale_matrix,
    top_countries,
)
from .dynamics import (
    ANGLO_BRICS_ANCHORS,
    BASELINE_ANCHORS,
    AnchorSpec,
    CouplingWeights,
    LocalField,
    RelaxationResult,
    SpinConfig,
    apply_flip_rule,
    enumerate_fixed_points,
    interaction_energy,
    is_fixed_point,
    relax,
    sweep,
    trade_weights,
)
from .ensemble import (
    BistabilityScan,
    ExperimentConfig,
    GroupPartition,
    classify_groups,
    group_time_series,
    random_initial_config,
    run_scan,
)
from .centrality import CentralityVector, centrality_weights, google_matrix, power_iterate
from .clustering import ClusterPartition, directed_modularity, label_leaders, louvain
from .io import emit_scan, ingest_flows

__version__ = "0.1.0"

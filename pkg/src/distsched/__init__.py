"""Label-aware pod spreading: score placements by the variance of per-node label counts."""

from .distributedness import (
    DistributednessReport,
    LabelCountVector,
    VarianceConvention,
    cluster_report,
    count_vector,
    distributedness_factor,
    variance,
)
from .labeler import (
    LabelerConfig,
    UsageSeries,
    classify_magnitude,
    classify_pattern,
    derive_labels,
)
from .model import (
    ClusterState,
    Magnitude,
    ModelError,
    Node,
    Pattern,
    PodSpec,
    ResourceKind,
    ScopedLabel,
    ScopeLevel,
    UsageLabel,
    ValidationError,
    parse_label,
    scoped_label,
)
from .rebalancer import Move, RebalanceConfig, RebalancePlan, apply_plan, rebalance, total_distributedness
from .scheduler import NodeScore, PlacementDecision, apply, place, score_node

__version__ = "0.1.0"

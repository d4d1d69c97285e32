"""Deterministic wireless sensor network simulator for cluster-based routing
with duplicate suppression, compared against a simplified Direct Diffusion."""

from .dd import dd_route_event, dd_setup_gradients
from .energy import EnergyLedger, MessageClass, total_energy_consumed
from .engine import (
    BatchResult,
    Event,
    MetricsRecord,
    SimConfig,
    generate_workload,
    run_batch,
    run_trial,
    trial_seed,
)
from .errors import (
    DeadRelay,
    EmptyCensus,
    EmptyGradient,
    EmptyNeighborTable,
    InvalidConfig,
    OrphanSource,
    PlacementInfeasible,
    RepAtOrphan,
    RoutingLoop,
    SimulationError,
    UnknownNode,
)
from .messages import AdvMessage, DataMessage, InterestMessage, MessageKind, RepMessage
from .radio import MessageTally, Radio
from .routing import Delivery
from .rtbc import (
    ClusterAssignment,
    NeighborEntry,
    NodeState,
    Role,
    RotationHistory,
    aggregate_at_head,
    census,
    disseminate_interest,
    form_clusters,
    handle_rep,
    next_hop_to_sink,
    route_intra_cluster,
    route_to_sink,
    select_cluster_heads,
)
from .topology import (
    UNREACHABLE,
    Topology,
    TopologyConfig,
    generate_topology,
    hop_distance_oracle,
    neighbors,
)

__version__ = "0.1.0"

"""Round-based experiment driver.

A trial places the nodes, draws an event workload, and then alternates
between network (re)organization and event reporting. Organization happens
before the first event and again every ``recluster_period`` events.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import fmean

import numpy as np

from .dd import dd_setup_gradients, dd_route_event
from .energy import EnergyLedger, MessageClass
from .errors import EmptyCensus, InvalidConfig
from .messages import DataMessage
from .radio import MessageTally, Radio
from .rtbc import (
    ClusterAssignment,
    RotationHistory,
    aggregate_at_head,
    census,
    disseminate_interest,
    form_clusters,
    fresh_states,
    route_intra_cluster,
    route_to_sink,
    select_cluster_heads,
)
from .topology import Topology, TopologyConfig, generate_topology

PROTOCOLS = ("rtbc", "dd")


@dataclass(frozen=True)
class SimConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    protocol: str = "rtbc"
    ch_fraction: float = 0.05
    recluster_period: int = 100
    total_events: int = 300
    trials: int = 10
    master_seed: int = 0
    k_dup: int = 3
    initial_energy: float = 100.0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise InvalidConfig(f"protocol must be one of {PROTOCOLS}", "protocol")
        if not 0 < self.ch_fraction <= 1:
            raise InvalidConfig("ch_fraction must be in (0, 1]", "fraction")
        if self.recluster_period < 1:
            raise InvalidConfig("recluster_period must be >= 1", "recluster_period")
        if self.total_events < 0:
            raise InvalidConfig("total_events must be >= 0", "events")
        if self.trials < 1:
            raise InvalidConfig("trials must be >= 1", "trials")
        if self.k_dup < 0:
            raise InvalidConfig("k_dup must be >= 0", "k_dup")
        if self.initial_energy <= 0 or (self.initial_energy * 4) % 1:
            raise InvalidConfig("initial_energy must be a positive multiple of 0.25", "energy")


@dataclass(frozen=True)
class Event:
    index: int
    event_id: int
    reporters: tuple[int, ...]


EventWorkload = list[Event]


def codetectors(topology: Topology, node: int, k: int) -> list[int]:
    """The ``k`` sensors nearest to ``node`` within radio range (distance, then id)."""
    near = [n for n in topology.adjacency[node] if n != topology.sink]
    near.sort(key=lambda n: (topology.distance(node, n), n))
    return near[:k]


def generate_workload(config: SimConfig, topology: Topology, seed: int) -> EventWorkload:
    """One random reporter per event, plus up to ``k_dup`` nearby co-detectors."""
    rng = np.random.default_rng(seed)
    origins = rng.integers(0, topology.node_count, size=config.total_events)
    cache: dict[int, list[int]] = {}
    events = []
    for i, origin in enumerate(origins.tolist()):
        if origin not in cache:
            cache[origin] = codetectors(topology, origin, config.k_dup)
        events.append(Event(i, i, tuple(sorted([origin, *cache[origin]]))))
    return events


@dataclass
class MetricsRecord:
    protocol: str
    recluster_period: int
    event_count: int
    trial: int = 0
    trial_seed: int = 0
    interest_msgs: int = 0
    control_msgs: int = 0
    data_msgs: int = 0
    energy_total: float = 0.0
    duplicates_suppressed: int = 0
    reports_at_heads: int = 0
    delivered: int = 0
    undelivered: int = 0
    report_attempts: int = 0
    reorganizations: int = 0
    cluster_sizes: list[tuple[int, ...]] = field(default_factory=list)
    orphan_counts: list[int] = field(default_factory=list)
    per_node_residual: dict[int, float] = field(default_factory=dict)
    # Charged tx+rx events per price class, tallied apart from the ledger.
    data_events: int = 0
    interest_class_events: int = 0
    energy_truncated: float = 0.0
    dead_nodes: int = 0

    @property
    def label(self) -> str:
        return f"{self.protocol.upper()}({self.recluster_period})"

    @property
    def suppression_ratio(self) -> float:
        return self.duplicates_suppressed / self.reports_at_heads if self.reports_at_heads else 0.0

    @property
    def mean_cluster_size(self) -> float:
        sizes = [s for round_sizes in self.cluster_sizes for s in round_sizes]
        return fmean(sizes) if sizes else 0.0


SCALAR_FIELDS = (
    "interest_msgs",
    "control_msgs",
    "data_msgs",
    "energy_total",
    "duplicates_suppressed",
    "reports_at_heads",
    "delivered",
    "undelivered",
    "report_attempts",
    "dead_nodes",
)


class _Protocol:
    def __init__(self, config: SimConfig, radio: Radio, metrics: MetricsRecord, rng):
        self.config = config
        self.radio = radio
        self.metrics = metrics
        self.rng = rng

    def reorganize(self, round: int) -> None:
        raise NotImplementedError

    def report(self, event: Event) -> None:
        raise NotImplementedError


class _RtbcRun(_Protocol):
    def __init__(self, *args):
        super().__init__(*args)
        self.states = fresh_states(self.radio)
        self.history = RotationHistory()
        self.assignment = ClusterAssignment({}, frozenset(), frozenset())

    def reorganize(self, round):
        radio = self.radio
        answered = census(radio)
        try:
            heads = select_cluster_heads(
                answered, self.config.ch_fraction, round, self.history, self.rng
            )
        except EmptyCensus:
            heads = []
        heads = [h for h in heads if radio.is_alive(h)]
        if heads:
            self.assignment = form_clusters(radio, heads, self.states)
        else:
            for st in self.states.values():
                st.make_orphan()
            live = frozenset(radio.ledger.alive_nodes())
            self.assignment = ClusterAssignment({}, frozenset(), live)
        self.metrics.cluster_sizes.append(tuple(self.assignment.cluster_sizes().values()))
        self.metrics.orphan_counts.append(len(self.assignment.orphans))
        disseminate_interest(radio, self.states)

    def report(self, event):
        m, radio, assignment = self.metrics, self.radio, self.assignment
        by_head: dict[int, list[DataMessage]] = defaultdict(list)
        for r in event.reporters:
            m.report_attempts += 1
            if not radio.is_alive(r):
                m.undelivered += 1
                continue
            msg = DataMessage(event.event_id, r)
            if route_intra_cluster(assignment, r, msg, radio).delivered:
                by_head[assignment.head_of(r)].append(msg)
            else:
                m.undelivered += 1
        for head in sorted(by_head):
            reports = by_head[head]
            m.reports_at_heads += len(reports)
            for out in aggregate_at_head(head, reports):
                m.duplicates_suppressed += out.suppressed_count
                if route_to_sink(head, out, self.states, radio).delivered:
                    m.delivered += out.reports
                else:
                    m.undelivered += out.reports


class _DdRun(_Protocol):
    def __init__(self, *args):
        super().__init__(*args)
        self.gradients = {}

    def reorganize(self, round):
        self.gradients = dd_setup_gradients(self.radio)

    def report(self, event):
        m, radio = self.metrics, self.radio
        for r in event.reporters:
            m.report_attempts += 1
            if not radio.is_alive(r):
                m.undelivered += 1
                continue
            msg = DataMessage(event.event_id, r)
            if dd_route_event(r, msg, self.gradients, radio).delivered:
                m.delivered += 1
            else:
                m.undelivered += 1


def trial_streams(trial_seed: int) -> tuple[int, int, int]:
    """Independent seeds for placement, workload, and head election."""
    a, b, c = np.random.SeedSequence(trial_seed).generate_state(3).tolist()
    return a, b, c


def run_trial(
    config: SimConfig, trial_seed: int, topology: Topology | None = None, trial: int = 0
) -> MetricsRecord:
    """Run one trial. The result depends only on (config, trial_seed, topology).

    Placement and workload draw from streams that ignore the protocol, so RTBC
    and DD runs with the same seed see the same network and the same events.
    """
    topo_seed, work_seed, elect_seed = trial_streams(trial_seed)
    if topology is None:
        topology = generate_topology(config.topology, topo_seed)
    workload = generate_workload(config, topology, work_seed)

    ledger = EnergyLedger(topology.sensors, config.initial_energy)
    tally = MessageTally()
    radio = Radio(topology, ledger, tally)
    metrics = MetricsRecord(config.protocol, config.recluster_period, config.total_events,
                            trial, trial_seed)
    runner_cls = _RtbcRun if config.protocol == "rtbc" else _DdRun
    runner = runner_cls(config, radio, metrics, np.random.default_rng(elect_seed))

    rounds = 0
    for event in workload:
        if event.index % config.recluster_period == 0:
            runner.reorganize(rounds)
            rounds += 1
        runner.report(event)
    if rounds == 0:
        runner.reorganize(rounds)
        rounds = 1

    metrics.reorganizations = rounds
    metrics.interest_msgs = tally.interest_msgs
    metrics.control_msgs = tally.control_msgs
    metrics.data_msgs = tally.data_msgs
    metrics.energy_total = ledger.total_energy_consumed()
    metrics.data_events = tally.class_events(MessageClass.DATA)
    metrics.interest_class_events = tally.class_events(MessageClass.INTEREST)
    metrics.energy_truncated = ledger.truncated
    metrics.per_node_residual = ledger.snapshot()
    metrics.dead_nodes = sum(1 for v in metrics.per_node_residual.values() if v == 0)
    return metrics


def trial_seed(master_seed: int, index: int) -> int:
    """First 63 bits of sha256("<master_seed>:<index>"), big-endian."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class BatchResult:
    config: SimConfig
    records: list[MetricsRecord]

    @property
    def means(self) -> dict[str, float]:
        return {name: fmean(getattr(r, name) for r in self.records) for name in SCALAR_FIELDS}


def _run_indexed(args):
    config, i, topology = args
    return run_trial(config, trial_seed(config.master_seed, i), topology, trial=i)


def run_batch(config: SimConfig, topology: Topology | None = None, jobs: int = 1) -> BatchResult:
    """Run ``config.trials`` trials; trial ``i`` uses ``trial_seed(master_seed, i)``."""
    work = [(config, i, topology) for i in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_indexed, work))
    else:
        records = [_run_indexed(w) for w in work]
    return BatchResult(config, records)


def with_protocol(config: SimConfig, protocol: str, **changes) -> SimConfig:
    return replace(config, protocol=protocol, **changes)

"""Cluster-based routing: census, head rotation, ADV/REP formation, in-cluster
tree routing, duplicate aggregation at heads, and interest-guided relaying to
the sink.

All floods advance in synchronous ticks. Within a tick, senders transmit in
ascending id order, which makes "first to arrive" a deterministic choice.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyCensus, EmptyNeighborTable, OrphanSource, RepAtOrphan
from .messages import AdvMessage, DataMessage, InterestMessage, MessageKind, RepMessage
from .radio import Radio
from .routing import Delivery, forward


class Role(enum.Enum):
    MEMBER = "member"
    CLUSTER_HEAD = "cluster_head"
    ORPHAN = "orphan"


@dataclass(frozen=True)
class NeighborEntry:
    hop_to_sink: int
    energy: float


@dataclass
class NodeState:
    node_id: int
    role: Role = Role.ORPHAN
    my_ch_id: int | None = None
    dn_id: int | None = None
    hop_cnt: int | None = None
    neighbor_table: dict[int, NeighborEntry] = field(default_factory=dict)
    ch_service_history: int = 0
    # Members a head has heard about through REP relays this formation.
    known_members: int = 0

    def make_orphan(self) -> None:
        self.role = Role.ORPHAN
        self.my_ch_id = self.dn_id = self.hop_cnt = None
        self.known_members = 0

    def make_head(self) -> None:
        self.role = Role.CLUSTER_HEAD
        self.my_ch_id = self.node_id
        self.dn_id = None
        self.hop_cnt = 0
        self.known_members = 0

    def join(self, ch_id: int, dn_id: int, hop_cnt: int) -> None:
        self.role = Role.MEMBER
        self.my_ch_id, self.dn_id, self.hop_cnt = ch_id, dn_id, hop_cnt


def fresh_states(radio: Radio) -> dict[int, NodeState]:
    return {n: NodeState(n) for n in radio.topology.sensors}


@dataclass(frozen=True)
class Membership:
    my_ch_id: int
    dn_id: int
    hop_cnt: int


@dataclass
class ClusterAssignment:
    membership: dict[int, Membership]
    heads: frozenset[int]
    orphans: frozenset[int]

    def head_of(self, node: int) -> int | None:
        if node in self.heads:
            return node
        m = self.membership.get(node)
        return None if m is None else m.my_ch_id

    def hop_of(self, node: int) -> int | None:
        if node in self.heads:
            return 0
        m = self.membership.get(node)
        return None if m is None else m.hop_cnt

    def cluster_sizes(self) -> dict[int, int]:
        """Member count (head excluded) of every cluster, keyed by head id."""
        sizes = {h: 0 for h in sorted(self.heads)}
        for m in self.membership.values():
            sizes[m.my_ch_id] += 1
        return sizes

    def to_text(self) -> str:
        lines = []
        for n in sorted(self.heads | set(self.membership) | self.orphans):
            if n in self.heads:
                lines.append(f"{n} {n} - 0")
            elif n in self.membership:
                m = self.membership[n]
                lines.append(f"{n} {m.my_ch_id} {m.dn_id} {m.hop_cnt}")
            else:
                lines.append(f"{n} - - -")
        return "\n".join(lines) + "\n"


@dataclass
class RotationHistory:
    """Which nodes have served as head in the current rotation epoch."""

    served: set[int] = field(default_factory=set)
    service_counts: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    epoch: int = 0
    rounds: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)


def sink_flood(radio: Radio, kind: MessageKind, on_hear=None):
    """Flood ``kind`` outward from the sink, each node rebroadcasting once.

    ``on_hear(receiver, message)`` sees every copy a live node receives, not only
    the first. Returns (hop_to_sink, parent) for every node that relayed.
    """
    sink = radio.sink
    hop = {sink: 0}
    parent: dict[int, int] = {}
    frontier = [sink]
    while frontier:
        first_heard: dict[int, int] = {}
        for s in frontier:
            energy = math.inf if s == sink else radio.ledger.residual(s)
            msg = InterestMessage(sink, hop[s], s, energy)
            for r in radio.broadcast(s, kind):
                if on_hear is not None:
                    on_hear(r, msg)
                if r not in hop and r not in first_heard:
                    first_heard[r] = s
        frontier = []
        for r in sorted(first_heard):
            # a node drained by the reception itself cannot relay
            if radio.is_alive(r):
                s = first_heard[r]
                hop[r] = hop[s] + 1
                parent[r] = s
                frontier.append(r)
    return hop, parent


def census(radio: Radio) -> dict[int, int]:
    """Query flood plus convergecast of (id, hop) replies back to the sink.

    Every node transmits exactly one reply, carrying its own entry and whatever
    its children handed up. Returns hop_to_sink for each node the sink heard of.
    """
    hop, parent = sink_flood(radio, MessageKind.QUERY)
    collected: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for n in sorted(parent, key=lambda n: (-hop[n], n)):
        payload = [(n, hop[n])] + collected.pop(n, [])
        if radio.unicast(n, parent[n], MessageKind.QUERY_REPLY):
            collected[parent[n]].extend(payload)
    return dict(sorted(collected[radio.sink]))


def head_quota(fraction: float, population: int) -> int:
    # Fraction(str(...)) keeps 0.05 * 300 at exactly 15.
    return math.ceil(Fraction(str(fraction)) * population)


def select_cluster_heads(
    census: dict[int, int],
    fraction: float,
    round: int,
    history: RotationHistory,
    rng: np.random.Generator,
) -> list[int]:
    """Draw ceil(fraction * |census|) heads among nodes not yet used this epoch.

    When too few unused nodes remain, a new epoch starts and everyone in the
    census is eligible again. ``history`` is updated in place.
    """
    if not census:
        raise EmptyCensus("no live node answered the census")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    live = sorted(census)
    k = head_quota(fraction, len(live))
    eligible = [n for n in live if n not in history.served]
    if len(eligible) < k:
        history.served.clear()
        history.epoch += 1
        eligible = live
    picks = rng.choice(len(eligible), size=k, replace=False)
    heads = sorted(eligible[i] for i in picks)
    history.served.update(heads)
    for h in heads:
        history.service_counts[h] += 1
    history.rounds.append((round, tuple(heads)))
    return heads


def handle_rep(node: NodeState, rep: RepMessage) -> RepMessage | None:
    """Process a REP at ``node``; return the REP to pass upward, if any."""
    if node.role is Role.ORPHAN:
        raise RepAtOrphan(f"REP for {rep.rn_id} reached orphan {node.node_id}")
    if node.hop_cnt == 0:
        node.known_members += 1
        return None
    return RepMessage(node.dn_id, node.hop_cnt)


def _relay_rep(radio: Radio, states: dict[int, NodeState], member: int) -> None:
    st = states[member]
    sender, rep = member, RepMessage(st.dn_id, st.hop_cnt)
    while rep is not None:
        receiver = rep.rn_id
        if not radio.unicast(sender, receiver, MessageKind.REP):
            return
        sender, rep = receiver, handle_rep(states[receiver], rep)


def form_clusters(
    radio: Radio, heads, states: dict[int, NodeState] | None = None
) -> ClusterAssignment:
    """Grow clusters by ADV flooding from every head at once.

    A node joins the first ADV it accepts (earliest tick, then lowest sender id)
    and ignores every later one. Each join sends a REP that is relayed up the
    parent chain to the head.
    """
    if states is None:
        states = fresh_states(radio)
    heads = sorted(set(heads))
    if not heads:
        raise ValueError("form_clusters needs at least one head")
    for h in heads:
        if not radio.is_alive(h) or h == radio.sink:
            raise ValueError(f"head {h} is not a live sensor")
    for st in states.values():
        st.make_orphan()
    for h in heads:
        states[h].make_head()
        states[h].ch_service_history += 1

    membership: dict[int, Membership] = {}
    frontier = heads
    while frontier:
        offers: dict[int, AdvMessage] = {}
        for s in frontier:
            st = states[s]
            adv = AdvMessage(st.my_ch_id, s, st.hop_cnt)
            for r in radio.broadcast(s, MessageKind.ADV):
                if states[r].role is Role.ORPHAN and r not in offers:
                    offers[r] = adv
        joined = []
        for r in sorted(offers):
            if not radio.is_alive(r):
                continue
            adv = offers[r]
            states[r].join(adv.ch_id, adv.sn_id, adv.hop_cnt + 1)
            membership[r] = Membership(adv.ch_id, adv.sn_id, adv.hop_cnt + 1)
            joined.append(r)
        for r in joined:
            _relay_rep(radio, states, r)
        frontier = joined

    orphans = frozenset(
        n for n in radio.topology.sensors
        if radio.is_alive(n) and n not in membership and n not in heads
    )
    return ClusterAssignment(membership, frozenset(heads), orphans)


def route_intra_cluster(
    assignment: ClusterAssignment, source: int, data: DataMessage, radio: Radio
) -> Delivery:
    """Carry a report up the parent chain to its head; no route discovery."""
    if source in assignment.heads:
        return Delivery(True, [source])
    if source not in assignment.membership:
        return Delivery(False, [source], OrphanSource)
    head = assignment.membership[source].my_ch_id
    return forward(
        radio, source, lambda n: n == head, lambda n: assignment.membership[n].dn_id
    )


def aggregate_at_head(head: int, reports: list[DataMessage]) -> list[DataMessage]:
    """Collapse reports of the same event into one aggregate per event."""
    groups: dict[int, list[DataMessage]] = {}
    for r in reports:
        groups.setdefault(r.event_id, []).append(r)
    out = []
    for event_id, group in groups.items():
        if len(group) == 1:
            out.append(group[0])
        else:
            folded = sum(m.reports for m in group)
            out.append(DataMessage(event_id, head, True, folded - 1))
    return out


def disseminate_interest(radio: Radio, states: dict[int, NodeState]) -> dict[int, int]:
    """Sink interest flood; rebuilds every node's neighbor table from scratch.

    Returns the hop-to-sink of every node that relayed the interest.
    """
    for st in states.values():
        st.neighbor_table = {}

    def hear(receiver, msg):
        states[receiver].neighbor_table[msg.sender_id] = NeighborEntry(
            msg.hop_from_sink, msg.sender_energy
        )

    hop, _ = sink_flood(radio, MessageKind.INTEREST, hear)
    return hop


def next_hop_to_sink(node: NodeState) -> int:
    """Fewest hops to the sink, then most energy, then lowest id."""
    if not node.neighbor_table:
        raise EmptyNeighborTable(f"node {node.node_id} has no route toward the sink")
    best, _ = min(
        node.neighbor_table.items(),
        key=lambda kv: (kv[1].hop_to_sink, -kv[1].energy, kv[0]),
    )
    return best


def route_to_sink(
    head: int, data: DataMessage, states: dict[int, NodeState], radio: Radio
) -> Delivery:
    sink = radio.sink
    return forward(
        radio, head, lambda n: n == sink, lambda n: next_hop_to_sink(states[n])
    )

"""Lossless one-hop delivery with energy charging and message tallies."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .energy import EnergyLedger, MessageClass
from .messages import CONTROL_KINDS, MessageKind
from .topology import Topology


@dataclass
class MessageTally:
    """Counts transmissions and receptions independently of the ledger.

    ``tx``/``rx`` hold sensor events (the ones that cost energy); the sink's own
    transmissions are kept apart in ``sink_tx``.
    """

    tx: Counter = field(default_factory=Counter)
    rx: Counter = field(default_factory=Counter)
    sink_tx: Counter = field(default_factory=Counter)

    def sent(self, kind: MessageKind) -> int:
        return self.tx[kind] + self.sink_tx[kind]

    @property
    def interest_msgs(self) -> int:
        return self.sent(MessageKind.INTEREST)

    @property
    def control_msgs(self) -> int:
        return sum(self.sent(k) for k in CONTROL_KINDS)

    @property
    def data_msgs(self) -> int:
        return self.sent(MessageKind.DATA)

    def class_events(self, cls: MessageClass) -> int:
        """Charged tx + rx events of every kind priced at ``cls``."""
        return sum(
            self.tx[k] + self.rx[k] for k in MessageKind if k.message_class is cls
        )

    def weighted_energy(self, ledger: EnergyLedger) -> float:
        """Energy implied by the tallied events at the ledger's unit rates."""
        total = 0.0
        for k in MessageKind:
            cls = k.message_class
            total += self.tx[k] * ledger.tx_cost(cls) + self.rx[k] * ledger.rx_cost(cls)
        return total


class Radio:
    """Delivers messages over the topology, charging the ledger as it goes.

    Dead nodes neither send nor receive. The sink has unlimited energy and never
    processes a sensor broadcast.
    """

    def __init__(self, topology: Topology, ledger: EnergyLedger, tally: MessageTally | None = None):
        self.topology = topology
        self.ledger = ledger
        self.tally = tally if tally is not None else MessageTally()

    @property
    def sink(self) -> int:
        return self.topology.sink

    def is_alive(self, node: int) -> bool:
        return node == self.sink or self.ledger.is_alive(node)

    def _send(self, sender: int, kind: MessageKind) -> bool:
        if sender == self.sink:
            self.tally.sink_tx[kind] += 1
            return True
        if not self.ledger.is_alive(sender):
            return False
        self.ledger.charge_tx(sender, kind.message_class)
        self.tally.tx[kind] += 1
        return True

    def _receive(self, node: int, kind: MessageKind) -> bool:
        if node == self.sink:
            return True
        if not self.ledger.is_alive(node):
            return False
        self.ledger.charge_rx(node, kind.message_class)
        self.tally.rx[kind] += 1
        return True

    def broadcast(self, sender: int, kind: MessageKind) -> list[int]:
        """Send to every neighbor; return the sensors that heard it, in id order."""
        if not self._send(sender, kind):
            return []
        heard = []
        for n in sorted(self.topology.adjacency[sender]):
            if n != self.sink and self._receive(n, kind):
                heard.append(n)
        return heard

    def unicast(self, sender: int, receiver: int, kind: MessageKind) -> bool:
        """Send to one neighbor; True if the receiver was alive to take it."""
        if receiver not in self.topology.adjacency[sender]:
            raise ValueError(f"{receiver} is not a neighbor of {sender}")
        if not self._send(sender, kind):
            return False
        return self._receive(receiver, kind)

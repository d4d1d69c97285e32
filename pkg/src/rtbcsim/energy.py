"""Per-node energy accounting with flat per-message costs.

Amounts are stored as integer quarter-units so every sum is exact.
"""

from __future__ import annotations

import enum
from typing import Iterable

from .errors import UnknownNode

QUARTERS = 4


class MessageClass(enum.Enum):
    DATA = "data"
    INTEREST = "interest"


DEFAULT_INITIAL_ENERGY = 100.0
DEFAULT_TX_COST = {MessageClass.DATA: 1.0, MessageClass.INTEREST: 0.25}
DEFAULT_RX_COST = {MessageClass.DATA: 1.0, MessageClass.INTEREST: 0.25}


def to_quarters(amount: float) -> int:
    q = amount * QUARTERS
    if q != int(q) or q < 0:
        raise ValueError(f"energy amount {amount!r} is not a non-negative multiple of 0.25")
    return int(q)


class EnergyLedger:
    """Residual energy of every sensor. The sink is never tracked."""

    def __init__(
        self,
        nodes: Iterable[int],
        initial_energy: float = DEFAULT_INITIAL_ENERGY,
        tx_cost: dict[MessageClass, float] | None = None,
        rx_cost: dict[MessageClass, float] | None = None,
    ):
        self._initial_q = to_quarters(initial_energy)
        self._tx_q = {c: to_quarters(v) for c, v in (tx_cost or DEFAULT_TX_COST).items()}
        self._rx_q = {c: to_quarters(v) for c, v in (rx_cost or DEFAULT_RX_COST).items()}
        self._residual_q = {int(n): self._initial_q for n in nodes}
        self._consumed_q = 0
        # Portion of a charge that could not be taken because the node ran dry.
        self._truncated_q = 0

    @property
    def initial_energy(self) -> float:
        return self._initial_q / QUARTERS

    def tx_cost(self, cls: MessageClass) -> float:
        return self._tx_q[cls] / QUARTERS

    def rx_cost(self, cls: MessageClass) -> float:
        return self._rx_q[cls] / QUARTERS

    def __contains__(self, node) -> bool:
        return node in self._residual_q

    def nodes(self) -> list[int]:
        return sorted(self._residual_q)

    def residual(self, node: int) -> float:
        return self._residual_q_of(node) / QUARTERS

    def _residual_q_of(self, node: int) -> int:
        try:
            return self._residual_q[node]
        except KeyError:
            raise UnknownNode(node) from None

    def is_alive(self, node: int) -> bool:
        return self._residual_q_of(node) > 0

    def alive_nodes(self) -> list[int]:
        return [n for n, q in sorted(self._residual_q.items()) if q > 0]

    def _charge(self, node: int, cost_q: int) -> bool:
        left = self._residual_q_of(node)
        if left == 0:
            return False
        taken = min(left, cost_q)
        self._residual_q[node] = left - taken
        self._consumed_q += taken
        self._truncated_q += cost_q - taken
        return left - taken > 0

    def charge_tx(self, node: int, cls: MessageClass) -> bool:
        """Charge one transmission; return whether the node is still alive.

        A node already at zero is left untouched and reported dead.
        """
        return self._charge(node, self._tx_q[cls])

    def charge_rx(self, node: int, cls: MessageClass) -> bool:
        return self._charge(node, self._rx_q[cls])

    def total_energy_consumed(self) -> float:
        return self._consumed_q / QUARTERS

    @property
    def truncated(self) -> float:
        """Energy owed by charges that hit the zero floor but was never taken."""
        return self._truncated_q / QUARTERS

    def snapshot(self) -> dict[int, float]:
        return {n: q / QUARTERS for n, q in sorted(self._residual_q.items())}


def total_energy_consumed(ledger: EnergyLedger) -> float:
    return ledger.total_energy_consumed()

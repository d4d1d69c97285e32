"""Hop-by-hop forwarding shared by both protocols."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import DeadRelay, RoutingLoop, SimulationError
from .messages import MessageKind
from .radio import Radio


@dataclass
class Delivery:
    delivered: bool
    path: list[int] = field(default_factory=list)
    failure: type[Exception] | None = None

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def forward(radio: Radio, start: int, goal: Callable[[int], bool], choose: Callable[[int], int]) -> Delivery:
    """Carry one data message from ``start`` until ``goal`` holds.

    ``choose(node)`` names the next hop and may raise to signal that the node has
    nowhere to send; the exception type becomes the delivery's failure.
    """
    path = [start]
    visited = {start}
    node = start
    while not goal(node):
        if not radio.is_alive(node):
            return Delivery(False, path, DeadRelay)
        try:
            nxt = choose(node)
        except SimulationError as exc:
            return Delivery(False, path, type(exc))
        if nxt in visited:
            return Delivery(False, path, RoutingLoop)
        ok = radio.unicast(node, nxt, MessageKind.DATA)
        path.append(nxt)
        visited.add(nxt)
        if not ok:
            return Delivery(False, path, DeadRelay)
        node = nxt
    return Delivery(True, path)

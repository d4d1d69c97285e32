"""Simplified Direct Diffusion baseline.

One interest flood sets up hop gradients toward the sink; each report then
follows the steepest gradient on its own. Nothing is aggregated.
"""

from __future__ import annotations

from .errors import EmptyGradient
from .messages import DataMessage, MessageKind
from .radio import Radio
from .routing import Delivery, forward
from .rtbc import sink_flood

GradientTable = dict[int, int]


def dd_setup_gradients(radio: Radio) -> dict[int, GradientTable]:
    """Flood an interest from the sink; record each neighbor's hop-to-sink."""
    gradients: dict[int, GradientTable] = {n: {} for n in radio.topology.sensors}

    def hear(receiver, msg):
        gradients[receiver][msg.sender_id] = msg.hop_from_sink

    sink_flood(radio, MessageKind.INTEREST, hear)
    return gradients


def _downhill(gradients: dict[int, GradientTable], node: int) -> int:
    table = gradients.get(node)
    if not table:
        raise EmptyGradient(f"node {node} has no gradient toward the sink")
    return min(table.items(), key=lambda kv: (kv[1], kv[0]))[0]


def dd_route_event(
    source: int, data: DataMessage, gradients: dict[int, GradientTable], radio: Radio
) -> Delivery:
    sink = radio.sink
    return forward(radio, source, lambda n: n == sink, lambda n: _downhill(gradients, n))

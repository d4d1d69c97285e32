"""Wire records exchanged by the protocols."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .energy import MessageClass


class MessageKind(enum.Enum):
    QUERY = "query"
    QUERY_REPLY = "query_reply"
    ADV = "adv"
    REP = "rep"
    INTEREST = "interest"
    DATA = "data"

    @property
    def message_class(self) -> MessageClass:
        # Control records are priced like interests; only event data pays the data rate.
        return MessageClass.DATA if self is MessageKind.DATA else MessageClass.INTEREST


CONTROL_KINDS = (MessageKind.QUERY, MessageKind.QUERY_REPLY, MessageKind.ADV, MessageKind.REP)


@dataclass(frozen=True)
class AdvMessage:
    ch_id: int
    sn_id: int
    hop_cnt: int

    def __post_init__(self):
        if (self.hop_cnt == 0) != (self.sn_id == self.ch_id):
            raise ValueError("ADV hop_cnt is 0 exactly when the sender is the head")


@dataclass(frozen=True)
class RepMessage:
    rn_id: int
    hop_cnt: int

    def __post_init__(self):
        if self.hop_cnt < 1:
            raise ValueError("REP is only sent by members (hop_cnt >= 1)")


@dataclass(frozen=True)
class InterestMessage:
    origin: int
    hop_from_sink: int
    sender_id: int
    sender_energy: float = math.inf


@dataclass(frozen=True)
class DataMessage:
    event_id: int
    source_id: int
    is_aggregate: bool = False
    suppressed_count: int = 0

    def __post_init__(self):
        if not self.is_aggregate and self.suppressed_count:
            raise ValueError("only aggregates carry a suppressed_count")
        if self.suppressed_count < 0:
            raise ValueError("suppressed_count must be non-negative")

    @property
    def reports(self) -> int:
        """Number of original reports this message stands for."""
        return 1 + self.suppressed_count

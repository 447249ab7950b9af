"""Lossy transport simulation.

Samples travel in packets of ``packet_length`` consecutive samples; a lost
packet removes its whole block (atomic loss).  The link is noiseless and
order-preserving, so an outcome is fully described by which 1-based sequence
numbers survived.  Two loss models:

* ExactCount(received_count): keep exactly received_count/packet_length
  packets, chosen uniformly without replacement.
* PerPacketProb(drop_probability): drop each packet independently; with
  packet_length 1 this is i.i.d. per-sample loss.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .projections import SelectionMatrix, build_selection_matrix


@dataclass(frozen=True)
class ExactCount:
    """Keep exactly ``received_count`` samples (a whole number of packets)."""

    received_count: int


@dataclass(frozen=True)
class PerPacketProb:
    """Drop each packet independently with probability ``drop_probability``."""

    drop_probability: float


LossModel = Union[ExactCount, PerPacketProb]


@dataclass(frozen=True)
class ChannelOutcome:
    """Result of one transmission: which sequence numbers arrived, and their
    values when known (records parsed from the wire format carry None).
    """

    sent_count: int
    packet_length: int
    seed: int
    received_seq: np.ndarray
    received_values: Optional[np.ndarray] = None

    def __post_init__(self):
        seq = np.array(self.received_seq, dtype=np.int64, copy=True)
        if seq.ndim != 1:
            raise ValueError("received_seq must be 1-D")
        if seq.size and (seq[0] < 1 or seq[-1] > self.sent_count):
            raise ValueError(f"sequence numbers must lie in [1, {self.sent_count}]")
        if seq.size and np.any(np.diff(seq) <= 0):
            raise ValueError("received_seq must be strictly increasing")
        seq.setflags(write=False)
        object.__setattr__(self, "received_seq", seq)
        if self.received_values is not None:
            vals = np.array(self.received_values, dtype=np.float64, copy=True)
            if vals.shape != seq.shape:
                raise ValueError("received_values length must match received_seq")
            vals.setflags(write=False)
            object.__setattr__(self, "received_values", vals)

    @property
    def received_count(self) -> int:
        return self.received_seq.size


def transmit(
    sent: np.ndarray,
    loss: LossModel,
    packet_length: int = 1,
    seed: int = 0,
) -> ChannelOutcome:
    """Simulate one lossy transmission of the sent-sample vector.

    Parameters
    ----------
    sent : ndarray
        Sent samples; length must be a positive multiple of packet_length.
    loss : ExactCount or PerPacketProb
        Loss model.  ExactCount.received_count must be a multiple of
        packet_length, between 0 and len(sent).
    packet_length : int
        Samples per packet (atomic loss unit), >= 1.
    seed : int
        Same seed, same loss pattern.
    """
    sent = np.asarray(sent, dtype=np.float64)
    if sent.ndim != 1 or sent.size == 0:
        raise ValueError("sent must be a non-empty 1-D vector")
    if packet_length < 1:
        raise ValueError("packet_length must be >= 1")
    if sent.size % packet_length != 0:
        raise ValueError(
            f"packet_length {packet_length} does not divide sent count {sent.size}"
        )
    n_packets = sent.size // packet_length
    rng = np.random.default_rng(seed)

    if isinstance(loss, ExactCount):
        m = loss.received_count
        if m % packet_length != 0:
            raise ValueError(
                f"received_count {m} is not a multiple of packet_length {packet_length}"
            )
        if not 0 <= m <= sent.size:
            raise ValueError(f"received_count must lie in [0, {sent.size}]")
        kept = np.sort(rng.choice(n_packets, size=m // packet_length, replace=False))
    elif isinstance(loss, PerPacketProb):
        p = loss.drop_probability
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"drop_probability must lie in [0, 1], got {p}")
        kept = np.flatnonzero(rng.random(n_packets) >= p)
    else:
        raise TypeError(f"unknown loss model {loss!r}")

    # expand kept packets to 1-based sample sequence numbers
    offsets = np.arange(1, packet_length + 1, dtype=np.int64)
    seq = (kept[:, None] * packet_length + offsets[None, :]).ravel()
    return ChannelOutcome(
        sent_count=sent.size,
        packet_length=packet_length,
        seed=seed,
        received_seq=seq,
        received_values=sent[seq - 1],
    )


def outcome_to_selection(outcome: ChannelOutcome) -> SelectionMatrix:
    """Selection matrix replaying the outcome's loss pattern."""
    return build_selection_matrix(outcome.received_seq, outcome.sent_count)


def serialize_outcome(outcome: ChannelOutcome) -> str:
    """Wire record ``sent_count M L seed : i1 i2 ... iM`` (1-based indices)."""
    idx = " ".join(str(int(i)) for i in outcome.received_seq)
    head = (
        f"{outcome.sent_count} {outcome.received_count} "
        f"{outcome.packet_length} {outcome.seed}"
    )
    return f"{head} : {idx}".rstrip()


def parse_outcome(record: str) -> ChannelOutcome:
    """Inverse of serialize_outcome; parsed outcomes carry no sample values."""
    head, _, tail = record.partition(":")
    fields = head.split()
    if len(fields) != 4:
        raise ValueError(f"malformed record head: expected 4 fields, got {len(fields)}")
    sent_count, m, packet_length, seed = (int(f) for f in fields)
    seq = np.asarray([int(tok) for tok in tail.split()], dtype=np.int64)
    if seq.size != m:
        raise ValueError(f"record announces {m} indices but carries {seq.size}")
    return ChannelOutcome(
        sent_count=sent_count,
        packet_length=packet_length,
        seed=seed,
        received_seq=seq,
        received_values=None,
    )

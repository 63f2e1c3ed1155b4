"""Entanglement and message buffers with FIFO/FILO consumption and overflow policies."""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .qcore import QubitPairState, make_bell_pair

__all__ = [
    "Overflow",
    "Consume",
    "StoreResult",
    "EprRecord",
    "Message",
    "EntanglementBuffer",
    "MessageBuffer",
    "ebuf_store",
    "ebuf_take",
    "mbuf_offer",
    "mbuf_pop",
]


class Overflow(str, enum.Enum):
    DROP_NEW = "drop_new"
    REPLACE_OLDEST = "replace_oldest"


class Consume(str, enum.Enum):
    FIFO = "fifo"
    FILO = "filo"


class StoreResult(enum.Enum):
    STORED = "stored"
    DROPPED_NEW = "dropped_new"
    REPLACED_OLDEST = "replaced_oldest"


# A fresh Bell pair is immutable in practice; records share it until noise is applied.
_FRESH = make_bell_pair()
_FRESH.matrix.setflags(write=False)


class EprRecord:
    """A stored pair. Noise is applied lazily, so ``state`` is only current as of
    ``last_update_time``."""

    __slots__ = ("id", "birth_time", "state", "last_update_time")

    def __init__(self, id: int, birth_time: float, state: QubitPairState = _FRESH,
                 last_update_time: Optional[float] = None):
        self.id = id
        self.birth_time = birth_time
        self.state = state
        self.last_update_time = birth_time if last_update_time is None else last_update_time

    def __repr__(self):
        return (f"EprRecord(id={self.id}, birth_time={self.birth_time}, "
                f"last_update_time={self.last_update_time})")

    @property
    def fresh(self) -> bool:
        """True while the state is still the untouched Bell pair."""
        return self.state is _FRESH


@dataclass
class EntanglementBuffer:
    """Sender-side quantum memory with ``capacity`` pair slots, in insertion order."""

    capacity: int
    overflow: Overflow = Overflow.DROP_NEW
    consume: Consume = Consume.FILO
    slots: deque = field(default_factory=deque)
    last_evicted: Optional[EprRecord] = field(default=None, repr=False)

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {self.capacity}")
        self.overflow = Overflow(self.overflow)
        self.consume = Consume(self.consume)

    def __len__(self) -> int:
        return len(self.slots)

    def ids(self) -> list[int]:
        return [r.id for r in self.slots]

    def store(self, record: EprRecord) -> StoreResult:
        slots = self.slots
        if len(slots) < self.capacity:
            slots.append(record)
            return StoreResult.STORED
        if self.capacity == 0 or self.overflow is Overflow.DROP_NEW:
            return StoreResult.DROPPED_NEW
        # insertion order == birth order, so the head is the oldest pair
        self.last_evicted = slots.popleft()
        slots.append(record)
        return StoreResult.REPLACED_OLDEST

    def take(self) -> Optional[EprRecord]:
        if not self.slots:
            return None
        if self.consume is Consume.FIFO:
            return self.slots.popleft()
        return self.slots.pop()


@dataclass(frozen=True, slots=True)
class Message:
    """A J-bit job; ``seq`` is simulation bookkeeping and never transmitted."""

    seq: int
    bits: tuple

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class MessageBuffer:
    """Classical job queue holding at most ``capacity_bits // job_size_bits`` messages."""

    capacity_bits: int
    job_size_bits: int
    queue: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.job_size_bits <= 0:
            raise ValueError("job size must be positive")
        if self.capacity_bits < 0:
            raise ValueError("capacity must be non-negative")

    def __len__(self) -> int:
        return len(self.queue)

    @property
    def max_messages(self) -> int:
        return self.capacity_bits // self.job_size_bits

    def offer(self, message: Sequence[int]) -> bool:
        if len(message) != self.job_size_bits:
            raise ValueError(
                f"message has {len(message)} bits, buffer expects {self.job_size_bits}"
            )
        if (len(self.queue) + 1) * self.job_size_bits > self.capacity_bits:
            return False
        self.queue.append(message)
        return True

    def peek(self):
        return self.queue[0] if self.queue else None

    def pop(self):
        return self.queue.popleft() if self.queue else None


def ebuf_store(buffer: EntanglementBuffer, record: EprRecord):
    """Store ``record``; returns a :class:`StoreResult`, plus the evicted id on replacement."""
    result = buffer.store(record)
    if result is StoreResult.REPLACED_OLDEST:
        return result, buffer.last_evicted.id
    return result, None


def ebuf_take(buffer: EntanglementBuffer) -> Optional[EprRecord]:
    return buffer.take()


def mbuf_offer(buffer: MessageBuffer, message: Sequence[int]) -> bool:
    return buffer.offer(message)


def mbuf_pop(buffer: MessageBuffer):
    return buffer.pop()

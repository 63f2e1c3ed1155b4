"""Point-to-point GEWI link: tick-driven sender/receiver with buffered entanglement.

Each tick the sender (1) maybe receives a J-bit job, (2) transmits if it has
anything to send, otherwise (3) generates EPR pairs and ships one half to the
receiver. Stored halves decohere lazily: noise is only applied when a pair is
taken out of memory.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .buffers import (
    Consume,
    EntanglementBuffer,
    EprRecord,
    Message,
    MessageBuffer,
    Overflow,
    StoreResult,
)
from .qcore import (
    DECODE,
    PERFECT,
    Half,
    NoiseParams,
    aged_decode_table,
    apply_memory_noise,
    bell_measure_sample,
    classical_encode_measure,
    sample_cdf,
    superdense_encode,
)

__all__ = [
    "Mode",
    "LinkConfig",
    "TransmissionRecord",
    "RunMetrics",
    "LinkResult",
    "Channel",
    "consume_and_decode",
    "compute_metrics",
    "run_link",
]


class Mode(str, enum.Enum):
    ASSISTED = "assisted"
    PLAIN = "plain"


@dataclass(frozen=True)
class LinkConfig:
    """One point-to-point scenario. Times in ns, sizes in bits or pair slots."""

    arrival_prob: float = 0.5
    job_bits: int = 4
    buffer_bits: int = 4
    ebuf_capacity: int = 200
    noise: NoiseParams = PERFECT
    overflow: Overflow = Overflow.DROP_NEW
    consume: Consume = Consume.FILO
    tick_period: float = 10.0
    channel_delay: float = 5000.0
    qubits_per_tick: int = 2
    pairs_per_idle_tick: int = 1
    total_ticks: int = 100_000
    warm_start: bool = False

    def __post_init__(self):
        object.__setattr__(self, "overflow", Overflow(self.overflow))
        object.__setattr__(self, "consume", Consume(self.consume))
        self.validate()

    def validate(self) -> None:
        if not self.tick_period > 0:
            raise ValueError(f"tick_period must be > 0, got {self.tick_period}")
        if self.channel_delay < 0:
            raise ValueError(f"channel_delay must be >= 0, got {self.channel_delay}")
        if self.qubits_per_tick < 1:
            raise ValueError(f"qubits_per_tick must be >= 1, got {self.qubits_per_tick}")
        if not 0.0 <= self.arrival_prob <= 1.0:
            raise ValueError(f"arrival_prob must lie in [0, 1], got {self.arrival_prob}")
        if self.job_bits < 1:
            raise ValueError(f"job_bits must be >= 1, got {self.job_bits}")
        if self.buffer_bits < self.job_bits:
            raise ValueError(
                f"buffer_bits ({self.buffer_bits}) cannot hold one {self.job_bits}-bit job"
            )
        if self.ebuf_capacity < 0:
            raise ValueError(f"ebuf_capacity must be >= 0, got {self.ebuf_capacity}")
        if self.pairs_per_idle_tick < 0:
            raise ValueError("pairs_per_idle_tick must be >= 0")
        if self.total_ticks < 0:
            raise ValueError("total_ticks must be >= 0")

    def with_(self, **changes) -> "LinkConfig":
        return replace(self, **changes)

    @property
    def pairs_per_message(self) -> int:
        return math.ceil(self.job_bits / 2)


@dataclass(slots=True)
class TransmissionRecord:
    """One message's trip across one link."""

    seq: int
    bits: tuple
    mode: Mode
    send_tick: int
    link: int = 0
    complete_tick: int = -1
    arrival_time: float = math.nan
    decoded: list = field(default_factory=list)
    pair_ids: list = field(default_factory=list)
    # (sender-half age, receiver-half age) in ns for each consumed pair
    pair_ages: list = field(default_factory=list)

    @property
    def error(self) -> bool:
        return tuple(self.decoded) != tuple(self.bits)

    @property
    def decoded_bits(self) -> tuple:
        return tuple(self.decoded)


@dataclass
class RunMetrics:
    total_ticks: int
    tick_period: float
    messages_offered: int = 0
    messages_accepted: int = 0
    messages_dropped: int = 0
    messages_delivered: int = 0
    messages_errored: int = 0
    assisted_messages: int = 0
    plain_messages: int = 0
    bits_delivered: int = 0
    pairs_generated: int = 0
    pairs_consumed: int = 0
    pairs_evicted: int = 0
    pairs_dropped: int = 0
    pairs_remaining: int = 0

    @property
    def message_error_rate(self) -> float:
        # no deliveries -> reported as 0; check ``messages_delivered``
        if self.messages_delivered == 0:
            return 0.0
        return self.messages_errored / self.messages_delivered

    @property
    def throughput(self) -> float:
        """Average error-weighted throughput in bits per tick."""
        if self.total_ticks == 0:
            return 0.0
        return self.bits_delivered / self.total_ticks * (1.0 - self.message_error_rate)

    @property
    def throughput_bps(self) -> float:
        return self.throughput / (self.tick_period * 1e-9)

    @property
    def assisted_fraction(self) -> float:
        if self.messages_delivered == 0:
            return 0.0
        return self.assisted_messages / self.messages_delivered

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(
            message_error_rate=self.message_error_rate,
            throughput=self.throughput,
            throughput_bps=self.throughput_bps,
        )
        return d


@dataclass
class LinkResult:
    config: LinkConfig
    metrics: RunMetrics
    trace: list


@lru_cache(maxsize=65536)
def _cdf_rows(age: float, noise: NoiseParams) -> tuple:
    return tuple(tuple(row) for row in aged_decode_table(age, noise))


def consume_and_decode(
    record: EprRecord, symbol: int, now: float, noise: NoiseParams, rng: np.random.Generator
) -> int:
    """Encode ``symbol`` on a pair taken from memory at ``now`` and Bell-measure it.

    Both halves are decohered for the time since the record's last update:
    the receiver's half sits in memory exactly as long as the sender's, shifted
    by the channel delay. Returns the decoded 2-bit symbol.
    """
    dt = now - record.last_update_time
    if record.fresh:
        outcome = sample_cdf(_cdf_rows(dt, noise)[symbol], rng.random())
    else:
        state = apply_memory_noise(record.state, Half.SENDER, dt, noise)
        state = apply_memory_noise(state, Half.RECEIVER, dt, noise)
        record.state = state
        outcome = int(bell_measure_sample(superdense_encode(state, symbol), rng))
    record.last_update_time = now
    return int(DECODE[outcome])


_SYMBOL_OF = tuple(int(v) for v in DECODE)


class _Transmission:
    __slots__ = ("record", "symbols", "sent")

    def __init__(self, record: TransmissionRecord, symbols: list):
        self.record = record
        self.symbols = symbols
        self.sent = 0

    @property
    def done(self) -> bool:
        return self.sent >= len(self.symbols)


class Channel:
    """One directed link: the sender's pair memory, the receiver's twin memory, and the fiber.

    Used by both the point-to-point runner and the network simulator.
    """

    def __init__(
        self,
        config: LinkConfig,
        rng: np.random.Generator,
        index: int = 0,
        pair_ids=None,
    ):
        self.config = config
        self.index = index
        self.rng = rng
        self.ebuf = EntanglementBuffer(config.ebuf_capacity, config.overflow, config.consume)
        # receiver's synchronized memory: pair id -> time its half arrived
        self.rx_memory: dict[int, float] = {}
        self._ids = pair_ids if pair_ids is not None else _counter()
        self._tables: dict[float, tuple] = {}
        self.generated = 0
        self.consumed = 0
        self.evicted = 0
        self.dropped = 0
        self.assisted = 0
        self.plain = 0

    def __len__(self) -> int:
        return len(self.ebuf)

    def generate(self, now: float, count: Optional[int] = None) -> None:
        """Create ``count`` fresh pairs, keep one half, send the other down the fiber."""
        n = self.config.pairs_per_idle_tick if count is None else count
        delay = self.config.channel_delay
        for _ in range(n):
            rec = EprRecord(next(self._ids), now)
            self.generated += 1
            result = self.ebuf.store(rec)
            if result is StoreResult.DROPPED_NEW:
                self.dropped += 1
                continue
            if result is StoreResult.REPLACED_OLDEST:
                self.evicted += 1
                self.rx_memory.pop(self.ebuf.last_evicted.id, None)
            self.rx_memory[rec.id] = now + delay

    def can_assist(self, job_bits: int) -> bool:
        return self.config.ebuf_capacity > 0 and len(self.ebuf) >= math.ceil(job_bits / 2)

    def begin(self, seq: int, bits: tuple, tick: int) -> _Transmission:
        """Pick the mode for a whole message: assisted only if enough pairs are stored."""
        if self.can_assist(len(bits)):
            mode = Mode.ASSISTED
            padded = list(bits) + [0] * (len(bits) % 2)
            symbols = [2 * padded[k] + padded[k + 1] for k in range(0, len(padded), 2)]
            self.assisted += 1
        else:
            mode = Mode.PLAIN
            symbols = list(bits)
            self.plain += 1
        rec = TransmissionRecord(seq=seq, bits=bits, mode=mode, send_tick=tick, link=self.index)
        return _Transmission(rec, symbols)

    def transmit_step(self, tx: _Transmission, tick: int) -> bool:
        """Send up to Q channel uses of ``tx``. Returns True once the message is fully sent."""
        cfg = self.config
        now = tick * cfg.tick_period
        rec = tx.record
        end = min(tx.sent + cfg.qubits_per_tick, len(tx.symbols))
        if rec.mode is Mode.ASSISTED:
            measured_at = now + cfg.channel_delay
            noise = cfg.noise
            tables = self._tables
            take = self.ebuf.take
            for k in range(tx.sent, end):
                pair = take()
                rx_arrival = self.rx_memory.pop(pair.id)
                age = now - pair.last_update_time
                if pair.fresh:
                    rows = tables.get(age)
                    if rows is None:
                        rows = tables[age] = _cdf_rows(age, noise)
                    sym = _SYMBOL_OF[sample_cdf(rows[tx.symbols[k]], self.rng.random())]
                    pair.last_update_time = now
                else:
                    sym = consume_and_decode(pair, tx.symbols[k], now, noise, self.rng)
                rec.pair_ids.append(pair.id)
                rec.pair_ages.append((age, measured_at - rx_arrival))
                rec.decoded.append(sym >> 1)
                rec.decoded.append(sym & 1)
            self.consumed += end - tx.sent
        else:
            for k in range(tx.sent, end):
                rec.decoded.append(classical_encode_measure(tx.symbols[k]))
        tx.sent = end
        if tx.done:
            del rec.decoded[len(rec.bits):]
            rec.complete_tick = tick
            rec.arrival_time = now + cfg.channel_delay
            return True
        return False

    def counters(self) -> dict:
        return dict(
            pairs_generated=self.generated,
            pairs_consumed=self.consumed,
            pairs_evicted=self.evicted,
            pairs_dropped=self.dropped,
            pairs_remaining=len(self.ebuf),
        )


def _counter():
    i = 0
    while True:
        yield i
        i += 1


def compute_metrics(trace, total_ticks: int, tick_period: float = 10.0, **counts) -> RunMetrics:
    """Summarise delivered transmissions.

    The error rate is the fraction of delivered messages with any wrong bit;
    throughput is delivered bits per tick scaled by the success rate.
    """
    m = RunMetrics(total_ticks=total_ticks, tick_period=tick_period, **counts)
    for rec in trace:
        m.messages_delivered += 1
        m.bits_delivered += len(rec.bits)
        if rec.error:
            m.messages_errored += 1
        if rec.mode is Mode.ASSISTED:
            m.assisted_messages += 1
        else:
            m.plain_messages += 1
    return m


def run_link(config: LinkConfig, seed) -> LinkResult:
    """Run one point-to-point GEWI simulation.

    Arrivals stop after ``config.total_ticks``; the sender then finishes any
    queued jobs and every message in flight is delivered. Throughput is
    normalised by ``total_ticks``.
    """
    cfg = config
    ss = np.random.SeedSequence(seed)
    arrival_ss, payload_ss, measure_ss = ss.spawn(3)
    n = cfg.total_ticks
    arrivals = (np.random.default_rng(arrival_ss).random(n) < cfg.arrival_prob).tolist()
    n_arrivals = sum(arrivals)
    payloads = np.random.default_rng(payload_ss).integers(
        0, 2, size=(n_arrivals, cfg.job_bits), dtype=np.int8
    ).tolist()

    channel = Channel(cfg, np.random.default_rng(measure_ss))
    mbuf = MessageBuffer(cfg.buffer_bits, cfg.job_bits)
    if cfg.warm_start:
        channel.generate(0.0, cfg.ebuf_capacity)

    offered = accepted = dropped = 0
    pending: list = []  # (arrival_time, seq, record)
    delivered: list = []
    current: Optional[_Transmission] = None
    tp = cfg.tick_period

    tick = 0
    while tick < n or current is not None or mbuf.queue:
        now = tick * tp
        while pending and pending[0][0] <= now:
            delivered.append(heapq.heappop(pending)[2])
        if tick < n and arrivals[tick]:
            bits = tuple(payloads[offered])
            if mbuf.offer(Message(offered, bits)):
                accepted += 1
            else:
                dropped += 1
            offered += 1
        if current is None and mbuf.queue:
            msg = mbuf.peek()
            current = channel.begin(msg.seq, msg.bits, tick)
        if current is not None:
            if channel.transmit_step(current, tick):
                mbuf.pop()
                rec = current.record
                heapq.heappush(pending, (rec.arrival_time, rec.seq, rec))
                current = None
        else:
            channel.generate(now)
        tick += 1
    while pending:
        delivered.append(heapq.heappop(pending)[2])

    metrics = compute_metrics(
        delivered,
        n,
        tp,
        messages_offered=offered,
        messages_accepted=accepted,
        messages_dropped=dropped,
        **channel.counters(),
    )
    return LinkResult(cfg, metrics, delivered)

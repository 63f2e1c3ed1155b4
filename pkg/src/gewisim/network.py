"""Networks of buffered-entanglement links with decode-and-forward relays.

Every node with outgoing links runs the GEWI loop over all of them at once:
the head-of-line job goes out on the link holding the most stored pairs,
and every other outgoing link that is not carrying data generates a pair.
Relays fully decode a message, queue the classical bits and send them on
like any other sender, so no entanglement swapping is needed.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .buffers import Consume, Message, MessageBuffer, Overflow
from .link import Channel, LinkConfig, Mode, TransmissionRecord, _counter
from .qcore import PERFECT, NoiseParams

__all__ = [
    "Role",
    "Node",
    "Link",
    "Topology",
    "NetworkMetrics",
    "NetworkResult",
    "route",
    "run_network",
]


class Role(str, enum.Enum):
    SOURCE = "source"
    RELAY = "relay"
    SINK = "sink"


@dataclass(frozen=True)
class Node:
    name: str
    role: Role
    buffer_bits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    config: LinkConfig


@dataclass(frozen=True)
class Topology:
    """Nodes plus directed links; link order fixes routing tie-breaks and pair-id streams."""

    nodes: tuple
    links: tuple
    arrival_prob: float = 0.5
    job_bits: int = 4
    total_ticks: int = 100_000
    tick_period: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        self.validate()

    def validate(self) -> None:
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("node names must be unique")
        sources = [n for n in self.nodes if n.role is Role.SOURCE]
        if len(sources) != 1:
            raise ValueError(f"exactly one source node is required, got {len(sources)}")
        if not any(n.role is Role.SINK for n in self.nodes):
            raise ValueError("topology needs a sink node")
        known = set(names)
        seen = set()
        for ln in self.links:
            if ln.src not in known or ln.dst not in known:
                raise ValueError(f"link {ln.src}->{ln.dst} references an unknown node")
            if (ln.src, ln.dst) in seen:
                raise ValueError(f"duplicate link {ln.src}->{ln.dst}")
            seen.add((ln.src, ln.dst))
            if ln.config.job_bits != self.job_bits:
                raise ValueError("every link must carry the topology's job size")
            if ln.config.tick_period != self.tick_period:
                raise ValueError("every link must share the topology's tick period")
        for n in self.nodes:
            out = self.out_links(n.name)
            if n.role is Role.SINK and out:
                raise ValueError(f"sink {n.name} cannot have outgoing links")
            if n.role is not Role.SINK:
                if not out:
                    raise ValueError(f"node {n.name} has no outgoing link")
                if n.buffer_bits < self.job_bits:
                    raise ValueError(f"node {n.name} buffer cannot hold one job")
        if not 0.0 <= self.arrival_prob <= 1.0:
            raise ValueError("arrival_prob must lie in [0, 1]")
        self.topological_order()

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    @property
    def source(self) -> Node:
        return next(n for n in self.nodes if n.role is Role.SOURCE)

    def out_links(self, name: str) -> list[int]:
        return [i for i, ln in enumerate(self.links) if ln.src == name]

    def topological_order(self) -> list[str]:
        indeg = {n.name: 0 for n in self.nodes}
        for ln in self.links:
            indeg[ln.dst] += 1
        order = []
        ready = [n.name for n in self.nodes if indeg[n.name] == 0]
        while ready:
            name = ready.pop(0)
            order.append(name)
            for i in self.out_links(name):
                dst = self.links[i].dst
                indeg[dst] -= 1
                if indeg[dst] == 0:
                    ready.append(dst)
        if len(order) != len(self.nodes):
            raise ValueError("topology must be acyclic")
        return order

    def with_links(self, **changes) -> "Topology":
        """Copy with ``changes`` applied to every link's config."""
        links = tuple(Link(ln.src, ln.dst, replace(ln.config, **changes)) for ln in self.links)
        return replace(self, links=links)

    @classmethod
    def diamond(
        cls,
        arrival_prob: float = 0.5,
        noise: NoiseParams = PERFECT,
        ebuf_capacity: int = 200,
        job_bits: int = 4,
        source_buffer_bits: int = 4,
        relay_buffer_bits: Optional[int] = None,
        overflow: Overflow = Overflow.DROP_NEW,
        consume: Consume = Consume.FILO,
        qubits_per_tick: int = 1,
        channel_delay: float = 5000.0,
        tick_period: float = 10.0,
        total_ticks: int = 100_000,
    ) -> "Topology":
        """Source s, relays a and b, sink d; links s->a, s->b, a->d, b->d."""
        if relay_buffer_bits is None:
            relay_buffer_bits = 64 * job_bits
        cfg = LinkConfig(
            arrival_prob=arrival_prob,
            job_bits=job_bits,
            buffer_bits=source_buffer_bits,
            ebuf_capacity=ebuf_capacity,
            noise=noise,
            overflow=overflow,
            consume=consume,
            tick_period=tick_period,
            channel_delay=channel_delay,
            qubits_per_tick=qubits_per_tick,
            total_ticks=total_ticks,
        )
        nodes = (
            Node("s", Role.SOURCE, source_buffer_bits),
            Node("a", Role.RELAY, relay_buffer_bits),
            Node("b", Role.RELAY, relay_buffer_bits),
            Node("d", Role.SINK),
        )
        links = (Link("s", "a", cfg), Link("s", "b", cfg), Link("a", "d", cfg), Link("b", "d", cfg))
        return cls(nodes, links, arrival_prob, job_bits, total_ticks, tick_period)


def route(counts: Sequence[int]) -> int:
    """Index of the outgoing link with the most stored pairs; ties go to the lowest index."""
    if not counts:
        raise ValueError("node has no outgoing links")
    best = 0
    for i in range(1, len(counts)):
        if counts[i] > counts[best]:
            best = i
    return best


@dataclass
class RouteDecision:
    tick: int
    node: str
    counts: tuple
    chosen: int  # global link index


@dataclass
class NetworkMetrics:
    total_ticks: int
    tick_period: float
    messages_offered: int = 0
    messages_accepted: int = 0
    messages_dropped: int = 0
    relay_drops: int = 0
    messages_delivered: int = 0
    messages_errored: int = 0
    bits_delivered: int = 0
    link_modes: dict = field(default_factory=dict)   # link label -> {"assisted": n, "plain": n}
    link_pairs: dict = field(default_factory=dict)   # link label -> pair counters

    @property
    def message_error_rate(self) -> float:
        if self.messages_delivered == 0:
            return 0.0
        return self.messages_errored / self.messages_delivered

    @property
    def throughput(self) -> float:
        """End-to-end error-weighted throughput at the sink, bits per tick."""
        if self.total_ticks == 0:
            return 0.0
        return self.bits_delivered / self.total_ticks * (1.0 - self.message_error_rate)

    @property
    def throughput_bps(self) -> float:
        return self.throughput / (self.tick_period * 1e-9)


@dataclass
class NetworkResult:
    topology: Topology
    metrics: NetworkMetrics
    # sink-side view: seq -> (source bits, bits decoded at the sink)
    deliveries: dict
    hops: list          # every completed TransmissionRecord, in completion order
    routes: list        # RouteDecision per transmission start at multi-link nodes
    busy: dict          # node -> list of (tick, link index) while carrying data


class _Sender:
    __slots__ = ("name", "buffer", "links", "current", "current_link", "is_source")

    def __init__(self, name, buffer, links, is_source):
        self.name = name
        self.buffer = buffer
        self.links = links
        self.current = None
        self.current_link = None
        self.is_source = is_source


def run_network(topology: Topology, seed, record_busy: bool = False) -> NetworkResult:
    """Simulate ``topology`` for ``total_ticks`` ticks of source traffic, then drain.

    Within a tick: deliveries due by now are handed to their destination
    (relays enqueue, the sink scores), the source polls for a new job, then
    each sending node in topological order transmits or generates pairs.
    """
    topo = topology
    n = topo.total_ticks
    ss = np.random.SeedSequence(seed)
    arrival_ss, payload_ss, measure_ss = ss.spawn(3)
    arrivals = (np.random.default_rng(arrival_ss).random(n) < topo.arrival_prob).tolist()
    payloads = np.random.default_rng(payload_ss).integers(
        0, 2, size=(sum(arrivals), topo.job_bits), dtype=np.int8
    ).tolist()

    channels = [
        Channel(ln.config, np.random.default_rng(child), index=i, pair_ids=_counter())
        for i, (ln, child) in enumerate(zip(topo.links, measure_ss.spawn(len(topo.links))))
    ]
    senders = []
    for name in topo.topological_order():
        node = topo.node(name)
        if node.role is Role.SINK:
            continue
        senders.append(
            _Sender(
                name,
                MessageBuffer(node.buffer_bits, topo.job_bits),
                topo.out_links(name),
                node.role is Role.SOURCE,
            )
        )
    by_name = {s.name: s for s in senders}
    source = next(s for s in senders if s.is_source)

    metrics = NetworkMetrics(total_ticks=n, tick_period=topo.tick_period)
    originals: dict[int, tuple] = {}
    deliveries: dict[int, tuple] = {}
    hops: list[TransmissionRecord] = []
    routes: list[RouteDecision] = []
    busy: dict[str, list] = {s.name: [] for s in senders}
    pending: list = []  # (arrival_time, order, record)
    order = 0
    tp = topo.tick_period

    def idle():
        return not pending and all(s.current is None and not s.buffer.queue for s in senders)

    tick = 0
    offered = 0
    while tick < n or not idle():
        now = tick * tp
        while pending and pending[0][0] <= now:
            rec = heapq.heappop(pending)[2]
            dst = topo.links[rec.link].dst
            bits = tuple(rec.decoded)
            if dst in by_name:
                if not by_name[dst].buffer.offer(Message(rec.seq, bits)):
                    metrics.relay_drops += 1
            else:
                deliveries[rec.seq] = (originals[rec.seq], bits)
        if tick < n and arrivals[tick]:
            bits = tuple(payloads[offered])
            if source.buffer.offer(Message(offered, bits)):
                originals[offered] = bits
                metrics.messages_accepted += 1
            else:
                metrics.messages_dropped += 1
            offered += 1

        for snd in senders:
            if snd.current is None and snd.buffer.queue:
                counts = tuple(len(channels[i]) for i in snd.links)
                choice = snd.links[route(counts)]
                if len(snd.links) > 1:
                    routes.append(RouteDecision(tick, snd.name, counts, choice))
                msg = snd.buffer.peek()
                snd.current = channels[choice].begin(msg.seq, msg.bits, tick)
                snd.current_link = choice
            for i in snd.links:
                if i != snd.current_link:
                    channels[i].generate(now)
            if snd.current is not None:
                if record_busy:
                    busy[snd.name].append((tick, snd.current_link))
                if channels[snd.current_link].transmit_step(snd.current, tick):
                    snd.buffer.pop()
                    rec = snd.current.record
                    hops.append(rec)
                    heapq.heappush(pending, (rec.arrival_time, order, rec))
                    order += 1
                    snd.current = None
                    snd.current_link = None
        tick += 1

    metrics.messages_offered = offered
    for seq, (sent, got) in deliveries.items():
        metrics.messages_delivered += 1
        metrics.bits_delivered += len(sent)
        if sent != got:
            metrics.messages_errored += 1
    for i, ln in enumerate(topo.links):
        label = f"{ln.src}->{ln.dst}"
        metrics.link_modes[label] = {"assisted": channels[i].assisted, "plain": channels[i].plain}
        metrics.link_pairs[label] = channels[i].counters()
    return NetworkResult(topo, metrics, deliveries, hops, routes, busy if record_busy else {})


__all__ += ["RouteDecision", "Mode"]

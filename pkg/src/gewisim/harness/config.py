"""Scenario files: TOML in, validated :class:`ScenarioConfig` out.

See ``docs/config.md`` for the schema.
"""
from __future__ import annotations

import enum
import re
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from ..buffers import Consume, Overflow
from ..cluster import ClusterConfig
from ..link import LinkConfig
from ..network import Link, Node, Role, Topology
from ..qcore import PERFECT, NoiseParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "GewisimError",
    "ConfigError",
    "Kind",
    "Policy",
    "POLICIES",
    "NoisePreset",
    "NOISE_PRESETS",
    "SweepAxes",
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "default_config",
    "DEFAULT_ARRIVAL_PROBS",
]


class GewisimError(Exception):
    """Base class for errors reported by the command-line tool."""


class ConfigError(GewisimError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class Kind(str, enum.Enum):
    P2P = "p2p"
    NETWORK = "network"
    CLUSTER = "cluster"


@dataclass(frozen=True)
class Policy:
    name: str
    overflow: Overflow
    consume: Consume


POLICIES = {
    "filo": Policy("filo", Overflow.DROP_NEW, Consume.FILO),
    "fifo": Policy("fifo", Overflow.DROP_NEW, Consume.FIFO),
    "filo-replace": Policy("filo-replace", Overflow.REPLACE_OLDEST, Consume.FILO),
    "fifo-replace": Policy("fifo-replace", Overflow.REPLACE_OLDEST, Consume.FIFO),
}


@dataclass(frozen=True)
class NoisePreset:
    name: str
    params: NoiseParams


NOISE_PRESETS = {
    p.name: p
    for p in (
        NoisePreset("11/10ns", NoiseParams(11.0, 10.0)),
        NoisePreset("110/100ns", NoiseParams(110.0, 100.0)),
        NoisePreset("1100/1000ns", NoiseParams(1100.0, 1000.0)),
        NoisePreset("1ms", NoiseParams(1e6, 1e6)),
        NoisePreset("10ms", NoiseParams(1e7, 1e7)),
        NoisePreset("perfect", PERFECT),
    )
}

DEFAULT_ARRIVAL_PROBS = tuple(round(0.05 * k, 2) for k in range(1, 21))
DEFAULT_TICKS = 1_000_000


@dataclass(frozen=True)
class SweepAxes:
    arrival_probs: tuple = DEFAULT_ARRIVAL_PROBS
    noise: tuple = (NOISE_PRESETS["11/10ns"], NOISE_PRESETS["110/100ns"], NOISE_PRESETS["1100/1000ns"])
    ebuf_capacities: tuple = (200,)
    policies: tuple = (POLICIES["filo"],)
    pairs_per_iteration: tuple = (0, 25, 50, 75, 100, 125)
    baseline: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    kind: Kind
    link: LinkConfig = field(default_factory=lambda: LinkConfig(total_ticks=DEFAULT_TICKS))
    topology: Optional[Topology] = None
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    sweep: SweepAxes = field(default_factory=SweepAxes)
    seeds_per_point: int = 10
    master_seed: int = 0
    workers: int = 1
    output_dir: Path = Path("results")
    export_traces: bool = False
    plot: bool = True
    name: str = ""

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


_TOP_KEYS = {"scenario", "name", "master_seed", "seeds_per_point", "workers", "output_dir",
             "export_traces", "plot", "link", "network", "cluster", "sweep"}
_LINK_KEYS = {f.name for f in fields(LinkConfig)} - {"noise", "overflow", "consume", "arrival_prob"}
_NETWORK_KEYS = {"topology", "relay_buffer_bits", "qubits_per_tick", "nodes", "links"}
_NODE_KEYS = {"name", "role", "buffer_bits"}
_EDGE_KEYS = {"src", "dst", "ebuf_capacity", "qubits_per_tick", "channel_delay"}
_CLUSTER_KEYS = {f.name for f in fields(ClusterConfig)} - {"noise", "pairs_per_iteration"}
_SWEEP_KEYS = {"arrival_probs", "noise", "ebuf_capacities", "policies", "pairs_per_iteration", "baseline"}


class _Locator:
    """Best-effort mapping from a dotted key to the line that defines it."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, key: str, table: Optional[str] = None) -> Optional[int]:
        current = None
        header = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.\-]+)\s*\]\]?")
        assign = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        for i, raw in enumerate(self.lines, start=1):
            m = header.match(raw)
            if m:
                current = m.group(1)
                if table is not None and key == "" and current == table:
                    return i
                continue
            if assign.match(raw) and (table is None or current == table):
                return i
        return None


def _check_keys(data: dict, allowed: set, table: str, loc: _Locator, path) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(
                f"unknown key '{key}' in [{table}]" if table else f"unknown key '{key}'",
                loc.line_of(key, table or None),
                path,
            )


def _want(value, typ, key, loc, table, path):
    ok = isinstance(value, typ) and not (typ in (int, (int, float)) and isinstance(value, bool))
    if not ok:
        name = typ.__name__ if isinstance(typ, type) else "number"
        raise ConfigError(f"'{key}' must be a {name}, got {value!r}", loc.line_of(key, table), path)
    return value


def _noise_entry(entry, loc, path) -> NoisePreset:
    if isinstance(entry, NoisePreset):
        return entry
    if isinstance(entry, str):
        if entry not in NOISE_PRESETS:
            raise ConfigError(
                f"unknown noise preset '{entry}' (choose from {', '.join(NOISE_PRESETS)})",
                loc.line_of("noise", "sweep"),
                path,
            )
        return NOISE_PRESETS[entry]
    if isinstance(entry, dict):
        extra = set(entry) - {"name", "t1", "t2"}
        if extra or "t1" not in entry or "t2" not in entry:
            raise ConfigError(
                "custom noise entries need exactly t1, t2 and optionally name",
                loc.line_of("noise", "sweep"),
                path,
            )
        t1, t2 = float(entry["t1"]), float(entry["t2"])
        try:
            params = NoiseParams(t1, t2)
        except ValueError as exc:
            raise ConfigError(f"invalid noise setting: {exc}", loc.line_of("noise", "sweep"), path) from None
        return NoisePreset(entry.get("name", f"{t1:g}/{t2:g}ns"), params)
    raise ConfigError(f"bad noise entry {entry!r}", loc.line_of("noise", "sweep"), path)


def _axis(sweep: dict, key: str, default, loc, path):
    if key not in sweep:
        return default
    values = sweep[key]
    if not isinstance(values, list):
        raise ConfigError(f"sweep axis '{key}' must be a list", loc.line_of(key, "sweep"), path)
    if not values:
        raise ConfigError(f"sweep axis '{key}' is empty", loc.line_of(key, "sweep"), path)
    return values


def parse_config(text: str, path: Optional[str] = None) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"parse error: {exc}", int(m.group(1)) if m else None, path) from None
    loc = _Locator(text)
    _check_keys(data, _TOP_KEYS, "", loc, path)

    if "scenario" not in data:
        raise ConfigError("missing required key 'scenario'", None, path)
    try:
        kind = Kind(data["scenario"])
    except ValueError:
        raise ConfigError(
            f"scenario must be one of p2p, network, cluster; got {data['scenario']!r}",
            loc.line_of("scenario"),
            path,
        ) from None

    link_tbl = data.get("link", {})
    _check_keys(link_tbl, _LINK_KEYS, "link", loc, path)
    link_kwargs: dict[str, Any] = {"total_ticks": DEFAULT_TICKS}
    for key, value in link_tbl.items():
        typ = bool if key == "warm_start" else (int if key in {
            "job_bits", "buffer_bits", "ebuf_capacity", "qubits_per_tick", "pairs_per_idle_tick", "total_ticks"
        } else (int, float))
        link_kwargs[key] = _want(value, typ, key, loc, "link", path)
    try:
        base_link = LinkConfig(**link_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [link]: {exc}", loc.line_of("", "link"), path) from None

    sweep_tbl = data.get("sweep", {})
    _check_keys(sweep_tbl, _SWEEP_KEYS, "sweep", loc, path)
    defaults = SweepAxes()
    noise_default = defaults.noise
    if kind is Kind.CLUSTER:
        noise_default = (NOISE_PRESETS["1100/1000ns"], NOISE_PRESETS["1ms"], NOISE_PRESETS["10ms"])
    probs = _axis(sweep_tbl, "arrival_probs", defaults.arrival_probs, loc, path)
    for r in probs:
        if isinstance(r, bool) or not isinstance(r, (int, float)) or not 0 <= r <= 1:
            raise ConfigError(f"arrival probability {r!r} outside [0, 1]", loc.line_of("arrival_probs", "sweep"), path)
    noise = tuple(_noise_entry(e, loc, path) for e in _axis(sweep_tbl, "noise", noise_default, loc, path))
    if len({n.name for n in noise}) != len(noise):
        raise ConfigError("duplicate noise names in sweep", loc.line_of("noise", "sweep"), path)
    caps = _axis(sweep_tbl, "ebuf_capacities", (base_link.ebuf_capacity,), loc, path)
    for e in caps:
        if isinstance(e, bool) or not isinstance(e, int) or e < 0:
            raise ConfigError(f"memory size {e!r} must be a non-negative integer",
                              loc.line_of("ebuf_capacities", "sweep"), path)
    policy_default = {Kind.P2P: ("filo", "fifo", "filo-replace"),
                      Kind.NETWORK: ("filo", "filo-replace")}.get(kind, ("filo",))
    policy_names = _axis(sweep_tbl, "policies", policy_default, loc, path)
    for p in policy_names:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r} (choose from {', '.join(POLICIES)})",
                              loc.line_of("policies", "sweep"), path)
    pairs = _axis(sweep_tbl, "pairs_per_iteration", defaults.pairs_per_iteration, loc, path)
    for p in pairs:
        if isinstance(p, bool) or not isinstance(p, int) or p < 0:
            raise ConfigError(f"pairs_per_iteration value {p!r} must be a non-negative integer",
                              loc.line_of("pairs_per_iteration", "sweep"), path)
    baseline = _want(sweep_tbl.get("baseline", True), bool, "baseline", loc, "sweep", path)
    axes = SweepAxes(
        arrival_probs=tuple(float(r) for r in probs),
        noise=noise,
        ebuf_capacities=tuple(caps),
        policies=tuple(POLICIES[p] for p in policy_names),
        pairs_per_iteration=tuple(pairs),
        baseline=baseline,
    )

    topology = None
    if kind is Kind.NETWORK:
        topology = _parse_network(data.get("network", {}), base_link, loc, path)
    elif "network" in data:
        raise ConfigError("[network] is only valid for scenario = \"network\"", loc.line_of("", "network"), path)

    cluster_tbl = data.get("cluster", {})
    _check_keys(cluster_tbl, _CLUSTER_KEYS, "cluster", loc, path)
    if cluster_tbl and kind is not Kind.CLUSTER:
        raise ConfigError("[cluster] is only valid for scenario = \"cluster\"", loc.line_of("", "cluster"), path)
    ckw = {}
    for key, value in cluster_tbl.items():
        if key in ("centers", "initial_centroids"):
            ckw[key] = tuple(tuple(float(x) for x in c) for c in value)
        else:
            ckw[key] = value
    try:
        cluster = ClusterConfig(**ckw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [cluster]: {exc}", loc.line_of("", "cluster"), path) from None

    seeds = _want(data.get("seeds_per_point", 10), int, "seeds_per_point", loc, None, path)
    if seeds < 1:
        raise ConfigError("seeds_per_point must be >= 1", loc.line_of("seeds_per_point"), path)
    workers = _want(data.get("workers", 1), int, "workers", loc, None, path)
    if workers < 1:
        raise ConfigError("workers must be >= 1", loc.line_of("workers"), path)
    master = _want(data.get("master_seed", 0), int, "master_seed", loc, None, path)
    if master < 0:
        raise ConfigError("master_seed must be non-negative", loc.line_of("master_seed"), path)

    return ScenarioConfig(
        kind=kind,
        link=base_link,
        topology=topology,
        cluster=cluster,
        sweep=axes,
        seeds_per_point=seeds,
        master_seed=master,
        workers=workers,
        output_dir=Path(_want(data.get("output_dir", "results"), str, "output_dir", loc, None, path)),
        export_traces=_want(data.get("export_traces", False), bool, "export_traces", loc, None, path),
        plot=_want(data.get("plot", True), bool, "plot", loc, None, path),
        name=_want(data.get("name", kind.value), str, "name", loc, None, path),
    )


def _parse_network(tbl: dict, base: LinkConfig, loc: _Locator, path) -> Topology:
    _check_keys(tbl, _NETWORK_KEYS, "network", loc, path)
    q = tbl.get("qubits_per_tick", 1)
    relay_bits = tbl.get("relay_buffer_bits", 64 * base.job_bits)
    shape = tbl.get("topology", "diamond" if "nodes" not in tbl else "custom")
    try:
        link_cfg = replace(base, qubits_per_tick=q)
        if shape == "diamond":
            if "nodes" in tbl or "links" in tbl:
                raise ConfigError("explicit nodes/links need topology = \"custom\"",
                                  loc.line_of("topology", "network"), path)
            d = Topology.diamond(job_bits=base.job_bits, source_buffer_bits=base.buffer_bits,
                                 relay_buffer_bits=relay_bits, total_ticks=base.total_ticks,
                                 tick_period=base.tick_period)
            links = tuple(Link(ln.src, ln.dst, link_cfg) for ln in d.links)
            return Topology(d.nodes, links, job_bits=base.job_bits, total_ticks=base.total_ticks,
                            tick_period=base.tick_period)
        if shape != "custom":
            raise ConfigError(f"unknown topology {shape!r}", loc.line_of("topology", "network"), path)
        nodes = []
        for entry in tbl.get("nodes", []):
            _check_keys(entry, _NODE_KEYS, "network.nodes", loc, path)
            role = Role(entry["role"])
            default_bits = base.buffer_bits if role is Role.SOURCE else (0 if role is Role.SINK else relay_bits)
            nodes.append(Node(entry["name"], role, entry.get("buffer_bits", default_bits)))
        links = []
        for entry in tbl.get("links", []):
            _check_keys(entry, _EDGE_KEYS, "network.links", loc, path)
            overrides = {k: v for k, v in entry.items() if k not in ("src", "dst")}
            links.append(Link(entry["src"], entry["dst"], replace(link_cfg, **overrides)))
        return Topology(nodes, links, job_bits=base.job_bits, total_ticks=base.total_ticks,
                        tick_period=base.tick_period)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid [network]: {exc}", loc.line_of("", "network"), path) from None


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(p)) from None
    return parse_config(text, str(p))


def default_config(kind: Kind | str) -> ScenarioConfig:
    """The built-in scenario used when the CLI is run without ``--config``."""
    return parse_config(f'scenario = "{Kind(kind).value}"\n')

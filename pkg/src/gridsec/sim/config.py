"""Scenario configuration: YAML schema, loading, and validation diagnostics.

Every validation error names the config path (dotted keys / indices) that
caused it; YAML syntax errors keep the parser's line and column.  The schema
is documented in the repository README.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..modmath import DEFAULT_PRIME, is_prime
from .topology import Topology, TopologyError, edge_key

SCHEME_SPATIAL = "spatial"
SCHEME_TEMPORAL = "temporal"

STRATEGIES = ("record_only", "spatial_reconstruct", "temporal_guess", "winnow_attempt")
KNOWLEDGE = ("mac_key", "prime_p")
PHASES = ("key_exchange", "authenticate", "transfer")


class ConfigError(ValueError):
    """Scenario config failed validation; message carries the config path."""


@dataclass
class KeyExchangeConfig:
    scheme: str
    key_bits: int = 64
    prime: int = DEFAULT_PRIME
    threshold: int = 2  # spatial
    parts: int = 3  # temporal
    interval_ticks: int = 1  # temporal
    route_index: int = 0  # temporal: which declared route carries the stream


@dataclass
class TransferConfig:
    payload_bytes: int = 1024
    chunk_bytes: int = 256
    chaff_ratio: float = 1.0
    mac_truncation_bits: int = 160
    audit_mode: bool = False
    route_index: int = 0
    return_result: bool = True


@dataclass
class AdversaryConfig:
    name: str
    strategy: str
    taps: frozenset[tuple[str, str]]
    knowledge: frozenset[str] = frozenset()
    candidate_primes: tuple[int, ...] = ()
    audit: bool = False


@dataclass
class Scenario:
    name: str
    topology: Topology
    key_exchange: KeyExchangeConfig
    transfer: TransferConfig | None
    adversaries: list[AdversaryConfig] = field(default_factory=list)
    phases: tuple[str, ...] = ("key_exchange", "authenticate")
    targets: tuple[str, ...] = ()
    compromised_drms: tuple[str, ...] = ()


def _expect(mapping, key, types, where, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    value = mapping[key]
    if not isinstance(value, types):
        names = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ConfigError(f"{where}.{key}: expected {names}, got {type(value).__name__}")
    return value


def _parse_topology(doc: dict, where: str) -> Topology:
    topo = _expect(doc, "topology", dict, where, required=True)
    nodes = _expect(topo, "nodes", dict, f"{where}.topology", required=True)
    for name, role in nodes.items():
        if not isinstance(role, str):
            raise ConfigError(f"{where}.topology.nodes.{name}: role must be a string")
    edges_raw = _expect(topo, "edges", list, f"{where}.topology", required=True)
    edges: dict[tuple[str, str], int] = {}
    for i, entry in enumerate(edges_raw):
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ConfigError(f"{where}.topology.edges[{i}]: expected [node, node, latency]")
        a, b, latency = entry
        if not isinstance(latency, int):
            raise ConfigError(f"{where}.topology.edges[{i}]: latency must be an integer")
        edges[edge_key(str(a), str(b))] = latency
    paths_raw = _expect(topo, "paths", dict, f"{where}.topology", default={})
    paths = {
        str(drm): [[str(n) for n in route] for route in routes]
        for drm, routes in paths_raw.items()
    }
    try:
        return Topology(nodes={str(k): str(v) for k, v in nodes.items()}, edges=edges, paths=paths)
    except TopologyError as exc:
        raise ConfigError(f"{where}.topology: {exc}") from exc


def _parse_key_exchange(doc: dict, where: str) -> KeyExchangeConfig:
    kx = _expect(doc, "key_exchange", dict, where, required=True)
    w = f"{where}.key_exchange"
    scheme = _expect(kx, "scheme", str, w, required=True)
    if scheme not in (SCHEME_SPATIAL, SCHEME_TEMPORAL):
        raise ConfigError(f"{w}.scheme: unknown scheme {scheme!r}")
    cfg = KeyExchangeConfig(
        scheme=scheme,
        key_bits=_expect(kx, "key_bits", int, w, default=64),
        prime=_expect(kx, "prime", int, w, default=DEFAULT_PRIME),
        threshold=_expect(kx, "threshold", int, w, default=2),
        parts=_expect(kx, "parts", int, w, default=3),
        interval_ticks=_expect(kx, "interval_ticks", int, w, default=1),
        route_index=_expect(kx, "route_index", int, w, default=0),
    )
    if not is_prime(cfg.prime):
        raise ConfigError(f"{w}.prime: {cfg.prime} is not prime")
    if cfg.key_bits < 16:
        raise ConfigError(f"{w}.key_bits: must be at least 16")
    return cfg


def _parse_transfer(doc: dict, where: str) -> TransferConfig | None:
    if "transfer" not in doc:
        return None
    tr = _expect(doc, "transfer", dict, where)
    w = f"{where}.transfer"
    cfg = TransferConfig(
        payload_bytes=_expect(tr, "payload_bytes", int, w, default=1024),
        chunk_bytes=_expect(tr, "chunk_bytes", int, w, default=256),
        chaff_ratio=float(_expect(tr, "chaff_ratio", (int, float), w, default=1.0)),
        mac_truncation_bits=_expect(tr, "mac_truncation_bits", int, w, default=160),
        audit_mode=_expect(tr, "audit_mode", bool, w, default=False),
        route_index=_expect(tr, "route_index", int, w, default=0),
        return_result=_expect(tr, "return_result", bool, w, default=True),
    )
    if cfg.payload_bytes < 1:
        raise ConfigError(f"{w}.payload_bytes: must be positive")
    if not 1 <= cfg.chunk_bytes <= 1024:
        raise ConfigError(f"{w}.chunk_bytes: must lie in [1, 1024]")
    return cfg


def _parse_adversaries(doc: dict, topology: Topology, where: str) -> list[AdversaryConfig]:
    out = []
    for i, adv in enumerate(_expect(doc, "adversaries", list, where, default=[])):
        w = f"{where}.adversaries[{i}]"
        if not isinstance(adv, dict):
            raise ConfigError(f"{w}: expected a mapping")
        name = _expect(adv, "name", str, w, default=f"adversary{i}")
        strategy = _expect(adv, "strategy", str, w, required=True)
        if strategy not in STRATEGIES:
            raise ConfigError(f"{w}.strategy: unknown strategy {strategy!r}")
        taps_raw = _expect(adv, "taps", list, w, default=[])
        taps = set()
        for j, tap in enumerate(taps_raw):
            if not (isinstance(tap, list) and len(tap) == 2):
                raise ConfigError(f"{w}.taps[{j}]: expected [node, node]")
            a, b = str(tap[0]), str(tap[1])
            if not topology.has_edge(a, b):
                raise ConfigError(f"{w}.taps[{j}]: no such edge {a}-{b}")
            taps.add(edge_key(a, b))
        knowledge = set()
        for j, item in enumerate(_expect(adv, "knowledge", list, w, default=[])):
            if item not in KNOWLEDGE:
                raise ConfigError(f"{w}.knowledge[{j}]: unknown item {item!r}")
            knowledge.add(item)
        primes = tuple(_expect(adv, "candidate_primes", list, w, default=[]))
        out.append(
            AdversaryConfig(
                name=name,
                strategy=strategy,
                taps=frozenset(taps),
                knowledge=frozenset(knowledge),
                candidate_primes=primes,
                audit=_expect(adv, "audit", bool, w, default=False),
            )
        )
    return out


def parse_scenario(doc: dict, where: str = "scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: top level must be a mapping")
    topology = _parse_topology(doc, where)
    key_exchange = _parse_key_exchange(doc, where)
    transfer = _parse_transfer(doc, where)
    adversaries = _parse_adversaries(doc, topology, where)

    phases_raw = _expect(doc, "phases", list, where, default=["key_exchange", "authenticate"])
    for i, phase in enumerate(phases_raw):
        if phase not in PHASES:
            raise ConfigError(f"{where}.phases[{i}]: unknown phase {phase!r}")
    if "transfer" in phases_raw and transfer is None:
        raise ConfigError(f"{where}.phases: transfer phase listed but no transfer section given")

    targets_raw = _expect(doc, "targets", list, where, default=None)
    targets = tuple(str(t) for t in targets_raw) if targets_raw else tuple(
        d for d in topology.drms if d in topology.paths
    )
    for t in targets:
        if t not in topology.paths:
            raise ConfigError(f"{where}.targets: no declared paths for drm {t!r}")
    if not targets:
        raise ConfigError(f"{where}: no target drms (declare topology.paths)")

    if key_exchange.scheme == SCHEME_SPATIAL:
        for t in targets:
            n = len(topology.paths[t])
            if key_exchange.threshold > n:
                raise ConfigError(
                    f"{where}.key_exchange.threshold: {key_exchange.threshold} exceeds the "
                    f"{n} declared paths for {t!r}"
                )

    compromised = tuple(str(d) for d in _expect(doc, "compromised_drms", list, where, default=[]))
    for i, drm in enumerate(compromised):
        if topology.nodes.get(drm) != "drm":
            raise ConfigError(f"{where}.compromised_drms[{i}]: {drm!r} is not a drm node")

    return Scenario(
        name=str(doc.get("name", "scenario")),
        topology=topology,
        key_exchange=key_exchange,
        transfer=transfer,
        adversaries=adversaries,
        phases=tuple(phases_raw),
        targets=targets,
        compromised_drms=compromised,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_scenario(doc, where=str(path))

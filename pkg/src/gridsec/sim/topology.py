"""Topology model: nodes, latency edges, and declared disjoint path sets."""

from __future__ import annotations

from dataclasses import dataclass, field

ROLE_GRB = "grb"
ROLE_DRM = "drm"
ROLE_INFO = "info_server"
ROLE_ROUTER = "router"
ROLES = (ROLE_GRB, ROLE_DRM, ROLE_INFO, ROLE_ROUTER)


class TopologyError(ValueError):
    """Topology violates a structural invariant."""


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def edge_name(a: str, b: str) -> str:
    x, y = edge_key(a, b)
    return f"{x}-{y}"


@dataclass
class Topology:
    nodes: dict[str, str]  # name -> role
    edges: dict[tuple[str, str], int]  # normalized pair -> latency ticks
    paths: dict[str, list[list[str]]] = field(default_factory=dict)  # drm -> routes from grb

    def __post_init__(self) -> None:
        grbs = [n for n, r in self.nodes.items() if r == ROLE_GRB]
        if len(grbs) != 1:
            raise TopologyError(f"exactly one grb node required, found {len(grbs)}")
        self.grb = grbs[0]
        for name, role in self.nodes.items():
            if role not in ROLES:
                raise TopologyError(f"node {name!r}: unknown role {role!r}")
        for (a, b), latency in self.edges.items():
            for end in (a, b):
                if end not in self.nodes:
                    raise TopologyError(f"edge {a}-{b}: unknown node {end!r}")
            if a == b:
                raise TopologyError(f"edge {a}-{b}: self-loops not allowed")
            if not isinstance(latency, int) or latency < 1:
                raise TopologyError(f"edge {a}-{b}: latency must be a positive integer")
        for drm, routes in self.paths.items():
            self._check_path_set(drm, routes)

    @property
    def drms(self) -> list[str]:
        return sorted(n for n, r in self.nodes.items() if r == ROLE_DRM)

    def has_edge(self, a: str, b: str) -> bool:
        return edge_key(a, b) in self.edges

    def latency(self, a: str, b: str) -> int:
        return self.edges[edge_key(a, b)]

    def _check_path_set(self, drm: str, routes: list[list[str]]) -> None:
        where = f"paths[{drm!r}]"
        if self.nodes.get(drm) != ROLE_DRM:
            raise TopologyError(f"{where}: {drm!r} is not a drm node")
        if not routes:
            raise TopologyError(f"{where}: empty path set")
        for i, route in enumerate(routes):
            if len(route) < 2 or route[0] != self.grb or route[-1] != drm:
                raise TopologyError(
                    f"{where}[{i}]: route must run from {self.grb!r} to {drm!r}, got {route}"
                )
            if len(set(route)) != len(route):
                raise TopologyError(f"{where}[{i}]: route revisits a node")
            for a, b in zip(route, route[1:]):
                if not self.has_edge(a, b):
                    raise TopologyError(f"{where}[{i}]: no edge between {a!r} and {b!r}")
        # Pairwise node-disjointness of interiors.
        for i in range(len(routes)):
            for j in range(i + 1, len(routes)):
                shared = set(routes[i][1:-1]) & set(routes[j][1:-1])
                if shared:
                    raise TopologyError(
                        f"{where}: routes {i} and {j} share interior node(s) {sorted(shared)}"
                    )

    def route_latency(self, route: list[str]) -> int:
        return sum(self.latency(a, b) for a, b in zip(route, route[1:]))

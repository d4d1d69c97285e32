"""Random sensor deployments and their radius-induced connectivity graph.

Sensor ids are dense ``0..N-1``; the sink always gets id ``N`` and sits at a
fixed position that is exempt from the spacing rule.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidConfig, PlacementInfeasible, UnknownNode

UNREACHABLE = -1

PLACEMENTS = ("poisson_disk", "uniform")

# Candidate radius band for dart growth, as multiples of the spacing. A tight
# band packs well above the ~296-node jamming limit of plain dart throwing on
# the default 100 m field.
_GROWTH_BAND = (1.0, 1.2)
_GROWTH_TRIES = 30
_GROWTH_RESTARTS = 10


@dataclass(frozen=True)
class TopologyConfig:
    node_count: int = 300
    field_side: float = 100.0
    comm_radius: float = 10.0
    min_node_spacing: float = 5.0
    sink_position: tuple[float, float] = (50.0, 0.0)
    placement: str = "poisson_disk"

    def __post_init__(self):
        if not isinstance(self.node_count, (int, np.integer)) or self.node_count < 1:
            raise InvalidConfig(f"node_count must be >= 1, got {self.node_count!r}", "nodes")
        if self.field_side <= 0:
            raise InvalidConfig("field_side must be positive", "field")
        if not self.comm_radius > self.min_node_spacing > 0:
            raise InvalidConfig(
                "need comm_radius > min_node_spacing > 0, got "
                f"{self.comm_radius} and {self.min_node_spacing}",
                "radius",
            )
        sx, sy = self.sink_position
        if not (0 <= sx <= self.field_side and 0 <= sy <= self.field_side):
            raise InvalidConfig("sink must lie inside the field", "sink_x")
        if self.placement not in PLACEMENTS:
            raise InvalidConfig(f"placement must be one of {PLACEMENTS}", "placement")


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable deployment: ``positions[i]`` is node ``i``; the last row is the sink."""

    config: TopologyConfig
    positions: np.ndarray
    adjacency: tuple[frozenset[int], ...] = field(repr=False)

    @classmethod
    def from_positions(cls, config: TopologyConfig, sensor_xy) -> "Topology":
        sensor_xy = np.asarray(sensor_xy, dtype=float).reshape(-1, 2)
        if len(sensor_xy) != config.node_count:
            raise InvalidConfig(
                f"expected {config.node_count} sensor positions, got {len(sensor_xy)}", "nodes"
            )
        positions = np.vstack([sensor_xy, np.asarray(config.sink_position, dtype=float)])
        positions.setflags(write=False)
        return cls(config, positions, _adjacency(positions, config.comm_radius))

    @property
    def sink(self) -> int:
        return self.config.node_count

    @property
    def node_count(self) -> int:
        return self.config.node_count

    @property
    def sensors(self) -> range:
        return range(self.config.node_count)

    @property
    def all_nodes(self) -> range:
        return range(self.config.node_count + 1)

    def neighbors(self, node: int) -> frozenset[int]:
        return neighbors(self, node)

    def distance(self, a: int, b: int) -> float:
        self._check(a)
        self._check(b)
        (ax, ay), (bx, by) = self.positions[a], self.positions[b]
        return math.hypot(ax - bx, ay - by)

    def _check(self, node) -> None:
        if not (isinstance(node, (int, np.integer)) and 0 <= node <= self.sink):
            raise UnknownNode(node)

    def edges(self) -> Iterable[tuple[int, int]]:
        for a, nbrs in enumerate(self.adjacency):
            for b in sorted(nbrs):
                if a < b:
                    yield a, b

    def validate(self) -> None:
        """Raise InvalidConfig if bounds or spacing are violated."""
        cfg = self.config
        xy = self.positions[:-1]
        if np.any(xy < 0) or np.any(xy > cfg.field_side):
            raise InvalidConfig("sensor position outside the field", "positions")
        if len(xy) > 1:
            d = _pairwise(xy)
            np.fill_diagonal(d, np.inf)
            if d.min() < cfg.min_node_spacing:
                raise InvalidConfig(
                    f"sensors closer than {cfg.min_node_spacing} m ({d.min():.3f} m)", "positions"
                )

    def to_text(self) -> str:
        cfg = self.config
        sx, sy = cfg.sink_position
        lines = [
            f"# node_count={cfg.node_count} field_side={cfg.field_side!r} "
            f"comm_radius={cfg.comm_radius!r} min_node_spacing={cfg.min_node_spacing!r} "
            f"sink_x={sx!r} sink_y={sy!r} placement={cfg.placement}"
        ]
        for i, (x, y) in enumerate(self.positions):
            lines.append(f"{i} {float(x)!r} {float(y)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Topology":
        header, *rows = [ln for ln in text.splitlines() if ln.strip()]
        if not header.startswith("#"):
            raise InvalidConfig("topology file must start with a '# key=value ...' header", "header")
        fields = dict(tok.split("=", 1) for tok in header[1:].split())
        try:
            config = TopologyConfig(
                node_count=int(fields["node_count"]),
                field_side=float(fields["field_side"]),
                comm_radius=float(fields["comm_radius"]),
                min_node_spacing=float(fields["min_node_spacing"]),
                sink_position=(float(fields["sink_x"]), float(fields["sink_y"])),
                placement=fields.get("placement", "poisson_disk"),
            )
        except KeyError as exc:
            raise InvalidConfig(f"topology header missing {exc.args[0]}", exc.args[0]) from None
        xy = np.full((config.node_count + 1, 2), np.nan)
        for row in rows:
            i, x, y = row.split()
            xy[int(i)] = float(x), float(y)
        if np.isnan(xy).any():
            raise InvalidConfig("topology file does not list every node", "positions")
        if tuple(xy[-1]) != config.sink_position:
            raise InvalidConfig("sink row disagrees with header", "sink_x")
        topo = cls.from_positions(config, xy[:-1])
        topo.validate()
        return topo

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_text(Path(path).read_text())


def _pairwise(xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _adjacency(positions: np.ndarray, radius: float) -> tuple[frozenset[int], ...]:
    linked = _pairwise(positions) <= radius
    np.fill_diagonal(linked, False)
    return tuple(frozenset(np.flatnonzero(row).tolist()) for row in linked)


def _uniform_rejection(cfg: TopologyConfig, rng: np.random.Generator) -> np.ndarray:
    n, side, s2 = cfg.node_count, cfg.field_side, cfg.min_node_spacing**2
    placed = np.empty((n, 2))
    k = rejected = 0
    budget = 1000 * n
    while k < n:
        cand = rng.uniform(0.0, side, 2)
        if k and np.min(np.sum((placed[:k] - cand) ** 2, axis=1)) < s2:
            rejected += 1
            if rejected >= budget:
                raise PlacementInfeasible(
                    f"placed {k}/{n} nodes before {budget} consecutive rejections"
                )
            continue
        placed[k] = cand
        k += 1
        rejected = 0
    return placed


def _dart_growth(side: float, spacing: float, rng: np.random.Generator) -> np.ndarray:
    """Grow a maximal spaced point set by throwing darts around active points."""
    cell = spacing / math.sqrt(2)
    cells = int(math.ceil(side / cell)) + 1
    grid = [[-1] * cells for _ in range(cells)]
    pts: list[tuple[float, float]] = []
    s2 = spacing * spacing
    lo, hi = _GROWTH_BAND

    def fits(x, y):
        gx, gy = int(x / cell), int(y / cell)
        for i in range(max(gx - 2, 0), min(gx + 3, cells)):
            row = grid[i]
            for j in range(max(gy - 2, 0), min(gy + 3, cells)):
                q = row[j]
                if q >= 0:
                    px, py = pts[q]
                    if (px - x) ** 2 + (py - y) ** 2 < s2:
                        return False
        return True

    def add(x, y):
        pts.append((x, y))
        grid[int(x / cell)][int(y / cell)] = len(pts) - 1
        return len(pts) - 1

    active = [add(*rng.uniform(0.0, side, 2).tolist())]
    while active:
        slot = int(rng.integers(len(active)))
        bx, by = pts[active[slot]]
        # all tries for this point drawn at once
        rads = (spacing * rng.uniform(lo, hi, _GROWTH_TRIES)).tolist()
        thetas = rng.uniform(0.0, 2 * math.pi, _GROWTH_TRIES).tolist()
        for rad, theta in zip(rads, thetas):
            x, y = bx + rad * math.cos(theta), by + rad * math.sin(theta)
            if 0.0 <= x <= side and 0.0 <= y <= side and fits(x, y):
                active.append(add(x, y))
                break
        else:
            active[slot] = active[-1]
            active.pop()
    return np.array(pts)


def _poisson_disk(cfg: TopologyConfig, rng: np.random.Generator) -> np.ndarray:
    best = 0
    for _ in range(_GROWTH_RESTARTS):
        sites = _dart_growth(cfg.field_side, cfg.min_node_spacing, rng)
        best = max(best, len(sites))
        if len(sites) >= cfg.node_count:
            pick = rng.choice(len(sites), size=cfg.node_count, replace=False)
            return sites[pick]
    raise PlacementInfeasible(
        f"{cfg.node_count} nodes requested, at most {best} spaced sites found"
    )


def generate_topology(config: TopologyConfig, seed: int) -> Topology:
    """Place ``config.node_count`` sensors at random, at least ``min_node_spacing`` apart.

    Raises PlacementInfeasible when the field is too crowded for the spacing.
    """
    rng = np.random.default_rng(seed)
    if config.placement == "uniform":
        xy = _uniform_rejection(config, rng)
    else:
        xy = _poisson_disk(config, rng)
    return Topology.from_positions(config, xy)


def neighbors(topology: Topology, node: int) -> frozenset[int]:
    topology._check(node)
    return topology.adjacency[node]


def hop_distance_oracle(topology: Topology, source: int) -> dict[int, int]:
    """BFS hop count from ``source`` to every node; UNREACHABLE (-1) if none."""
    topology._check(source)
    dist = {n: UNREACHABLE for n in topology.all_nodes}
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in topology.adjacency[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def multi_source_hops(topology: Topology, sources: Iterable[int], allowed=None) -> dict[int, int]:
    """Hop distance to the nearest of ``sources``, walking only through ``allowed`` nodes."""
    allowed = set(topology.sensors) if allowed is None else set(allowed)
    dist = {}
    queue = deque()
    for s in sorted(sources):
        dist[s] = 0
        queue.append(s)
    while queue:
        u = queue.popleft()
        for v in topology.adjacency[u]:
            if v in allowed and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist

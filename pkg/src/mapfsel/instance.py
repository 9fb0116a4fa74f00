"""MAPF instances over 4-connected grids and single-agent shortest paths.

An instance is a grid plus per-agent (source, target) cell pairs. Cells are
addressed by row-major id over the full grid (``y * width + x``). All types
are immutable after construction and every operation is pure, so everything
here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .benchmark import GridMap, ScenarioEntry
from .errors import NoPathError, ValidationError


@dataclass(frozen=True)
class AgentPath:
    """One agent's shortest path, source first, target last."""

    agent: int
    cells: tuple[int, ...]

    @property
    def length(self) -> int:
        """Number of moves (edges), not cells."""
        return len(self.cells) - 1


@dataclass(frozen=True)
class CellGraph:
    """The undirected graph over passable cells, with 4-neighborhood edges.

    Node ids are dense 0..n-1, assigned row-major over passable cells.
    """

    grid: GridMap
    node_cells: np.ndarray      # (n,) raw cell id per node, ascending
    node_of_cell: np.ndarray    # (width*height,) node id, -1 for blocked
    edges: np.ndarray           # (m, 2) node-id pairs, u < v, lexicographic
    adjacency: sp.csr_matrix    # (n, n) symmetric 0/1
    degrees: np.ndarray         # (n,)
    component_labels: np.ndarray
    num_components: int

    @property
    def num_nodes(self) -> int:
        return int(self.node_cells.size)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])


@lru_cache(maxsize=64)
def cell_graph(grid: GridMap) -> CellGraph:
    """Build (and memoize) the passable-cell graph of a grid."""
    cells = grid.cells
    h, w = cells.shape
    flat = cells.ravel()
    node_cells = np.flatnonzero(flat)
    n = node_cells.size
    node_of_cell = np.full(h * w, -1, dtype=np.int64)
    node_of_cell[node_cells] = np.arange(n)

    pairs = []
    right = cells[:, :-1] & cells[:, 1:]
    if right.any():
        ys, xs = np.nonzero(right)
        a = ys * w + xs
        pairs.append(np.column_stack([a, a + 1]))
    down = cells[:-1, :] & cells[1:, :]
    if down.any():
        ys, xs = np.nonzero(down)
        a = ys * w + xs
        pairs.append(np.column_stack([a, a + w]))
    if pairs:
        cell_pairs = np.concatenate(pairs, axis=0)
        edges = node_of_cell[cell_pairs]
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    else:
        edges = np.empty((0, 2), dtype=np.int64)

    if n > 0:
        u, v = edges[:, 0], edges[:, 1]
        data = np.ones(2 * len(edges))
        adjacency = sp.csr_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(n, n))
        adjacency.sort_indices()
        degrees = np.asarray(adjacency.sum(axis=1)).ravel()
        num_components, labels = connected_components(adjacency, directed=False)
    else:
        adjacency = sp.csr_matrix((0, 0))
        degrees = np.zeros(0)
        labels = np.zeros(0, dtype=np.int64)
        num_components = 0

    edges.setflags(write=False)
    node_cells.setflags(write=False)
    node_of_cell.setflags(write=False)
    return CellGraph(grid=grid, node_cells=node_cells, node_of_cell=node_of_cell,
                     edges=edges, adjacency=adjacency, degrees=degrees,
                     component_labels=labels, num_components=num_components)


@lru_cache(maxsize=64)
def _padded_passable(grid: GridMap) -> np.ndarray:
    """Passability with a one-cell blocked border, flattened. The border lets
    the BFS index all four neighbor moves without bounds checks."""
    padded = np.pad(grid.cells, 1, constant_values=False).ravel()
    padded.setflags(write=False)
    return padded


def shortest_path(grid: GridMap, source: int, target: int, agent: int = 0) -> AgentPath:
    """Deterministic BFS shortest path between two passable cells.

    Ties among equal-length paths are broken by expanding neighbors in the
    fixed order Up, Left, Right, Down and keeping the first-discovered parent.
    The loop below is a level-synchronous formulation of exactly that FIFO
    traversal; the two coincide because grid graphs are bipartite (adjacent
    cells never sit at the same BFS depth).
    """
    w, h = grid.width, grid.height
    passable = grid.cells.ravel()
    for label, cid in (("source", source), ("target", target)):
        if not 0 <= cid < w * h or not passable[cid]:
            raise ValidationError(f"{label} cell {cid} is blocked or out of bounds")
    if source == target:
        return AgentPath(agent=agent, cells=(source,))

    # Work in padded-grid ids: cell (x, y) -> (y + 1) * (w + 2) + x + 1.
    wp = w + 2
    avail = _padded_passable(grid).copy()
    src_pad = (source // w + 1) * wp + source % w + 1
    tgt_pad = (target // w + 1) * wp + target % w + 1
    # Up, Left, Right, Down: ascending padded id, matching the expansion order.
    offsets = np.array([-wp, -1, 1, wp], dtype=np.int32)

    parent = np.full(avail.size, -1, dtype=np.int32)
    # Scratch for first-occurrence dedup; only entries written this level are
    # ever read back, so it needs no per-level reset.
    first_pos = np.empty(avail.size, dtype=np.int32)
    avail[src_pad] = False
    frontier = np.array([src_pad], dtype=np.int32)

    while frontier.size:
        flat = (frontier[:, None] + offsets[None, :]).ravel()
        idx = np.flatnonzero(avail[flat])
        flat = flat[idx]
        if flat.size == 0:
            break
        # Duplicate-index assignment keeps the last write, so assigning in
        # reverse makes first_pos[c] the earliest position discovering c.
        seq = np.arange(flat.size, dtype=np.int32)
        first_pos[flat[::-1]] = seq[::-1]
        is_first = first_pos[flat] == seq
        uniq = flat[is_first]
        # idx >> 2 recovers each candidate's frontier position (its parent).
        parent[uniq] = frontier[idx[is_first] >> 2]
        avail[uniq] = False
        if parent[tgt_pad] >= 0:
            break
        frontier = uniq
    if parent[tgt_pad] < 0:
        raise NoPathError(f"no path from cell {source} to cell {target}")

    pad_cells = [tgt_pad]
    while pad_cells[-1] != src_pad:
        pad_cells.append(int(parent[pad_cells[-1]]))
    pad_cells.reverse()
    cells = tuple((p // wp - 1) * w + (p % wp - 1) for p in pad_cells)
    return AgentPath(agent=agent, cells=cells)


@dataclass(frozen=True)
class MapfInstance:
    """A MAPF instance: a grid plus k (source, target) agent pairs.

    Construction validates that all endpoints are passable, sources are
    pairwise distinct, targets are pairwise distinct, and every agent's
    target is reachable from its source.
    """

    grid: GridMap
    sources: tuple[int, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        if len(self.sources) < 1:
            raise ValidationError("an instance needs at least one agent")
        if len(self.sources) != len(self.targets):
            raise ValidationError("sources and targets must have equal length")
        if len(set(self.sources)) != len(self.sources):
            raise ValidationError("agent sources must be pairwise distinct")
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError("agent targets must be pairwise distinct")
        graph = cell_graph(self.grid)
        for i, (s, t) in enumerate(zip(self.sources, self.targets)):
            for label, cid in (("source", s), ("target", t)):
                if not 0 <= cid < self.grid.width * self.grid.height or graph.node_of_cell[cid] < 0:
                    raise ValidationError(f"agent {i} {label} cell {cid} is blocked or out of bounds")
            if graph.component_labels[graph.node_of_cell[s]] != graph.component_labels[graph.node_of_cell[t]]:
                raise ValidationError(f"agent {i} target unreachable from its source")

    @property
    def k(self) -> int:
        return len(self.sources)

    @classmethod
    def from_scenario(cls, grid: GridMap, entries: list[ScenarioEntry], k: int) -> "MapfInstance":
        """Instance over the first ``k`` scenario entries (benchmark convention)."""
        if k < 1 or k > len(entries):
            raise ValidationError(f"k={k} outside 1..{len(entries)} available scenario entries")
        sources = tuple(grid.cell_id(*e.start) for e in entries[:k])
        targets = tuple(grid.cell_id(*e.goal) for e in entries[:k])
        return cls(grid=grid, sources=sources, targets=targets)


@lru_cache(maxsize=32)
def agent_paths(instance: MapfInstance) -> tuple[AgentPath, ...]:
    """Deterministic shortest path for every agent, ignoring other agents."""
    return tuple(shortest_path(instance.grid, s, t, agent=i)
                 for i, (s, t) in enumerate(zip(instance.sources, instance.targets)))

"""Graph encodings of a MAPF instance.

Two encodings are produced, both simple undirected graphs:

* ``encode_path_subgraph`` keeps only cells lying on some agent's
  deterministic shortest path, with every grid edge between two kept cells.
  The result may be disconnected.
* ``encode_full_graph`` keeps every passable cell and every grid edge, and
  adds one artificial edge per agent joining its source and target cells
  (skipped when source == target, collapsed when duplicated).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError
from .instance import MapfInstance, agent_paths, cell_graph


@dataclass(frozen=True, eq=False)
class EncodedGraph:
    """Simple undirected graph with dense node ids 0..num_nodes-1.

    ``edges`` holds each undirected edge once as (u, v) with u < v, sorted
    lexicographically. ``node_origin[i]`` is the original grid cell id of
    node i (or i itself for graphs not derived from a grid).
    """

    num_nodes: int
    edges: np.ndarray
    node_origin: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.num_nodes:
                raise ValidationError("edge endpoint out of node-id range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValidationError("self-loops are not allowed")
            if (edges[:, 0] > edges[:, 1]).any() or (np.diff(
                    edges[:, 0] * self.num_nodes + edges[:, 1]) <= 0).any():
                raise ValidationError("edges must be (u, v) with u < v, sorted, unique")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        origin = self.node_origin
        origin = np.arange(self.num_nodes) if origin is None else np.asarray(origin, dtype=np.int64)
        if origin.shape != (self.num_nodes,):
            raise ValidationError("node_origin must have one entry per node")
        origin.setflags(write=False)
        object.__setattr__(self, "node_origin", origin)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def __eq__(self, other):
        if not isinstance(other, EncodedGraph):
            return NotImplemented
        return (self.num_nodes == other.num_nodes
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.node_origin, other.node_origin))

    @classmethod
    def from_edge_pairs(cls, num_nodes: int, pairs, node_origin=None) -> "EncodedGraph":
        """Normalize arbitrary (u, v) pairs to set semantics: orient u < v,
        drop duplicates, sort. Self-loops are rejected."""
        pairs = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            lo = pairs.min(axis=1)
            hi = pairs.max(axis=1)
            if (lo == hi).any():
                raise ValidationError("self-loops are not allowed")
            pairs = np.unique(np.column_stack([lo, hi]), axis=0)
        return cls(num_nodes=num_nodes, edges=pairs, node_origin=node_origin)


def encode_path_subgraph(instance: MapfInstance) -> EncodedGraph:
    """Subgraph induced by the union of all agents' shortest-path cells."""
    paths = agent_paths(instance)
    kept = np.unique(np.concatenate([np.asarray(p.cells, dtype=np.int64) for p in paths]))
    graph = cell_graph(instance.grid)
    cell_edges = graph.node_cells[graph.edges]  # edges as raw cell-id pairs
    inside = (np.isin(cell_edges[:, 0], kept) & np.isin(cell_edges[:, 1], kept))
    local = np.searchsorted(kept, cell_edges[inside])
    return EncodedGraph(num_nodes=kept.size, edges=local, node_origin=kept)


def encode_full_graph(instance: MapfInstance) -> EncodedGraph:
    """Full passable-cell graph plus one source-target edge per agent."""
    graph = cell_graph(instance.grid)
    pairs = [graph.edges]
    for s, t in zip(instance.sources, instance.targets):
        if s != t:
            u, v = graph.node_of_cell[s], graph.node_of_cell[t]
            pairs.append(np.array([[min(u, v), max(u, v)]], dtype=np.int64))
    edges = np.unique(np.concatenate(pairs, axis=0), axis=0)
    return EncodedGraph(num_nodes=graph.num_nodes, edges=edges,
                        node_origin=graph.node_cells.copy())


def write_edge_list(graph: EncodedGraph, path) -> None:
    """Debug export: node-count header then one ``u v`` line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.num_nodes}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> EncodedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty edge-list file")
    try:
        num_nodes = int(lines[0])
        pairs = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise DataError(f"{path}: malformed edge list: {exc}") from exc
    if any(len(p) != 2 for p in pairs):
        raise DataError(f"{path}: each edge line must hold exactly two node ids")
    return EncodedGraph.from_edge_pairs(num_nodes, pairs)

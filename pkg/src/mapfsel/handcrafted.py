"""Hand-crafted MAPF instance features.

Twenty numeric descriptors covering grid geometry, agent load, shortest-path
statistics, path interaction, and passable-graph topology. The path-based
entries use the same deterministic per-agent shortest paths as the
path-subgraph encoding, so features and encodings always agree.
"""

from __future__ import annotations

import numpy as np

from .instance import MapfInstance, agent_paths, cell_graph

FEATURE_NAMES = (
    "grid_width",                 # 1
    "grid_height",                # 2
    "passable_cells",             # 3
    "obstacle_density",           # 4  blocked / (width * height)
    "num_agents",                 # 5
    "agent_density",              # 6  agents / passable
    "path_length_mean",           # 7  per-agent BFS path lengths (moves)
    "path_length_max",            # 8
    "path_length_min",            # 9
    "path_length_std",            # 10
    "path_cost_per_passable",     # 11 sum of path lengths / passable
    "shared_path_cells",          # 12 cells on >= 2 agents' paths
    "path_overlap_ratio",         # 13 shared cells / distinct path cells
    "manhattan_mean",             # 14 start-goal Manhattan distances
    "manhattan_std",              # 15
    "detour_factor_mean",         # 16 BFS length / Manhattan (1.0 when both 0)
    "num_components",             # 17 connected components of passable graph
    "corridor_fraction",          # 18 passable cells with degree <= 2
    "open_fraction",              # 19 passable cells with degree == 4
    "largest_component_fraction", # 20 largest component size / passable
)


def handcrafted_features(instance: MapfInstance) -> np.ndarray:
    """The fixed 20-entry feature vector of an instance (see FEATURE_NAMES)."""
    grid = instance.grid
    graph = cell_graph(grid)
    paths = agent_paths(instance)
    passable = graph.num_nodes

    lengths = np.array([p.length for p in paths], dtype=float)
    sx = np.array(instance.sources) % grid.width
    sy = np.array(instance.sources) // grid.width
    tx = np.array(instance.targets) % grid.width
    ty = np.array(instance.targets) // grid.width
    manhattan = (np.abs(sx - tx) + np.abs(sy - ty)).astype(float)
    detour = np.divide(lengths, manhattan, out=np.ones_like(lengths), where=manhattan > 0)

    all_cells = np.concatenate([np.asarray(p.cells) for p in paths])
    uniq, counts = np.unique(all_cells, return_counts=True)
    shared = int((counts >= 2).sum())

    comp_sizes = np.bincount(graph.component_labels) if passable else np.array([0])

    values = np.array([
        grid.width,
        grid.height,
        passable,
        (grid.width * grid.height - passable) / (grid.width * grid.height),
        instance.k,
        instance.k / passable,
        lengths.mean(),
        lengths.max(),
        lengths.min(),
        lengths.std(),
        lengths.sum() / passable,
        shared,
        shared / uniq.size,
        manhattan.mean(),
        manhattan.std(),
        detour.mean(),
        graph.num_components,
        float((graph.degrees <= 2).mean()),
        float((graph.degrees == 4).mean()),
        comp_sizes.max() / passable,
    ], dtype=float)
    return values

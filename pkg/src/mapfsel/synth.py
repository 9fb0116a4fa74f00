"""Synthetic benchmark generator.

Produces a self-contained benchmark (map files, scenario files, a results
CSV, and a grid-type taxonomy) whose fastest solver per instance follows a
deterministic planted rule over instance statistics: agent density,
corridor-ness of the grid, and mean shortest-path detour. Those statistics
are exactly features of the extraction pipeline, so a selector trained on
extracted features can in principle recover the rule perfectly; optional
bounded label noise makes the task harder on demand.

All outputs are pure functions of the seed, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .benchmark import (DEFAULT_PORTFOLIO, RUNTIME_CAP_MIN, GridMap, RuntimeRecord,
                        ScenarioEntry, serialize_map, serialize_results, serialize_scen)
from .errors import DataError
from .evaluation import GRID_TYPES
from .instance import cell_graph, shortest_path

# Planted-rule thresholds over (agent density, corridor fraction, detour mean).
# Each threshold sits inside the value range spanned by several grid types,
# so the rule stays recoverable even when whole types are held out.
DENSITY_HIGH = 0.025
CORRIDOR_HIGH = 0.45
DETOUR_HIGH = 1.06
DENSITY_LOW = 0.007


def planted_label(agent_density: float, corridor_fraction: float, detour_mean: float) -> int:
    """Deterministic fastest-solver rule used by the generator."""
    if agent_density >= DENSITY_HIGH:
        return 3
    if corridor_fraction >= CORRIDOR_HIGH:
        return 4
    if detour_mean >= DETOUR_HIGH:
        return 2
    if agent_density >= DENSITY_LOW:
        return 1
    return 0


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    grids_per_type: int = 2
    scens_per_grid: int = 8
    agent_counts: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30)
    size: int = 33
    noise: float = 0.0
    types: tuple[str, ...] = GRID_TYPES


# -- grid archetypes -------------------------------------------------------


def _grid_empty(size, rng):
    return np.ones((size, size), dtype=bool)


def _grid_random(size, rng):
    density = rng.uniform(0.08, 0.18)
    return rng.random((size, size)) > density


def _grid_warehouse(size, rng):
    # Shelf geometry varies per grid so corridor-ness spans a band instead
    # of a single value.
    row_period = int(rng.integers(2, 4))       # aisle every 2nd or 3rd row
    shelf_w = int(rng.integers(3, 6))
    gap = int(rng.integers(1, 3))
    phase = int(rng.integers(0, shelf_w + gap))
    cells = np.ones((size, size), dtype=bool)
    ys, xs = np.mgrid[0:size, 0:size]
    shelves = (ys % row_period != 0) & ((xs + phase) % (shelf_w + gap) < shelf_w)
    shelves[0, :] = shelves[-1, :] = False
    shelves[:, 0] = shelves[:, -1] = False
    cells[shelves] = False
    return cells


def _grid_room(size, rng):
    room = int(rng.choice([3, 5, 7, 9]))
    cells = np.ones((size, size), dtype=bool)
    wall_xs = list(range(room - 1, size - 1, room))
    wall_ys = list(range(room - 1, size - 1, room))
    for xw in wall_xs:
        cells[:, xw] = False
    for yw in wall_ys:
        cells[yw, :] = False
    # One door per wall segment between crossings (or grid edges).
    y_bounds = [-1] + wall_ys + [size]
    x_bounds = [-1] + wall_xs + [size]
    for xw in wall_xs:
        for lo, hi in zip(y_bounds[:-1], y_bounds[1:]):
            span = [y for y in range(lo + 1, hi) if y < size]
            if span:
                cells[span[int(rng.integers(0, len(span)))], xw] = True
    for yw in wall_ys:
        for lo, hi in zip(x_bounds[:-1], x_bounds[1:]):
            span = [x for x in range(lo + 1, hi) if x < size]
            if span:
                cells[yw, span[int(rng.integers(0, len(span)))]] = True
    return cells


def _grid_maze(size, rng):
    cells = np.zeros((size, size), dtype=bool)
    lattice = (size - 1) // 2  # passable lattice nodes sit at odd coordinates
    if lattice < 1:
        return np.ones((size, size), dtype=bool)
    braid = float(rng.choice([0.0, 0.2, 0.4]))  # extra knocked walls add loops
    visited = np.zeros((lattice, lattice), dtype=bool)
    stack = [(0, 0)]
    visited[0, 0] = True
    cells[1, 1] = True
    while stack:
        cy, cx = stack[-1]
        nbrs = [(cy + dy, cx + dx) for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1))
                if 0 <= cy + dy < lattice and 0 <= cx + dx < lattice and not visited[cy + dy, cx + dx]]
        if not nbrs:
            stack.pop()
            continue
        ny, nx = nbrs[int(rng.integers(0, len(nbrs)))]
        visited[ny, nx] = True
        cells[2 * ny + 1, 2 * nx + 1] = True
        cells[cy + ny + 1, cx + nx + 1] = True  # knock the wall between
        stack.append((ny, nx))
    if braid > 0:
        for y in range(1, size - 1):
            for x in range(1, size - 1):
                if not cells[y, x] and rng.random() < braid:
                    if (cells[y, x - 1] and cells[y, x + 1]) or (cells[y - 1, x] and cells[y + 1, x]):
                        cells[y, x] = True
    return cells


def _grid_city(size, rng):
    block = int(rng.choice([6, 8, 10]))
    street = int(rng.choice([2, 3]))
    phase = int(rng.integers(0, block))
    ys, xs = np.mgrid[0:size, 0:size]
    cells = (((xs + phase) % block) < street) | (((ys + phase) % block) < street)
    cells |= rng.random((size, size)) < 0.04  # occasional open lots
    return cells


def _grid_game(size, rng):
    fill = rng.uniform(0.34, 0.42)
    blocked = rng.random((size, size)) < fill
    for _ in range(4):
        padded = np.pad(blocked, 1, constant_values=True)
        count = sum(padded[1 + dy:size + 1 + dy, 1 + dx:size + 1 + dx].astype(int)
                    for dy in (-1, 0, 1) for dx in (-1, 0, 1))
        blocked = count >= 5
    return ~blocked


_GENERATORS = {
    "empty": _grid_empty,
    "random": _grid_random,
    "warehouse": _grid_warehouse,
    "game": _grid_game,
    "city": _grid_city,
    "maze": _grid_maze,
    "room": _grid_room,
}


def _largest_component_cells(grid: GridMap) -> np.ndarray:
    graph = cell_graph(grid)
    if graph.num_nodes == 0:
        return np.zeros(0, dtype=np.int64)
    sizes = np.bincount(graph.component_labels)
    return graph.node_cells[graph.component_labels == int(np.argmax(sizes))]


def make_grid(grid_type: str, size: int, rng: np.random.Generator, name: str,
              min_component: int = 0) -> GridMap:
    """One synthetic grid of the given archetype; retries (deterministically)
    until the largest component can host ``min_component`` cells."""
    if grid_type not in _GENERATORS:
        raise DataError(f"unknown grid type {grid_type!r}; expected one of {sorted(_GENERATORS)}")
    for _ in range(20):
        grid = GridMap.from_passable(_GENERATORS[grid_type](size, rng), name=name)
        if _largest_component_cells(grid).size >= max(min_component, 2):
            return grid
    raise DataError(f"could not generate a usable {grid_type!r} grid of size {size}")


def make_scenario(grid: GridMap, n_pairs: int, rng: np.random.Generator) -> list[ScenarioEntry]:
    """Random start/goal pairs inside the largest component, with pairwise
    distinct starts and pairwise distinct goals, bucketed by path length."""
    component = _largest_component_cells(grid)
    if component.size < 2 * n_pairs:
        raise DataError(f"grid {grid.name!r}: component of {component.size} cells "
                        f"cannot host {n_pairs} start/goal pairs")
    starts = rng.choice(component, size=n_pairs, replace=False)
    goals = rng.choice(component, size=n_pairs, replace=False)
    lengths = [shortest_path(grid, int(s), int(t)).length for s, t in zip(starts, goals)]
    order = np.argsort(np.array(lengths), kind="stable")
    entries = []
    for bucket_rank, i in enumerate(order):
        entries.append(ScenarioEntry(
            bucket=bucket_rank // 10, map_name=f"{grid.name}.map",
            map_width=grid.width, map_height=grid.height,
            start=grid.cell_xy(int(starts[i])), goal=grid.cell_xy(int(goals[i])),
            optimal_length=float(lengths[i])))
    return entries


def _synth_runtimes(label: int, rng: np.random.Generator, n_solvers: int,
                    noise: float) -> tuple[dict, int]:
    """Per-solver (runtime, solved) with the labeled solver strictly fastest.
    With probability ``noise`` the fastest role moves to a random other
    solver. Returns the runtime map and the effective label."""
    if noise > 0 and rng.random() < noise:
        label = int((label + 1 + rng.integers(0, n_solvers - 1)) % n_solvers)
    fastest = float(rng.uniform(0.05, 1.0))
    runs = {}
    for c in range(n_solvers):
        if c == label:
            runs[c] = (fastest, True)
        else:
            rt = fastest + float(rng.uniform(0.5, 2.5))
            runs[c] = ((RUNTIME_CAP_MIN, False) if rt >= RUNTIME_CAP_MIN else (rt, True))
    return runs, label


def generate_benchmark(config: SynthConfig, out_dir) -> dict:
    """Write maps/, scens/, results.csv and taxonomy.json under ``out_dir``.

    Returns a summary with instance counts and the planted-label histogram.
    """
    out = Path(out_dir)
    (out / "maps").mkdir(parents=True, exist_ok=True)
    (out / "scens").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    max_agents = max(config.agent_counts)
    portfolio = DEFAULT_PORTFOLIO

    taxonomy = {}
    records = []
    label_counts = np.zeros(len(portfolio), dtype=int)
    for grid_type in config.types:
        for g in range(config.grids_per_type):
            name = f"{grid_type}-{config.size}-{g}"
            grid = make_grid(grid_type, config.size, rng, name, min_component=2 * max_agents)
            taxonomy[name] = grid_type
            (out / "maps" / f"{name}.map").write_bytes(serialize_map(grid))

            graph = cell_graph(grid)
            corridor = float((graph.degrees <= 2).mean())
            passable = graph.num_nodes
            for s in range(config.scens_per_grid):
                scen_name = f"{name}-even-{s + 1}"
                entries = make_scenario(grid, max_agents, rng)
                (out / "scens" / f"{scen_name}.scen").write_bytes(serialize_scen(entries))

                # Prefix stats mirror the feature extractor exactly: the
                # instance over k agents uses the first k scenario pairs.
                lengths = np.array([e.optimal_length for e in entries])
                manhattan = np.array([abs(e.start[0] - e.goal[0]) + abs(e.start[1] - e.goal[1])
                                      for e in entries], dtype=float)
                detour = np.divide(lengths, manhattan, out=np.ones_like(lengths),
                                   where=manhattan > 0)
                for k in config.agent_counts:
                    stats_label = planted_label(k / passable, corridor, float(detour[:k].mean()))
                    runs, label = _synth_runtimes(stats_label, rng, len(portfolio), config.noise)
                    label_counts[label] += 1
                    records.append(RuntimeRecord(
                        grid_name=name, scenario_name=scen_name, num_agents=k,
                        solver_runtimes={portfolio[c]: runs[c] for c in range(len(portfolio))}))

    (out / "results.csv").write_bytes(serialize_results(records, portfolio))
    with open(out / "taxonomy.json", "w", encoding="utf-8") as fh:
        json.dump(taxonomy, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "out_dir": str(out),
        "num_grids": len(taxonomy),
        "num_instances": len(records),
        "label_histogram": label_counts.tolist(),
        "portfolio": list(portfolio),
    }

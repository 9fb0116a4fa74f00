"""Shared test helpers: independent oracles and random-input builders.

The oracles here deliberately avoid the package's own code paths: the BFS
oracle is a plain deque traversal, the distance oracle is heap-based
Dijkstra, and the embedding oracle works on dense matrix powers with loop
arithmetic. Production code is then checked against them.
"""

from collections import deque
from heapq import heappop, heappush

import numpy as np
import pytest

from mapfsel.benchmark import GridMap


def grid_from_rows(rows, name="test"):
    return GridMap(width=len(rows[0]), height=len(rows), raw_rows=tuple(rows), name=name)


def naive_bfs_path(grid, source, target):
    """Reference FIFO BFS with Up/Left/Right/Down expansion and
    first-discovered parents. Returns the cell tuple or None."""
    w, h = grid.width, grid.height
    passable = grid.cells.ravel()
    if source == target:
        return (source,)
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        x, y = u % w, u // w
        for nb in (u - w if y > 0 else -1, u - 1 if x > 0 else -1,
                   u + 1 if x < w - 1 else -1, u + w if y < h - 1 else -1):
            if nb >= 0 and passable[nb] and nb not in parent:
                parent[nb] = u
                queue.append(nb)
    if target not in parent:
        return None
    cells = [target]
    while parent[cells[-1]] is not None:
        cells.append(parent[cells[-1]])
    return tuple(reversed(cells))


def dijkstra_distance(grid, source, target):
    """Heap-based Dijkstra over unit edge weights. Returns moves or None."""
    w, h = grid.width, grid.height
    passable = grid.cells.ravel()
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, u = heappop(heap)
        if u == target:
            return d
        if d > dist.get(u, np.inf):
            continue
        x, y = u % w, u // w
        for nb in (u - w if y > 0 else -1, u + w if y < h - 1 else -1,
                   u - 1 if x > 0 else -1, u + 1 if x < w - 1 else -1):
            if nb >= 0 and passable[nb] and d + 1 < dist.get(nb, np.inf):
                dist[nb] = d + 1
                heappush(heap, (d + 1, nb))
    return None


def dense_feather_node_matrix(graph, config):
    """Dense brute-force embedding oracle: explicit D^-1 A powers, triangle
    counting by triple loop, per-entry sums."""
    n = graph.num_nodes
    adj = np.zeros((n, n))
    for u, v in graph.edges:
        adj[u, v] = adj[v, u] = 1.0
    deg = adj.sum(axis=1)
    walk = np.zeros((n, n))
    for i in range(n):
        if deg[i] > 0:
            walk[i] = adj[i] / deg[i]

    attrs = np.zeros((n, len(config.attributes)))
    for col, kind in enumerate(config.attributes):
        if kind == "log_degree":
            attrs[:, col] = np.log(1.0 + deg)
        else:
            for v in range(n):
                d = int(deg[v])
                if d < 2:
                    continue
                nbrs = [u for u in range(n) if adj[v, u]]
                triangles = sum(1 for i in range(d) for j in range(i + 1, d)
                                if adj[nbrs[i], nbrs[j]])
                attrs[v, col] = triangles / (d * (d - 1) / 2)

    points = config.eval_points
    thetas = [(j + 1) * config.theta_max / points for j in range(points)]
    out = np.zeros((n, config.dimension))
    for a in range(len(config.attributes)):
        for r in range(1, config.order + 1):
            walk_r = np.linalg.matrix_power(walk, r)
            for j, theta in enumerate(thetas):
                base = (a * config.order + (r - 1)) * points * 2 + j * 2
                out[:, base] = walk_r @ np.cos(theta * attrs[:, a])
                out[:, base + 1] = walk_r @ np.sin(theta * attrs[:, a])
    return out


def random_grid(rng, max_side=16, open_prob=0.75):
    w = int(rng.integers(1, max_side + 1))
    h = int(rng.integers(1, max_side + 1))
    return GridMap.from_passable(rng.random((h, w)) < open_prob, name="rand")


def random_connected_instance(rng, max_side=16, max_agents=8, open_prob=0.75):
    """Random grid plus agents sampled inside its largest component (by a
    flood fill independent of the package's component code). May return
    None when the grid is too small."""
    from mapfsel.instance import MapfInstance

    grid = random_grid(rng, max_side, open_prob)
    w, h = grid.width, grid.height
    passable = grid.cells.ravel()
    seen = np.zeros(w * h, dtype=bool)
    best: list[int] = []
    for start in np.flatnonzero(passable):
        if seen[start]:
            continue
        comp = [int(start)]
        seen[start] = True
        queue = deque([int(start)])
        while queue:
            u = queue.popleft()
            x, y = u % w, u // w
            for nb in (u - w if y > 0 else -1, u - 1 if x > 0 else -1,
                       u + 1 if x < w - 1 else -1, u + w if y < h - 1 else -1):
                if nb >= 0 and passable[nb] and not seen[nb]:
                    seen[nb] = True
                    comp.append(nb)
                    queue.append(nb)
        if len(comp) > len(best):
            best = comp
    if len(best) < 2:
        return None
    k = int(rng.integers(1, min(max_agents, len(best) // 2) + 1))
    cells = np.array(best)
    sources = rng.choice(cells, size=k, replace=False)
    targets = rng.choice(cells, size=k, replace=False)
    return MapfInstance(grid=grid, sources=tuple(int(c) for c in sources),
                        targets=tuple(int(c) for c in targets))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

"""Feature composition, block selection, on-disk caching, batch extraction.

The full feature vector of an instance concatenates three blocks in fixed
order: the 20 hand-crafted features, the pooled embedding of the
path-subgraph encoding, and the pooled embedding of the full-graph encoding
(20 + 500 + 500 = 1020 under default embedding settings).

The canonical feature-matrix file is a CSV with header
``grid,scenario,num_agents,f0..f{D-1}``. Floats are written with ``repr``,
so a read-back reproduces the exact same doubles.
"""

from __future__ import annotations

import csv
import hashlib
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from .embedding import FeatherConfig, embed_graph
from .encodings import encode_full_graph, encode_path_subgraph
from .errors import DataError, ValidationError
from .handcrafted import FEATURE_NAMES, handcrafted_features
from .instance import MapfInstance

N_HANDCRAFTED = len(FEATURE_NAMES)


class InstanceKey(NamedTuple):
    grid: str
    scenario: str
    num_agents: int


@dataclass(frozen=True)
class FeatureSubset:
    """Mask over the three feature blocks; at least one must be enabled."""

    handcrafted: bool = True
    path: bool = True
    full: bool = True

    def __post_init__(self):
        if not (self.handcrafted or self.path or self.full):
            raise ValidationError("FeatureSubset must enable at least one block")

    @property
    def label(self) -> str:
        if self.handcrafted and self.path and self.full:
            return "all"
        parts = [name for name, on in (("handcrafted", self.handcrafted),
                                       ("path", self.path), ("full", self.full)) if on]
        return "+".join(parts)

    def column_indices(self, config: FeatherConfig = FeatherConfig()) -> np.ndarray:
        d = config.dimension
        spans = [(0, N_HANDCRAFTED, self.handcrafted),
                 (N_HANDCRAFTED, N_HANDCRAFTED + d, self.path),
                 (N_HANDCRAFTED + d, N_HANDCRAFTED + 2 * d, self.full)]
        return np.concatenate([np.arange(lo, hi) for lo, hi, on in spans if on])


ABLATION_SUBSETS = (
    FeatureSubset(True, False, False),
    FeatureSubset(False, True, False),
    FeatureSubset(False, False, True),
    FeatureSubset(False, True, True),
    FeatureSubset(True, True, False),
    FeatureSubset(True, False, True),
    FeatureSubset(True, True, True),
)


def feature_dimension(config: FeatherConfig = FeatherConfig()) -> int:
    return N_HANDCRAFTED + 2 * config.dimension


def feature_names(config: FeatherConfig = FeatherConfig()) -> list[str]:
    """Descriptive per-column names aligned with the full vector layout."""
    return (list(FEATURE_NAMES)
            + [f"path_emb_{i}" for i in range(config.dimension)]
            + [f"full_emb_{i}" for i in range(config.dimension)])


def extract_features(instance: MapfInstance, config: FeatherConfig = FeatherConfig()) -> np.ndarray:
    """Full feature vector: handcrafted block, then both graph embeddings."""
    hc = handcrafted_features(instance)
    path_emb = embed_graph(encode_path_subgraph(instance), config).values
    full_emb = embed_graph(encode_full_graph(instance), config).values
    return np.concatenate([hc, path_emb, full_emb])


def select_blocks(values: np.ndarray, subset: FeatureSubset,
                  config: FeatherConfig = FeatherConfig()) -> np.ndarray:
    """Keep the enabled blocks of a feature vector or matrix (rows kept)."""
    values = np.asarray(values)
    expected = feature_dimension(config)
    if values.shape[-1] != expected:
        raise ValidationError(f"feature dimension {values.shape[-1]} != expected {expected}")
    return values[..., subset.column_indices(config)]


def write_feature_csv(path, keys: Sequence[InstanceKey], matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["grid", "scenario", "num_agents"] + [f"f{i}" for i in range(matrix.shape[1])])
        for key, row in zip(keys, matrix):
            writer.writerow([key.grid, key.scenario, key.num_agents] + [repr(float(v)) for v in row])
    os.replace(tmp, path)


def read_feature_csv(path) -> tuple[list[InstanceKey], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty feature file") from None
        if header[:3] != ["grid", "scenario", "num_agents"] or \
                any(h != f"f{i}" for i, h in enumerate(header[3:])):
            raise DataError(f"{path}: malformed feature header")
        width = len(header) - 3
        keys, rows = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != width + 3:
                raise DataError(f"{path}: row with {len(row)} columns, expected {width + 3}")
            keys.append(InstanceKey(row[0], row[1], int(row[2])))
            rows.append([float(v) for v in row[3:]])
    matrix = np.array(rows, dtype=float) if rows else np.zeros((0, width))
    return keys, matrix


_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


class FeatureCache:
    """On-disk per-instance feature store keyed by instance key and
    embedding-config fingerprint. Writes go through a temp file and an
    atomic replace, so concurrent processes sharing a directory are safe."""

    def __init__(self, root):
        self.root = Path(root)

    def _entry(self, key: InstanceKey, fingerprint: str) -> Path:
        raw = f"{key.grid}\x00{key.scenario}\x00{key.num_agents}"
        digest = hashlib.sha1(raw.encode("utf-8")).hexdigest()[:12]
        stem = _SAFE.sub("_", f"{key.grid}__{key.scenario}__{key.num_agents}")[:120]
        return self.root / fingerprint / f"{stem}__{digest}.csv"

    def get(self, key: InstanceKey, fingerprint: str) -> np.ndarray | None:
        entry = self._entry(key, fingerprint)
        if not entry.exists():
            return None
        keys, matrix = read_feature_csv(entry)
        if len(keys) != 1 or keys[0] != key:
            raise DataError(f"cache entry {entry} does not match key {key}")
        return matrix[0]

    def put(self, key: InstanceKey, fingerprint: str, values: np.ndarray) -> None:
        entry = self._entry(key, fingerprint)
        entry.parent.mkdir(parents=True, exist_ok=True)
        write_feature_csv(entry, [key], np.asarray(values)[None, :])


def extract_batch(items: Sequence[tuple[InstanceKey, MapfInstance]],
                  config: FeatherConfig = FeatherConfig(),
                  cache: FeatureCache | None = None,
                  n_jobs: int = 1,
                  log=None) -> np.ndarray:
    """Extract features for many instances, in input order.

    Cache hits are returned as stored; misses are computed (optionally in
    parallel worker processes) and written back by this process only.
    """
    fingerprint = config.fingerprint()
    dim = feature_dimension(config)
    out = np.empty((len(items), dim))
    missing = []
    for i, (key, _) in enumerate(items):
        hit = cache.get(key, fingerprint) if cache is not None else None
        if hit is not None:
            if hit.shape != (dim,):
                raise DataError(f"cache entry for {key} has dimension {hit.shape[0]}, expected {dim}")
            out[i] = hit
        else:
            missing.append(i)
    if log:
        log(f"feature extraction: {len(items) - len(missing)} cached, {len(missing)} to compute")
    if missing:
        if n_jobs == 1:
            computed = [extract_features(items[i][1], config) for i in missing]
        else:
            computed = Parallel(n_jobs=n_jobs)(
                delayed(extract_features)(items[i][1], config) for i in missing)
        for i, values in zip(missing, computed):
            out[i] = values
            if cache is not None:
                cache.put(items[i][0], fingerprint, values)
    return out


class MapfFeaturizer(TransformerMixin, BaseEstimator):
    """Transformer from a sequence of :class:`MapfInstance` to the feature
    matrix (one 1020-entry row per instance under default settings)."""

    def __init__(self, order: int = 5, eval_points: int = 25, theta_max: float = 2.5,
                 pooling: str = "max"):
        self.order = order
        self.eval_points = eval_points
        self.theta_max = theta_max
        self.pooling = pooling

    def _config(self) -> FeatherConfig:
        return FeatherConfig(order=self.order, eval_points=self.eval_points,
                             theta_max=self.theta_max, pooling=self.pooling)

    def fit(self, X=None, y=None):
        self.config_ = self._config()
        return self

    def transform(self, X) -> np.ndarray:
        config = self._config()
        if not len(X):
            return np.zeros((0, feature_dimension(config)))
        return np.vstack([extract_features(inst, config) for inst in X])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(feature_names(self._config()), dtype=object)

"""Multi-class gradient-boosted decision trees with a softmax objective.

Each boosting round fits one regression tree per class to the softmax
gradients g = p - 1[y = c] and hessians h = p (1 - p), using exact greedy
split search. Split gain and leaf values follow the second-order objective:

    gain = 1/2 * (GL^2 / (HL + lambda) + GR^2 / (HR + lambda) - G^2 / (H + lambda))
    leaf = -learning_rate * G / (H + lambda)

Training sets here are a few thousand rows by ~1000 columns, where exact
search is tractable and leaves nothing to tune. Everything is deterministic
given ``random_state``: row/column subsampling uses a seeded generator and
all tie-breaks are fixed.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import DataError, ValidationError
from ._validation import check_feature_matrix, check_labels

MODEL_FORMAT = "mapfsel-gbdt-v1"

# Tuning grid used when the caller does not supply one.
DEFAULT_GRID = {
    "max_depth": [3, 6],
    "n_rounds": [100, 300],
    "learning_rate": [0.1, 0.3],
    "l2_lambda": [1.0],
    "subsample": [0.8, 1.0],
}


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_gradients(scores: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class first/second derivatives of multiclass log-loss wrt scores."""
    p = softmax(scores)
    g = p.copy()
    g[np.arange(len(y)), y] -= 1.0
    h = p * (1.0 - p)
    return g, h


def multiclass_logloss(scores: np.ndarray, y: np.ndarray) -> float:
    p = softmax(scores)
    return float(-np.mean(np.log(np.clip(p[np.arange(len(y)), y], 1e-300, None))))


@dataclass
class _Tree:
    """One regression tree as flat arrays; ``feature`` is -1 at leaves."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            f = feat[rows]
            go_left = X[rows, f] < self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        return self.value[node]


class _TreeBuilder:
    """Exact greedy split search over column chunks.

    ``presort`` (argsort of every column, computed once per fit) serves two
    roles: nodes containing all rows reuse it directly instead of re-sorting,
    and the chunking keeps temporaries small enough for the allocator to
    recycle. Split ties go to the smallest split position, then the smaller
    feature index, which is fixed and reproducible.
    """

    CHUNK = 256

    def __init__(self, max_depth, learning_rate, l2_lambda, min_child_weight, presort):
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.min_child_weight = min_child_weight
        self.presort = presort
        self.nodes: list[list] = []  # [feature, threshold, left, right, value, gain]

    def build(self, X, g, h, rows, features) -> _Tree:
        self.nodes = []
        self._grow(X, g, h, rows, features, depth=0)
        cols = list(zip(*self.nodes))
        return _Tree(feature=np.array(cols[0], dtype=np.int64),
                     threshold=np.array(cols[1], dtype=float),
                     left=np.array(cols[2], dtype=np.int64),
                     right=np.array(cols[3], dtype=np.int64),
                     value=np.array(cols[4], dtype=float),
                     gain=np.array(cols[5], dtype=float))

    def _leaf(self, G, H) -> int:
        denom = H + self.l2_lambda
        value = -self.learning_rate * G / denom if denom > 0 else 0.0
        self.nodes.append([-1, 0.0, -1, -1, value, 0.0])
        return len(self.nodes) - 1

    def _best_split(self, X, g, h, rows, features, G, H):
        """Scan all candidate features chunk-wise; return the best
        (gain, feature, threshold) with gain -inf when nothing is valid."""
        full_node = rows.size == X.shape[0]
        g_node = g if full_node else g[rows]
        h_node = h if full_node else h[rows]
        lam = self.l2_lambda
        best = (-np.inf, -1, 0.0)
        for lo in range(0, features.size, self.CHUNK):
            chunk = features[lo:lo + self.CHUNK]
            if full_node:
                order = self.presort[:, chunk]
                Xs = X[order, chunk[None, :]]
                gs = g_node[order]
                hs = h_node[order]
            else:
                Xn = X[np.ix_(rows, chunk)]
                order = np.argsort(Xn, axis=0, kind="stable")
                Xs = np.take_along_axis(Xn, order, axis=0)
                gs = g_node[order]
                hs = h_node[order]
            GL = np.cumsum(gs, axis=0)[:-1]
            HL = np.cumsum(hs, axis=0)[:-1]
            GR = G - GL
            HR = H - HL
            with np.errstate(divide="ignore", invalid="ignore"):
                gain = 0.5 * (GL ** 2 / (HL + lam) + GR ** 2 / (HR + lam) - G ** 2 / (H + lam))
            valid = ((Xs[1:] > Xs[:-1])
                     & (HL >= self.min_child_weight)
                     & (HR >= self.min_child_weight)
                     & np.isfinite(gain))
            gain[~valid] = -np.inf
            flat = int(np.argmax(gain))  # ties: smallest split position, then feature
            chunk_gain = float(gain.ravel()[flat])
            if chunk_gain > best[0]:
                pos, fidx = np.unravel_index(flat, gain.shape)
                a, b = float(Xs[pos, fidx]), float(Xs[pos + 1, fidx])
                thr = (a + b) / 2.0
                if not a < thr:  # midpoint rounded down to a; nudge so a routes left
                    thr = b
                best = (chunk_gain, int(chunk[fidx]), thr)
        return best

    def _grow(self, X, g, h, rows, features, depth) -> int:
        G = float(g[rows].sum())
        H = float(h[rows].sum())
        if depth >= self.max_depth or rows.size < 2:
            return self._leaf(G, H)
        gain, feature, thr = self._best_split(X, g, h, rows, features, G, H)
        if not gain > 0.0:
            return self._leaf(G, H)
        go_left = X[rows, feature] < thr
        node_id = len(self.nodes)
        self.nodes.append([feature, thr, -1, -1, 0.0, gain])
        left_id = self._grow(X, g, h, rows[go_left], features, depth + 1)
        right_id = self._grow(X, g, h, rows[~go_left], features, depth + 1)
        self.nodes[node_id][2] = left_id
        self.nodes[node_id][3] = right_id
        return node_id


class GradientBoostedClassifier(ClassifierMixin, BaseEstimator):
    """Gradient-boosted tree classifier (softmax objective, exact splits).

    Parameters mirror the usual boosted-tree knobs. ``n_classes`` may be
    given explicitly when the label space is wider than the classes present
    in the training data (e.g. a fixed solver portfolio); otherwise it is
    inferred as ``max(y) + 1``.
    """

    def __init__(self, n_rounds: int = 100, max_depth: int = 3, learning_rate: float = 0.1,
                 l2_lambda: float = 1.0, min_child_weight: float = 1.0,
                 subsample: float = 1.0, colsample: float = 1.0,
                 n_classes: int | None = None, random_state: int = 0):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.min_child_weight = min_child_weight
        self.subsample = subsample
        self.colsample = colsample
        self.n_classes = n_classes
        self.random_state = random_state

    def _check_params(self):
        if self.n_rounds < 0 or self.max_depth < 1:
            raise ValidationError("n_rounds must be >= 0 and max_depth >= 1")
        if not (0 < self.subsample <= 1 and 0 < self.colsample <= 1):
            raise ValidationError("subsample and colsample must be in (0, 1]")
        if self.l2_lambda < 0 or self.min_child_weight < 0:
            raise ValidationError("l2_lambda and min_child_weight must be >= 0")

    def fit(self, X, y, feature_names=None, class_names=None):
        self._check_params()
        X = check_feature_matrix(X)
        n_classes = self.n_classes
        y = check_labels(y, n_classes=n_classes, n_rows=X.shape[0])
        if X.shape[0] < 1:
            raise DataError("cannot train on an empty dataset")
        if n_classes is None:
            n_classes = int(y.max()) + 1

        n, d = X.shape
        counts = np.bincount(y, minlength=n_classes).astype(float)
        # Log prior; absent classes get a half-count floor to stay finite.
        priors = np.where(counts > 0, counts, 0.5) / n
        base = np.log(priors)

        # Column-major storage and a one-time per-column sort: every tree's
        # full-row nodes reuse this order instead of re-sorting.
        X = np.asfortranarray(X)
        presort = np.argsort(X, axis=0, kind="stable")

        rng = np.random.default_rng(self.random_state)
        scores = np.tile(base, (n, 1))
        trees: list[list[_Tree]] = []
        builder = _TreeBuilder(self.max_depth, self.learning_rate,
                               self.l2_lambda, self.min_child_weight, presort)
        n_rows = max(1, int(round(self.subsample * n)))
        n_cols = max(1, int(round(self.colsample * d)))
        all_rows = np.arange(n)
        all_cols = np.arange(d)
        for _ in range(self.n_rounds):
            g, h = softmax_gradients(scores, y)
            round_trees = []
            for c in range(n_classes):
                rows = all_rows if n_rows == n else np.sort(rng.choice(n, n_rows, replace=False))
                cols = all_cols if n_cols == d else np.sort(rng.choice(d, n_cols, replace=False))
                tree = builder.build(X, g[:, c], h[:, c], rows, cols)
                scores[:, c] += tree.predict(X)
                round_trees.append(tree)
            trees.append(round_trees)

        self.n_classes_ = n_classes
        self.classes_ = np.arange(n_classes)
        self.n_features_in_ = d
        self.base_score_ = base
        self.trees_ = trees
        self.feature_names_ = list(feature_names) if feature_names is not None else None
        self.class_names_ = list(class_names) if class_names is not None else None
        return self

    def _raw_scores(self, X: np.ndarray) -> np.ndarray:
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"feature dimension {X.shape[1]} != model dimension {self.n_features_in_}")
        scores = np.tile(self.base_score_, (X.shape[0], 1))
        for round_trees in self.trees_:
            for c, tree in enumerate(round_trees):
                scores[:, c] += tree.predict(X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self._raw_scores(X))

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum: ties go to the lowest class index
        return np.argmax(self._raw_scores(X), axis=1)

    @property
    def feature_importances_(self) -> np.ndarray:
        """Total split gain per feature over all trees (unnormalized)."""
        imp = np.zeros(self.n_features_in_)
        for round_trees in self.trees_:
            for tree in round_trees:
                internal = tree.feature >= 0
                np.add.at(imp, tree.feature[internal], tree.gain[internal])
        return imp

    # -- serialization ----------------------------------------------------

    def _tree_to_record(self, tree: _Tree, node: int = 0):
        if tree.feature[node] < 0:
            return {"leaf": float(tree.value[node])}
        return {
            "feature": int(tree.feature[node]),
            "threshold": float(tree.threshold[node]),
            "gain": float(tree.gain[node]),
            "left": self._tree_to_record(tree, int(tree.left[node])),
            "right": self._tree_to_record(tree, int(tree.right[node])),
        }

    @staticmethod
    def _tree_from_record(record) -> _Tree:
        nodes: list[list] = []

        def walk(rec) -> int:
            nid = len(nodes)
            if "leaf" in rec:
                nodes.append([-1, 0.0, -1, -1, float(rec["leaf"]), 0.0])
                return nid
            nodes.append([int(rec["feature"]), float(rec["threshold"]), -1, -1, 0.0,
                          float(rec.get("gain", 0.0))])
            nodes[nid][2] = walk(rec["left"])
            nodes[nid][3] = walk(rec["right"])
            return nid

        walk(record)
        cols = list(zip(*nodes))
        return _Tree(feature=np.array(cols[0], dtype=np.int64),
                     threshold=np.array(cols[1], dtype=float),
                     left=np.array(cols[2], dtype=np.int64),
                     right=np.array(cols[3], dtype=np.int64),
                     value=np.array(cols[4], dtype=float),
                     gain=np.array(cols[5], dtype=float))

    def to_json(self) -> str:
        payload = {
            "format": MODEL_FORMAT,
            "hyperparams": {
                "n_rounds": self.n_rounds, "max_depth": self.max_depth,
                "learning_rate": self.learning_rate, "l2_lambda": self.l2_lambda,
                "min_child_weight": self.min_child_weight,
                "subsample": self.subsample, "colsample": self.colsample,
                "random_state": self.random_state,
            },
            "n_classes": self.n_classes_,
            "n_features": self.n_features_in_,
            "base_score": [float(v) for v in self.base_score_],
            "class_names": self.class_names_,
            "feature_names": self.feature_names_,
            "trees": [[self._tree_to_record(t) for t in round_trees]
                      for round_trees in self.trees_],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json(cls, text: str) -> "GradientBoostedClassifier":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"model file is not valid JSON: {exc}") from exc
        if payload.get("format") != MODEL_FORMAT:
            raise DataError(f"unsupported model format {payload.get('format')!r}")
        model = cls(**payload["hyperparams"], n_classes=payload["n_classes"])
        model.n_classes_ = int(payload["n_classes"])
        model.classes_ = np.arange(model.n_classes_)
        model.n_features_in_ = int(payload["n_features"])
        model.base_score_ = np.array(payload["base_score"], dtype=float)
        model.class_names_ = payload.get("class_names")
        model.feature_names_ = payload.get("feature_names")
        model.trees_ = [[cls._tree_from_record(rec) for rec in round_trees]
                        for round_trees in payload["trees"]]
        return model

    @classmethod
    def load(cls, path) -> "GradientBoostedClassifier":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise DataError(f"cannot read model file {path}: {exc}") from exc


def importance_report(model: GradientBoostedClassifier) -> list[tuple[str, float]]:
    """(name, total split gain) per feature, aligned with the training layout."""
    imp = model.feature_importances_
    names = model.feature_names_ or [f"f{i}" for i in range(len(imp))]
    return list(zip(names, imp.tolist()))


def expand_grid(grid) -> list[dict]:
    """A dict of lists becomes its cartesian product (insertion-order keys);
    a list of dicts is taken as-is."""
    if isinstance(grid, dict):
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    return [dict(point) for point in grid]


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified fold assignment. Falls back to a plain
    shuffled split (with a warning) when some class is rarer than ``folds``."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    counts = np.bincount(y)
    if counts[counts > 0].min() < folds:
        warnings.warn("a class has fewer examples than folds; "
                      "falling back to a non-stratified split", stacklevel=2)
        perm = rng.permutation(len(y))
        return [np.sort(chunk) for chunk in np.array_split(perm, folds)]
    parts: list[list[np.ndarray]] = [[] for _ in range(folds)]
    for c in np.flatnonzero(counts):
        idx = rng.permutation(np.flatnonzero(y == c))
        for f, chunk in enumerate(np.array_split(idx, folds)):
            parts[f].append(chunk)
    return [np.sort(np.concatenate(p)) for p in parts]


def tune_hyperparameters(X, y, grid=None, folds: int = 4, seed: int = 0,
                         n_classes: int | None = None,
                         log=None) -> tuple[dict, list[dict]]:
    """Cross-validated grid search maximizing mean fold accuracy.

    Ties are broken toward fewer boosting rounds, then shallower trees,
    then grid order. Returns the winning parameter dict and a table with
    one row per grid point (params, per-fold and mean accuracies).
    """
    X = check_feature_matrix(X)
    y = check_labels(y, n_classes=n_classes, n_rows=X.shape[0])
    if X.shape[0] < folds:
        raise DataError(f"need at least {folds} rows for {folds}-fold tuning, got {X.shape[0]}")
    points = expand_grid(DEFAULT_GRID if grid is None else grid)
    if not points:
        raise ValidationError("empty hyperparameter grid")
    fold_idx = stratified_folds(y, folds, seed)
    all_idx = np.arange(X.shape[0])

    table = []
    for i, point in enumerate(points):
        accs = []
        for test_idx in fold_idx:
            train_idx = np.setdiff1d(all_idx, test_idx)
            clf = GradientBoostedClassifier(**point, n_classes=n_classes, random_state=seed)
            clf.fit(X[train_idx], y[train_idx])
            accs.append(float((clf.predict(X[test_idx]) == y[test_idx]).mean()))
        row = {**point, "fold_accuracies": accs, "mean_accuracy": float(np.mean(accs))}
        table.append(row)
        if log:
            log(f"cv point {i + 1}/{len(points)}: {point} -> mean acc {row['mean_accuracy']:.4f}")

    def rank(i):
        row = table[i]
        return (-row["mean_accuracy"], row.get("n_rounds", 0), row.get("max_depth", 0), i)

    best = min(range(len(points)), key=rank)
    return dict(points[best]), table

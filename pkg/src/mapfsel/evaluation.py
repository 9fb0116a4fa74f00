"""Label derivation, train/test splits, and selector evaluation metrics.

Three split regimes of increasing difficulty are supported:

* ``in_grid``: train and test instances share grids, but no
  (scenario, agent-count) unit straddles the split.
* ``in_grid_type``: test grids never appear in training, but their grid
  type does.
* ``between_grid_type``: whole grid types are held out of training.

Metrics per selector: accuracy (picked the truly fastest solver), coverage
(picked solver finished within the cap), mean runtime of the picked solver,
and mean regret, the percentage runtime excess over the per-instance best
choice. Aggregation is either over all instances pooled ("all") or as an
unweighted mean of per-grid-type means ("avg").
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .benchmark import DEFAULT_PORTFOLIO, RUNTIME_CAP_MIN, RuntimeRecord
from .errors import DataError, ValidationError
from .pipeline import InstanceKey

GRID_TYPES = ("empty", "random", "warehouse", "game", "city", "maze", "room")

SPLIT_SETUPS = ("in_grid", "in_grid_type", "between_grid_type")

# Runtimes are floored here before regret's ratio so the metric stays total
# even for (synthetic) zero runtimes.
REGRET_FLOOR_MIN = 0.001


@dataclass(frozen=True)
class LabeledInstance:
    """Per-instance ground truth: capped per-solver runtimes, solved flags,
    and the fastest-solver label."""

    key: InstanceKey
    label: int
    runtimes: np.ndarray
    solved: np.ndarray
    oracle_runtime: float

    def __post_init__(self):
        rt = np.asarray(self.runtimes, dtype=float)
        sv = np.asarray(self.solved, dtype=bool)
        if rt.shape != sv.shape or rt.ndim != 1:
            raise ValidationError("runtimes and solved must be equal-length vectors")
        if (rt < 0).any() or (rt > RUNTIME_CAP_MIN).any():
            raise ValidationError("runtimes must lie in [0, cap]")
        rt.setflags(write=False)
        sv.setflags(write=False)
        object.__setattr__(self, "runtimes", rt)
        object.__setattr__(self, "solved", sv)


def derive_labels(records: Sequence[RuntimeRecord], portfolio=DEFAULT_PORTFOLIO,
                  feature_keys=None) -> list[LabeledInstance]:
    """Label each record with its fastest solver.

    The label is the argmin runtime among solvers that solved the instance;
    if none did, the argmin over capped runtimes. Ties go to the earlier
    solver in portfolio order. With ``feature_keys`` given, records lacking
    features are an error.
    """
    portfolio = tuple(portfolio)
    available = None if feature_keys is None else set(feature_keys)
    out = []
    for rec in records:
        key = InstanceKey(rec.grid_name, rec.scenario_name, rec.num_agents)
        if available is not None and key not in available:
            raise DataError(f"no extracted features for instance {key}")
        missing = [s for s in portfolio if s not in rec.solver_runtimes]
        if missing:
            raise DataError(f"record {key} missing solvers: {', '.join(missing)}")
        runtimes = np.array([rec.solver_runtimes[s][0] for s in portfolio])
        solved = np.array([rec.solver_runtimes[s][1] for s in portfolio])
        masked = np.where(solved, runtimes, np.inf)
        label = int(np.argmin(masked)) if solved.any() else int(np.argmin(runtimes))
        out.append(LabeledInstance(key=key, label=label, runtimes=runtimes, solved=solved,
                                   oracle_runtime=float(runtimes[label])))
    return out


@dataclass(frozen=True)
class SplitSpec:
    """How to partition labeled instances into train and test."""

    setup: str
    taxonomy: Mapping[str, str] = field(default_factory=dict)  # grid name -> type
    seed: int = 0
    test_fraction: float = 0.2
    test_types: tuple[str, ...] | None = None  # between_grid_type only

    def __post_init__(self):
        if self.setup not in SPLIT_SETUPS:
            raise ValidationError(f"setup must be one of {SPLIT_SETUPS}")
        if not 0 < self.test_fraction < 1:
            raise ValidationError("test_fraction must be in (0, 1)")


def _grid_type(spec: SplitSpec, grid: str) -> str:
    try:
        return spec.taxonomy[grid]
    except KeyError:
        raise DataError(f"grid {grid!r} missing from the grid-type taxonomy") from None


def _take_test(units: list, fraction: float, rng: np.random.Generator) -> set:
    """Sample a test subset leaving at least one unit on each side."""
    n_test = min(max(1, int(round(fraction * len(units)))), len(units) - 1)
    picked = rng.choice(len(units), size=n_test, replace=False)
    return {units[i] for i in picked}


def make_split(instances: Sequence[LabeledInstance], spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic, disjoint (train_idx, test_idx) under the given setup."""
    if not len(instances):
        raise DataError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    test_mask = np.zeros(len(instances), dtype=bool)

    if spec.setup == "in_grid":
        # Unit: (scenario, agent count) within each grid. Keeps instances
        # derived from the same scenario prefix on one side of the split.
        by_grid: dict[str, list] = {}
        for inst in instances:
            by_grid.setdefault(inst.key.grid, []).append((inst.key.scenario, inst.key.num_agents))
        test_units = set()
        for grid in sorted(by_grid):
            units = sorted(set(by_grid[grid]))
            if len(units) < 2:
                raise DataError(f"in_grid split needs >= 2 scenario/agent-count units on grid {grid!r}")
            test_units.update((grid,) + u for u in _take_test(units, spec.test_fraction, rng))
        for i, inst in enumerate(instances):
            test_mask[i] = (inst.key.grid, inst.key.scenario, inst.key.num_agents) in test_units

    elif spec.setup == "in_grid_type":
        by_type: dict[str, set] = {}
        for inst in instances:
            by_type.setdefault(_grid_type(spec, inst.key.grid), set()).add(inst.key.grid)
        test_grids = set()
        splittable = False
        for gtype in sorted(by_type):
            grids = sorted(by_type[gtype])
            if len(grids) < 2:
                warnings.warn(f"grid type {gtype!r} has a single grid; kept in training only",
                              stacklevel=2)
                continue
            splittable = True
            test_grids.update(_take_test(grids, spec.test_fraction, rng))
        if not splittable:
            raise DataError("in_grid_type split needs some type with >= 2 grids")
        for i, inst in enumerate(instances):
            test_mask[i] = inst.key.grid in test_grids

    else:  # between_grid_type
        types_present = sorted({_grid_type(spec, inst.key.grid) for inst in instances})
        if spec.test_types is not None:
            held_out = set(spec.test_types)
            unknown = held_out - set(types_present)
            if unknown:
                raise DataError(f"test types not present in the data: {sorted(unknown)}")
            if held_out == set(types_present):
                raise DataError("between_grid_type split would leave no training types")
        else:
            if len(types_present) < 2:
                raise DataError("between_grid_type split needs >= 2 grid types")
            held_out = _take_test(types_present, spec.test_fraction, rng)
        for i, inst in enumerate(instances):
            test_mask[i] = _grid_type(spec, inst.key.grid) in held_out

    train_idx = np.flatnonzero(~test_mask)
    test_idx = np.flatnonzero(test_mask)
    if train_idx.size == 0 or test_idx.size == 0:
        raise DataError(f"{spec.setup} split left an empty side "
                        f"(train {train_idx.size}, test {test_idx.size})")
    return train_idx, test_idx


# -- selection policies ---------------------------------------------------


class OraclePolicy:
    """Always picks the truly fastest solver."""

    name = "oracle"

    def select(self, instances: Sequence[LabeledInstance], features=None) -> np.ndarray:
        return np.array([inst.label for inst in instances], dtype=np.int64)


class ConstantPolicy:
    """Always picks one fixed solver."""

    def __init__(self, solver_index: int, name: str | None = None):
        self.solver_index = int(solver_index)
        self.name = name or f"always[{self.solver_index}]"

    def select(self, instances: Sequence[LabeledInstance], features=None) -> np.ndarray:
        return np.full(len(instances), self.solver_index, dtype=np.int64)


class ModelPolicy:
    """Delegates to a trained classifier over the feature matrix."""

    def __init__(self, model, name: str = "model"):
        self.model = model
        self.name = name

    def select(self, instances: Sequence[LabeledInstance], features=None) -> np.ndarray:
        if features is None:
            raise ValidationError("ModelPolicy needs the feature matrix")
        if len(features) != len(instances):
            raise ValidationError("features and instances are misaligned")
        return np.asarray(self.model.predict(features), dtype=np.int64)


def single_best_policy(train: Sequence[LabeledInstance],
                       portfolio=DEFAULT_PORTFOLIO) -> ConstantPolicy:
    """Constant policy choosing the solver with the lowest mean capped
    runtime on the training set."""
    if not len(train):
        raise DataError("cannot derive the single-best solver from an empty training set")
    mean_rt = np.vstack([inst.runtimes for inst in train]).mean(axis=0)
    idx = int(np.argmin(mean_rt))
    names = tuple(portfolio)
    label = names[idx] if idx < len(names) else str(idx)
    return ConstantPolicy(idx, name=f"single-best[{label}]")


# -- metrics ---------------------------------------------------------------


@dataclass(frozen=True)
class MethodMetrics:
    accuracy: float
    coverage: float
    runtime_min: float
    regret_pct: float
    n_instances: int

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "coverage": self.coverage,
                "runtime_min": self.runtime_min, "regret_pct": self.regret_pct,
                "n_instances": self.n_instances}


def _metrics_from_selection(instances: Sequence[LabeledInstance], chosen: np.ndarray) -> MethodMetrics:
    labels = np.array([inst.label for inst in instances])
    runtimes = np.vstack([inst.runtimes for inst in instances])
    solved = np.vstack([inst.solved for inst in instances])
    oracle = np.array([inst.oracle_runtime for inst in instances])
    rows = np.arange(len(instances))
    picked_rt = runtimes[rows, chosen]
    acc = float((chosen == labels).mean())
    cov = float(solved[rows, chosen].mean())
    rt = float(picked_rt.mean())
    alg = np.maximum(picked_rt, REGRET_FLOOR_MIN)
    orc = np.maximum(oracle, REGRET_FLOOR_MIN)
    regret = float((100.0 * (alg - orc) / orc).mean())
    return MethodMetrics(accuracy=acc, coverage=cov, runtime_min=rt,
                         regret_pct=regret, n_instances=len(instances))


def evaluate(policy, test: Sequence[LabeledInstance], features=None,
             taxonomy: Mapping[str, str] | None = None, mode: str = "all") -> MethodMetrics:
    """Evaluate one policy on a test set.

    ``mode='all'`` pools every instance; ``mode='avg'`` computes each metric
    per grid type and averages the per-type values unweighted (requires a
    taxonomy covering every test grid).
    """
    if not len(test):
        raise DataError("cannot evaluate on an empty test set")
    if mode not in ("all", "avg"):
        raise ValidationError("mode must be 'all' or 'avg'")
    chosen = policy.select(test, features)
    if mode == "all":
        return _metrics_from_selection(test, chosen)
    if taxonomy is None:
        raise ValidationError("mode='avg' needs a grid-type taxonomy")
    groups: dict[str, list[int]] = {}
    for i, inst in enumerate(test):
        gtype = taxonomy.get(inst.key.grid)
        if gtype is None:
            raise DataError(f"grid {inst.key.grid!r} missing from the grid-type taxonomy")
        groups.setdefault(gtype, []).append(i)
    per_type = [_metrics_from_selection([test[i] for i in idx], chosen[idx])
                for _, idx in sorted(groups.items())]
    return MethodMetrics(
        accuracy=float(np.mean([m.accuracy for m in per_type])),
        coverage=float(np.mean([m.coverage for m in per_type])),
        runtime_min=float(np.mean([m.runtime_min for m in per_type])),
        regret_pct=float(np.mean([m.regret_pct for m in per_type])),
        n_instances=len(test),
    )


def evaluate_per_type(policy, test: Sequence[LabeledInstance], features=None,
                      taxonomy: Mapping[str, str] | None = None) -> dict[str, MethodMetrics]:
    """Per-grid-type metric breakdown for one policy."""
    if taxonomy is None:
        raise ValidationError("per-type evaluation needs a grid-type taxonomy")
    chosen = policy.select(test, features)
    groups: dict[str, list[int]] = {}
    for i, inst in enumerate(test):
        gtype = taxonomy.get(inst.key.grid)
        if gtype is None:
            raise DataError(f"grid {inst.key.grid!r} missing from the grid-type taxonomy")
        groups.setdefault(gtype, []).append(i)
    return {gtype: _metrics_from_selection([test[i] for i in idx], chosen[idx])
            for gtype, idx in sorted(groups.items())}


# -- report assembly -------------------------------------------------------


@dataclass
class EvalReport:
    """Metrics for several methods on one test set, in both aggregation
    modes plus an optional per-grid-type breakdown."""

    methods: dict[str, dict]

    @classmethod
    def build(cls, policies: Sequence, test: Sequence[LabeledInstance], features=None,
              taxonomy: Mapping[str, str] | None = None) -> "EvalReport":
        methods = {}
        for policy in policies:
            entry = {"all": evaluate(policy, test, features, mode="all")}
            if taxonomy is not None:
                entry["avg"] = evaluate(policy, test, features, taxonomy=taxonomy, mode="avg")
                entry["per_type"] = evaluate_per_type(policy, test, features, taxonomy=taxonomy)
            methods[policy.name] = entry
        return cls(methods=methods)

    def to_json(self, path) -> None:
        payload = {}
        for name, entry in self.methods.items():
            payload[name] = {"all": entry["all"].as_dict()}
            if "avg" in entry:
                payload[name]["avg"] = entry["avg"].as_dict()
            if "per_type" in entry:
                payload[name]["per_type"] = {t: m.as_dict() for t, m in entry["per_type"].items()}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", "aggregation", "accuracy", "coverage",
                             "runtime_min", "regret_pct", "n_instances"])
            for name, entry in self.methods.items():
                rows = [("all", entry["all"])]
                if "avg" in entry:
                    rows.append(("avg", entry["avg"]))
                for gtype, metrics in entry.get("per_type", {}).items():
                    rows.append((f"type:{gtype}", metrics))
                for agg, m in rows:
                    writer.writerow([name, agg, f"{m.accuracy:.6f}", f"{m.coverage:.6f}",
                                     f"{m.runtime_min:.6f}", f"{m.regret_pct:.6f}", m.n_instances])

"""Command-line pipeline: synth -> extract -> train -> evaluate/ablate.

Subcommands:

* ``synth``     generate a synthetic benchmark (maps, scenarios, results CSV)
* ``extract``   parse benchmark files and write the feature matrix CSV
* ``features``  write only the 20 named hand-crafted feature columns
* ``embed``     embed a single graph (edge list or map/scen/k) as one CSV row
* ``train``     tune (k-fold CV), fit, and save the selector model
* ``predict``   apply a saved model to a feature matrix
* ``evaluate``  rebuild the split and report metrics vs oracle/single-best
* ``ablate``    train/evaluate every feature-block subset in one table

Progress and timing go to stderr; machine-readable outputs go to files.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .benchmark import DEFAULT_PORTFOLIO, load_results, parse_map, parse_scen
from .embedding import FeatherConfig, embed_graph
from .encodings import encode_full_graph, encode_path_subgraph, read_edge_list
from .errors import DataError
from .evaluation import (EvalReport, ModelPolicy, OraclePolicy, SplitSpec, derive_labels,
                         evaluate, make_split, single_best_policy)
from .gbdt import (DEFAULT_GRID, GradientBoostedClassifier, importance_report,
                   tune_hyperparameters)
from .handcrafted import FEATURE_NAMES, handcrafted_features
from .instance import MapfInstance
from .pipeline import (ABLATION_SUBSETS, FeatureCache, FeatureSubset, InstanceKey,
                       extract_batch, feature_names, read_feature_csv, select_blocks,
                       write_feature_csv)
from .synth import SynthConfig, generate_benchmark

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def log(message: str) -> None:
    print(message, file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; our contract reserves 2 for
    # data errors, so remap usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_bytes(path: Path, what: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {what} {path}: {exc}") from exc


def _load_json(path: Path, what: str):
    try:
        return json.loads(_read_bytes(path, what))
    except json.JSONDecodeError as exc:
        raise DataError(f"{what} {path} is not valid JSON: {exc}") from exc


class _Stage:
    """Context manager printing '<name>: ... done in Xs' to stderr."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log(f"[{self.name}] start")
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "failed" if exc_type else "done"
        log(f"[{self.name}] {status} in {time.perf_counter() - self.t0:.1f}s")
        return False


# -- shared argument plumbing ----------------------------------------------


def _add_embedding_flags(p: argparse.ArgumentParser):
    p.add_argument("--order", type=int, default=None, help="random-walk scales (default 5)")
    p.add_argument("--eval-points", type=int, default=None, help="angles per scale (default 25)")
    p.add_argument("--theta-max", type=float, default=None, help="largest angle (default 2.5)")
    p.add_argument("--pooling", choices=["mean", "max"], default=None,
                   help="node-to-graph pooling (default max)")


def _add_data_flags(p: argparse.ArgumentParser):
    p.add_argument("--maps-dir", type=Path, default=None)
    p.add_argument("--scens-dir", type=Path, default=None)
    p.add_argument("--results", type=Path, default=None, help="solver results CSV")
    p.add_argument("--data-dir", type=Path, default=None,
                   help="shorthand: <dir>/maps, <dir>/scens, <dir>/results.csv, <dir>/taxonomy.json")


def _add_split_flags(p: argparse.ArgumentParser):
    p.add_argument("--setup", choices=["in_grid", "in_grid_type", "between_grid_type"],
                   default=None, help="split regime (default in_grid)")
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--test-types", type=str, default=None,
                   help="comma-separated grid types held out (between_grid_type)")
    p.add_argument("--taxonomy", type=Path, default=None, help="grid->type JSON map")


class Ctx:
    """Resolved options: config-file values overridden by explicit flags."""

    def __init__(self, args):
        self.args = args
        self.file = _load_json(args.config, "config file") if args.config else {}
        if not isinstance(self.file, dict):
            raise DataError("config file must hold a JSON object")

    def get(self, key: str, default=None):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        return self.file.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.get("seed", 0))

    @property
    def threads(self) -> int:
        return int(self.get("threads", 1))

    @property
    def portfolio(self) -> tuple[str, ...]:
        raw = self.get("portfolio")
        if raw is None:
            return DEFAULT_PORTFOLIO
        if isinstance(raw, str):
            raw = [s.strip() for s in raw.split(",") if s.strip()]
        return tuple(raw)

    def feather_config(self) -> FeatherConfig:
        return FeatherConfig(
            order=int(self.get("order", 5)),
            eval_points=int(self.get("eval_points", 25)),
            theta_max=float(self.get("theta_max", 2.5)),
            pooling=str(self.get("pooling", "max")),
        )

    def cache(self) -> FeatureCache | None:
        cache_dir = self.get("cache_dir")
        return FeatureCache(cache_dir) if cache_dir else None

    def data_paths(self) -> tuple[Path, Path, Path]:
        data_dir = self.get("data_dir")
        maps_dir = self.get("maps_dir") or (Path(data_dir) / "maps" if data_dir else None)
        scens_dir = self.get("scens_dir") or (Path(data_dir) / "scens" if data_dir else None)
        results = self.get("results") or (Path(data_dir) / "results.csv" if data_dir else None)
        missing = [n for n, v in (("--maps-dir", maps_dir), ("--scens-dir", scens_dir),
                                  ("--results", results)) if v is None]
        if missing:
            raise DataError(f"missing required data locations: {', '.join(missing)}")
        return Path(maps_dir), Path(scens_dir), Path(results)

    def taxonomy(self, required: bool) -> dict | None:
        path = self.get("taxonomy")
        if path is None:
            data_dir = self.get("data_dir")
            if data_dir and (Path(data_dir) / "taxonomy.json").exists():
                path = Path(data_dir) / "taxonomy.json"
        if path is None:
            if required:
                raise DataError("this command needs --taxonomy (grid -> type JSON)")
            return None
        taxonomy = _load_json(Path(path), "taxonomy file")
        if not isinstance(taxonomy, dict):
            raise DataError("taxonomy file must map grid names to type names")
        return taxonomy

    def split_spec(self, taxonomy: dict | None) -> SplitSpec:
        test_types = self.get("test_types")
        if isinstance(test_types, str):
            test_types = tuple(s.strip() for s in test_types.split(",") if s.strip())
        elif test_types is not None:
            test_types = tuple(test_types)
        return SplitSpec(
            setup=str(self.get("setup", "in_grid")),
            taxonomy=taxonomy or {},
            seed=self.seed,
            test_fraction=float(self.get("test_fraction", 0.2)),
            test_types=test_types,
        )

    def hyper_grid(self):
        path = self.get("grid_file")
        if path is None:
            inline = self.file.get("hyper_grid")
            return inline if inline is not None else DEFAULT_GRID
        return _load_json(Path(path), "hyperparameter grid file")


def _load_instances(maps_dir: Path, scens_dir: Path, records) -> list[tuple[InstanceKey, MapfInstance]]:
    """Build one MapfInstance per runtime record, memoizing file parses."""
    maps: dict[str, object] = {}
    scens: dict[str, list] = {}
    items = []
    for rec in records:
        if rec.grid_name not in maps:
            maps[rec.grid_name] = parse_map(
                _read_bytes(maps_dir / f"{rec.grid_name}.map", "map file"), name=rec.grid_name)
        grid = maps[rec.grid_name]
        if rec.scenario_name not in scens:
            scens[rec.scenario_name] = parse_scen(
                _read_bytes(scens_dir / f"{rec.scenario_name}.scen", "scenario file"), grid)
        inst = MapfInstance.from_scenario(grid, scens[rec.scenario_name], rec.num_agents)
        items.append((InstanceKey(rec.grid_name, rec.scenario_name, rec.num_agents), inst))
    return items


def _load_feature_matrix(ctx: Ctx) -> tuple[list[InstanceKey], np.ndarray]:
    path = ctx.get("features")
    if path is None:
        raise DataError("this command needs --features (feature matrix CSV)")
    return read_feature_csv(Path(path))


def _aligned_dataset(ctx: Ctx):
    """Labeled instances plus their feature rows, aligned, plus metadata."""
    _, _, results_path = ctx.data_paths()
    records = load_results(_read_bytes(results_path, "results CSV"), ctx.portfolio,
                           strict=not ctx.get("lenient_results", False))
    if not records:
        raise DataError(f"results CSV {results_path} contains no records")
    keys, X = _load_feature_matrix(ctx)
    index = {k: i for i, k in enumerate(keys)}
    labeled = derive_labels(records, ctx.portfolio, feature_keys=index.keys())
    rows = np.array([index[inst.key] for inst in labeled])
    return labeled, X[rows], records


# -- subcommands ------------------------------------------------------------


def cmd_synth(ctx: Ctx) -> int:
    out_dir = ctx.get("out_dir")
    if out_dir is None:
        raise DataError("synth needs --out-dir")
    counts = ctx.get("agent_counts")
    if isinstance(counts, str):
        counts = tuple(int(t) for t in counts.split(",") if t.strip())
    elif counts is not None:
        counts = tuple(int(c) for c in counts)
    defaults = SynthConfig()
    config = SynthConfig(
        seed=ctx.seed,
        grids_per_type=int(ctx.get("grids_per_type", defaults.grids_per_type)),
        scens_per_grid=int(ctx.get("scens_per_grid", defaults.scens_per_grid)),
        agent_counts=counts or defaults.agent_counts,
        size=int(ctx.get("size", defaults.size)),
        noise=float(ctx.get("noise", defaults.noise)),
    )
    with _Stage("synth"):
        summary = generate_benchmark(config, out_dir)
    log(f"[synth] {summary['num_instances']} instances over {summary['num_grids']} grids; "
        f"label histogram {summary['label_histogram']}")
    return EXIT_OK


def cmd_extract(ctx: Ctx) -> int:
    maps_dir, scens_dir, results_path = ctx.data_paths()
    out = ctx.get("out")
    if out is None:
        raise DataError("extract needs --out (feature CSV path)")
    config = ctx.feather_config()
    records = load_results(_read_bytes(results_path, "results CSV"), ctx.portfolio,
                           strict=not ctx.get("lenient_results", False))
    if not records:
        raise DataError(f"results CSV {results_path} contains no records")
    with _Stage("parse"):
        items = _load_instances(maps_dir, scens_dir, records)
    with _Stage("extract"):
        X = extract_batch(items, config, cache=ctx.cache(), n_jobs=ctx.threads, log=log)
    write_feature_csv(out, [k for k, _ in items], X)
    log(f"[extract] wrote {X.shape[0]} x {X.shape[1]} features to {out}")
    return EXIT_OK


def cmd_features(ctx: Ctx) -> int:
    maps_dir, scens_dir, results_path = ctx.data_paths()
    out = ctx.get("out")
    if out is None:
        raise DataError("features needs --out (CSV path)")
    records = load_results(_read_bytes(results_path, "results CSV"), ctx.portfolio,
                           strict=not ctx.get("lenient_results", False))
    with _Stage("features"):
        items = _load_instances(maps_dir, scens_dir, records)
        rows = [handcrafted_features(inst) for _, inst in items]
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["grid", "scenario", "num_agents"] + list(FEATURE_NAMES))
        for (key, _), values in zip(items, rows):
            writer.writerow([key.grid, key.scenario, key.num_agents]
                            + [repr(float(v)) for v in values])
    log(f"[features] wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_embed(ctx: Ctx) -> int:
    args = ctx.args
    out = ctx.get("out")
    if out is None:
        raise DataError("embed needs --out (CSV path)")
    config = ctx.feather_config()
    if args.edge_list is not None:
        graph = read_edge_list(args.edge_list)
    else:
        if args.map is None or args.scen is None or args.k is None:
            raise DataError("embed needs either --edge-list or all of --map/--scen/-k")
        grid = parse_map(_read_bytes(args.map, "map file"), name=Path(args.map).stem)
        entries = parse_scen(_read_bytes(args.scen, "scenario file"), grid)
        inst = MapfInstance.from_scenario(grid, entries, args.k)
        encoder = encode_full_graph if args.encoder == "full" else encode_path_subgraph
        graph = encoder(inst)
    emb = embed_graph(graph, config)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"e{i}" for i in range(emb.values.size)])
        writer.writerow([repr(float(v)) for v in emb.values])
    log(f"[embed] wrote a {emb.values.size}-dim embedding to {out}")
    return EXIT_OK


def _train_on(X, y, ctx: Ctx, subset: FeatureSubset, config: FeatherConfig,
              n_classes: int):
    Xs = select_blocks(X, subset, config)
    grid = ctx.hyper_grid()
    folds = int(ctx.get("folds", 4))
    best, table = tune_hyperparameters(Xs, y, grid=grid, folds=folds, seed=ctx.seed,
                                       n_classes=n_classes, log=log)
    names = list(np.asarray(feature_names(config), dtype=object)[subset.column_indices(config)])
    clf = GradientBoostedClassifier(**best, n_classes=n_classes, random_state=ctx.seed)
    clf.fit(Xs, y, feature_names=names, class_names=list(ctx.portfolio))
    return clf, best, table


def _write_cv_table(path, table) -> None:
    params = sorted({k for row in table for k in row if k not in ("fold_accuracies", "mean_accuracy")})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        n_folds = len(table[0]["fold_accuracies"]) if table else 0
        writer.writerow(params + [f"fold{i}_accuracy" for i in range(n_folds)] + ["mean_accuracy"])
        for row in table:
            writer.writerow([row.get(p, "") for p in params]
                            + [f"{a:.6f}" for a in row["fold_accuracies"]]
                            + [f"{row['mean_accuracy']:.6f}"])


def cmd_train(ctx: Ctx) -> int:
    model_out = ctx.get("model_out")
    if model_out is None:
        raise DataError("train needs --model-out")
    labeled, X, _ = _aligned_dataset(ctx)
    taxonomy = ctx.taxonomy(required=ctx.get("setup", "in_grid") != "in_grid")
    spec = ctx.split_spec(taxonomy)
    train_idx, test_idx = make_split(labeled, spec)
    log(f"[split] {spec.setup}: {train_idx.size} train / {test_idx.size} test instances")
    y = np.array([inst.label for inst in labeled])
    config = ctx.feather_config()
    with _Stage("train"):
        clf, best, table = _train_on(X[train_idx], y[train_idx], ctx, FeatureSubset(),
                                     config, n_classes=len(ctx.portfolio))
    clf.save(model_out)
    cv_out = ctx.get("cv_out") or str(model_out) + ".cv.csv"
    _write_cv_table(cv_out, table)
    imp_out = ctx.get("importance_out") or str(model_out) + ".importance.csv"
    with open(imp_out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "total_gain"])
        for name, gain in importance_report(clf):
            writer.writerow([name, repr(gain)])
    log(f"[train] best params {best}; model -> {model_out}, cv -> {cv_out}, "
        f"importance -> {imp_out}")
    return EXIT_OK


def cmd_predict(ctx: Ctx) -> int:
    model_path = ctx.get("model")
    out = ctx.get("out")
    if model_path is None or out is None:
        raise DataError("predict needs --model and --out")
    model = GradientBoostedClassifier.load(model_path)
    keys, X = _load_feature_matrix(ctx)
    names = model.class_names_ or [str(c) for c in range(model.n_classes_)]
    proba = model.predict_proba(X)
    pred = np.argmax(proba, axis=1)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["grid", "scenario", "num_agents", "predicted_solver"]
                        + [f"prob_{n}" for n in names])
        for key, p, row in zip(keys, pred, proba):
            writer.writerow([key.grid, key.scenario, key.num_agents, names[int(p)]]
                            + [repr(float(v)) for v in row])
    log(f"[predict] wrote {len(keys)} predictions to {out}")
    return EXIT_OK


def cmd_evaluate(ctx: Ctx) -> int:
    model_path = ctx.get("model")
    out_prefix = ctx.get("out_prefix")
    if model_path is None or out_prefix is None:
        raise DataError("evaluate needs --model and --out-prefix")
    model = GradientBoostedClassifier.load(model_path)
    labeled, X, _ = _aligned_dataset(ctx)
    taxonomy = ctx.taxonomy(required=False)
    spec = ctx.split_spec(taxonomy)
    train_idx, test_idx = make_split(labeled, spec)
    train = [labeled[i] for i in train_idx]
    test = [labeled[i] for i in test_idx]
    X_test = X[test_idx]
    policies = [ModelPolicy(model, name="selector"), OraclePolicy(),
                single_best_policy(train, ctx.portfolio)]
    with _Stage("evaluate"):
        report = EvalReport.build(policies, test, X_test, taxonomy=taxonomy)
    report.to_csv(str(out_prefix) + ".csv")
    report.to_json(str(out_prefix) + ".json")
    for name, entry in report.methods.items():
        m = entry["all"]
        log(f"[evaluate] {name:24s} acc={m.accuracy:.3f} cov={m.coverage:.3f} "
            f"rt={m.runtime_min:.3f} regret={m.regret_pct:.1f}%")
    return EXIT_OK


def cmd_ablate(ctx: Ctx) -> int:
    out_prefix = ctx.get("out_prefix")
    if out_prefix is None:
        raise DataError("ablate needs --out-prefix")
    labeled, X, _ = _aligned_dataset(ctx)
    taxonomy = ctx.taxonomy(required=ctx.get("setup", "in_grid") != "in_grid")
    spec = ctx.split_spec(taxonomy)
    train_idx, test_idx = make_split(labeled, spec)
    train = [labeled[i] for i in train_idx]
    test = [labeled[i] for i in test_idx]
    y = np.array([inst.label for inst in labeled])
    config = ctx.feather_config()

    policies = []
    features_by_name = {}
    for subset in ABLATION_SUBSETS:
        with _Stage(f"ablate:{subset.label}"):
            clf, _, _ = _train_on(X[train_idx], y[train_idx], ctx, subset, config,
                                  n_classes=len(ctx.portfolio))
        name = f"selector[{subset.label}]"
        policies.append(ModelPolicy(clf, name=name))
        features_by_name[name] = select_blocks(X[test_idx], subset, config)
    policies.append(OraclePolicy())
    policies.append(single_best_policy(train, ctx.portfolio))

    methods = {}
    for policy in policies:
        feats = features_by_name.get(getattr(policy, "name", ""), None)
        entry = {"all": evaluate(policy, test, feats, mode="all")}
        if taxonomy is not None:
            entry["avg"] = evaluate(policy, test, feats, taxonomy=taxonomy, mode="avg")
        methods[policy.name] = entry
    report = EvalReport(methods=methods)
    report.to_csv(str(out_prefix) + ".csv")
    report.to_json(str(out_prefix) + ".json")
    for name, entry in report.methods.items():
        m = entry["all"]
        log(f"[ablate] {name:28s} acc={m.accuracy:.3f} cov={m.coverage:.3f} "
            f"rt={m.runtime_min:.3f} regret={m.regret_pct:.1f}%")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="mapfsel", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=None, help="global random seed (default 0)")
    parser.add_argument("--threads", type=int, default=None, help="parallel workers (default 1)")
    parser.add_argument("--cache-dir", dest="cache_dir", type=Path, default=None)
    parser.add_argument("--config", type=Path, default=None, help="JSON config with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark")
    p.add_argument("--out-dir", dest="out_dir", type=Path, default=None)
    p.add_argument("--grids-per-type", dest="grids_per_type", type=int, default=None)
    p.add_argument("--scens-per-grid", dest="scens_per_grid", type=int, default=None)
    p.add_argument("--agent-counts", dest="agent_counts", type=str, default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract the full feature matrix")
    _add_data_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--lenient-results", dest="lenient_results", action="store_const", const=True,
                   default=None, help="complete missing solver rows as unsolved")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("features", help="extract only the hand-crafted features")
    _add_data_flags(p)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--lenient-results", dest="lenient_results", action="store_const", const=True,
                   default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("embed", help="embed one graph as a CSV row")
    p.add_argument("--edge-list", dest="edge_list", type=Path, default=None)
    p.add_argument("--map", type=Path, default=None)
    p.add_argument("--scen", type=Path, default=None)
    p.add_argument("-k", type=int, default=None, help="number of agents")
    p.add_argument("--encoder", choices=["path", "full"], default="full")
    _add_embedding_flags(p)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="tune, fit, and save the selector")
    _add_data_flags(p)
    _add_split_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--grid-file", dest="grid_file", type=Path, default=None,
                   help="JSON hyperparameter grid (default: built-in grid)")
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--model-out", dest="model_out", type=Path, default=None)
    p.add_argument("--cv-out", dest="cv_out", type=Path, default=None)
    p.add_argument("--importance-out", dest="importance_out", type=Path, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to features")
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics on the held-out split")
    _add_data_flags(p)
    _add_split_flags(p)
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--out-prefix", dest="out_prefix", type=Path, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train/evaluate every feature subset")
    _add_data_flags(p)
    _add_split_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--grid-file", dest="grid_file", type=Path, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--out-prefix", dest="out_prefix", type=Path, default=None)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ctx = Ctx(args)
        return args.func(ctx)
    except DataError as exc:
        log(f"error: {exc}")
        return EXIT_DATA
    except KeyboardInterrupt:
        log("interrupted")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort guard for exit code 3
        log(f"internal error: {type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ingest, stats, audit, sweep, timeline, summarize.

All randomness flows from explicit seeds in flags or config files; rerunning
a command with an identical manifest reproduces identical output CSVs byte
for byte. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
Set LEAKPROOF_LOG (DEBUG/INFO/WARNING/ERROR) to control verbosity.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from leakproof import __version__, corpus, metrics
from leakproof import splits as splits_mod
from leakproof.corpus import DAY, ColumnSchema, IngestError
from leakproof.experiments import reporting
from leakproof.experiments.sweep import SweepConfig, build_sweep_training_set, run_sweep, similarity_analysis
from leakproof.experiments.timeline import MODES, run_timeline
from leakproof.models import MODEL_KINDS, DEFAULT_BPR_RANGES, ModelSpec, build_model, random_search
from leakproof.models.bpr import Bpr, BprParams

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_DELIMITERS = {"tab": "\t", "comma": ",", "space": " ", "ws": None}


class ConfigError(Exception):
    """Invalid configuration; carries one message per problem."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _delimiter(name: str) -> str | None:
    if name in _DELIMITERS:
        return _DELIMITERS[name]
    return name


def _schema_from_args(args) -> ColumnSchema:
    return ColumnSchema.parse(args.schema, delimiter=_delimiter(args.delimiter), header=args.header)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _dataset_fingerprint(path) -> dict:
    with open(path, "rb") as fh:
        rows = sum(1 for _ in fh)
    return {"path": str(path), "rows": rows, "sha256": _sha256(path)}


def _write_manifest(out_dir: Path, command: str, started: float, *,
                    config_path=None, dataset_path=None, seeds=(), extra=None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seeds": list(seeds),
        "config_sha256": _sha256(config_path) if config_path else None,
        "dataset": _dataset_fingerprint(dataset_path) if dataset_path else None,
        "timings": {"total_s": round(time.perf_counter() - started, 3)},
    }
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"])


def _ingest_from_config(cfg: dict, problems: list[str]):
    section = cfg.get("dataset")
    if not isinstance(section, dict) or "path" not in section:
        problems.append("dataset: must be an object with a 'path'")
        return None
    path = Path(section["path"])
    if not path.exists():
        problems.append(f"dataset.path: no such file {path}")
        return None
    schema = ColumnSchema.parse(
        section.get("schema", "0:1::2"),
        delimiter=_delimiter(section.get("delimiter", "tab")),
        header=bool(section.get("header", False)),
    )
    return corpus.ingest(path, schema)


# ---------------------------------------------------------------- ingest ---

def cmd_ingest(args) -> int:
    schema = _schema_from_args(args)
    d = corpus.ingest(args.input, schema)
    print(f"read {len(d)} interactions ({d.n_users} users, {d.n_items} items)")
    if args.dedup != "none":
        d = corpus.deduplicate(d, args.dedup)
        print(f"after {args.dedup} dedup: {len(d)} interactions")
    if args.span:
        start_str, _, days_str = args.span.partition(":")
        try:
            start, days = int(start_str), float(days_str)
        except ValueError:
            raise ConfigError([f"--span must be START:DAYS, got {args.span!r}"])
        d = corpus.select_time_span(d, start, int(days * DAY),
                                    first_rating_grace=int(args.grace_days * DAY))
        print(f"after span selection: {len(d)} interactions")
    if args.k_core:
        d = corpus.k_core_filter(d, args.k_core)
        print(f"after {args.k_core}-core filtering: {len(d)} interactions")
        if not len(d):
            raise ConfigError([f"{args.k_core}-core filtering removed everything"])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus.save_dataset(d, out_dir / "processed.tsv")
    stats = corpus.dataset_stats(d)
    (out_dir / "processed.stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


# ----------------------------------------------------------------- stats ---

def cmd_stats(args) -> int:
    d = corpus.ingest(args.input, _schema_from_args(args))
    window = int(args.window * DAY)
    name = args.name or Path(args.input).stem
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    stats = corpus.dataset_stats(d)
    period = corpus.active_period_stats(d)
    series = corpus.weekly_series(d)
    if args.items:
        items = args.items.split(",")
    else:
        counts = {}
        for it in d.interactions:
            counts[it.item] = counts.get(it.item, 0) + 1
        items = sorted(counts, key=lambda i: (-counts[i], i))[:3]

    (out_dir / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    reporting.write_active_periods_csv(out_dir / "active_periods.csv", name, period)
    reporting.write_weekly_csv(out_dir / "weekly.csv", series)
    reporting.write_popularity_csv(out_dir / "popularity.csv", d, items, window)
    print(json.dumps(stats, sort_keys=True))
    print(f"active periods (days): users mean={period.mean_user_days:.2f} "
          f"median={period.median_user_days:.2f}, items mean={period.mean_item_days:.2f} "
          f"median={period.median_item_days:.2f}")
    return EXIT_OK


# ----------------------------------------------------------------- audit ---

def _build_split(d, strategy: str, args) -> splits_mod.Split:
    if strategy == "random-by-ratio":
        return splits_mod.split_random_by_ratio(d, args.ratio, args.seed)
    if strategy == "random-by-user":
        return splits_mod.split_random_by_user(d, args.ratio, args.seed)
    if strategy == "leave-one-out":
        return splits_mod.split_leave_one_out(d, with_validation=args.with_validation)
    if strategy == "by-timepoint":
        if args.timepoint is None:
            raise ConfigError(["--timepoint is required for by-timepoint"])
        return splits_mod.split_by_timepoint(d, args.timepoint)
    raise ConfigError([f"unknown strategy {strategy!r}"])


def cmd_audit(args) -> int:
    d = corpus.ingest(args.input, _schema_from_args(args))
    split = _build_split(d, args.strategy, args)
    audit = splits_mod.leakage_audit(d, split)
    print(f"strategy={split.strategy} train={len(split.train)} "
          f"validation={len(split.validation)} test={len(split.test)}")
    print(f"total future training interactions: {audit.total_future_train}")
    print(f"total future catalog items:         {audit.total_future_items}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        splits_mod.save_split(split, out_dir, audit)
        rows = [(idx, d.interactions[idx].timestamp, c.future_train_count, c.future_item_count)
                for idx, c in audit.per_test.items()]
        with open(out_dir / "audit.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("test_index", "asof", "future_train_count", "future_item_count"))
            writer.writerows(rows)
    return EXIT_OK


# ----------------------------------------------------------------- sweep ---

def _validate_sweep_config(cfg: dict) -> list[str]:
    problems: list[str] = []
    if not isinstance(cfg.get("window_days", 365), (int, float)) or cfg.get("window_days", 365) <= 0:
        problems.append("window_days: must be a positive number")
    if not isinstance(cfg.get("test_window", 4), int) or cfg.get("test_window", 4) < 0:
        problems.append("test_window: must be a non-negative integer")
    if not isinstance(cfg.get("future_windows", 0), int) or cfg.get("future_windows", 0) < 0:
        problems.append("future_windows: must be a non-negative integer")
    seeds = cfg.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        problems.append("seeds: must be a non-empty list of integers")
    if not isinstance(cfg.get("topn", 20), int) or cfg.get("topn", 20) < 1:
        problems.append("topn: must be a positive integer")
    models = cfg.get("models", [])
    if not isinstance(models, list) or not models:
        problems.append("models: must be a non-empty list")
    else:
        for i, spec in enumerate(models):
            if not isinstance(spec, dict) or spec.get("kind") not in MODEL_KINDS:
                problems.append(f"models[{i}].kind: must be one of {MODEL_KINDS}")
    search = cfg.get("search")
    if search is not None:
        if not isinstance(search, dict) or not isinstance(search.get("trials", 0), int) \
                or search.get("trials", 0) < 1:
            problems.append("search.trials: must be an integer >= 1")
    return problems


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    cfg = _load_json(args.config)
    problems = _validate_sweep_config(cfg)
    d = None
    if not any(p.startswith("dataset") for p in problems):
        d = _ingest_from_config(cfg, problems)
    if d is not None:
        window = int(cfg.get("window_days", 365) * DAY)
        total = d.n_windows(window)
        if cfg.get("test_window", 4) + cfg.get("future_windows", 0) >= total:
            problems.append(
                f"future_windows: test_window + future_windows must stay below the "
                f"{total}-window span of the dataset"
            )
    if problems:
        raise ConfigError(problems)

    assert d is not None
    seeds = tuple(cfg.get("seeds", [0]))
    topn = cfg.get("topn", 20)
    search = cfg.get("search")
    split = splits_mod.split_leave_one_out(d, with_validation=bool(search))
    sweep_cfg = SweepConfig(
        window_length=int(cfg.get("window_days", 365) * DAY),
        test_window_index=cfg.get("test_window", 4),
        future_windows=cfg.get("future_windows", 0),
        seeds=seeds,
        n=topn,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = {}
    for spec in cfg["models"]:
        kind = spec["kind"]
        params = dict(spec.get("params", {}))
        if search and kind == "bpr":
            params.update(_tune_bpr(d, split, sweep_cfg, search, params))
        factory = ModelSpec(kind, params)
        log.info("sweep: model=%s params=%s", kind, params)
        reports[kind] = run_sweep(d, split, factory, sweep_cfg, model_name=kind, jobs=args.jobs)

    audit = splits_mod.leakage_audit(d, split)
    summary = reporting.summarize(reports)
    for kind, report in reports.items():
        reporting.write_sweep_metrics_csv(out_dir / f"metrics_{kind}.csv", report)
        reporting.write_sweep_lists_csv(out_dir / f"lists_{kind}.csv", report)
    reporting.write_sweep_summary_csv(out_dir / "summary.csv", reports)
    reporting.write_changes_csv(out_dir / "changes.csv", summary)
    reporting.write_ranks_csv(out_dir / "ranks.csv", summary)

    if len(seeds) >= 2:
        entries = []
        for kind, report in reports.items():
            for fw in report.future_range:
                if fw == 0:
                    dist = metrics.intrinsic_similarity(report.lists_by_instance(0))
                    entries.append((f"{kind}-fw0", report.test_indices, dist))
                else:
                    _, intr, extr = similarity_analysis(report, report, 0, fw)
                    entries.append((f"{kind}-fw{fw}", report.test_indices, intr))
                    entries.append((f"{kind}-fw0-vs-fw{fw}", report.test_indices, extr))
        reporting.write_similarity_csv(out_dir / "similarity.csv", entries)

    _write_manifest(
        out_dir, "sweep", started,
        config_path=args.config, dataset_path=cfg["dataset"]["path"], seeds=seeds,
        extra={"audit": {"total_future_train": audit.total_future_train,
                         "total_future_items": audit.total_future_items}},
    )
    for kind, report in sorted(reports.items()):
        for fw in report.future_range:
            print(f"{kind} fw={fw}: train={report.train_sizes[fw]} "
                  f"hr@{topn}={report.mean_hr(fw):.6f} ndcg@{topn}={report.mean_ndcg(fw):.6f} "
                  f"future_items={report.future_total(fw)}")
    print(f"report written to {out_dir}")
    return EXIT_OK


def _tune_bpr(d, split, sweep_cfg: SweepConfig, search: dict, fixed: dict) -> dict:
    """Random-search BPR on the no-future training set, scored on validation."""
    train_idx, test_idx = build_sweep_training_set(
        d, split, SweepConfig(
            window_length=sweep_cfg.window_length,
            test_window_index=sweep_cfg.test_window_index,
            future_windows=0,
            seeds=sweep_cfg.seeds,
            n=sweep_cfg.n,
        ))
    test_users = {d.interactions[i].user for i in test_idx}
    validation = [d.interactions[i] for i in sorted(split.validation)
                  if d.interactions[i].user in test_users]
    if not validation:
        raise ConfigError(["search: no validation instances for the chosen test window"])
    train = [d.interactions[i] for i in train_idx]
    epochs = fixed.get("epochs", 20)

    def factory(params: dict) -> Bpr:
        return Bpr(BprParams(seed=search.get("seed", 0), epochs=epochs, **params))

    best = random_search(factory, train, validation,
                         ranges=DEFAULT_BPR_RANGES, trials=search["trials"],
                         seed=search.get("seed", 0), n=sweep_cfg.n)
    log.info("search picked %s", best)
    return best


# -------------------------------------------------------------- timeline ---

def _validate_timeline_config(cfg: dict) -> list[str]:
    problems: list[str] = []
    if cfg.get("mode", "timeline") not in MODES:
        problems.append(f"mode: must be one of {MODES}")
    model = cfg.get("model")
    if not isinstance(model, dict) or model.get("kind") not in MODEL_KINDS:
        problems.append(f"model.kind: must be one of {MODEL_KINDS}")
    if not isinstance(cfg.get("topn", 20), int) or cfg.get("topn", 20) < 1:
        problems.append("topn: must be a positive integer")
    if not isinstance(cfg.get("batch", 1), int) or cfg.get("batch", 1) < 1:
        problems.append("batch: must be a positive integer")
    if cfg.get("mode") == "sliding" and not cfg.get("window_days"):
        problems.append("window_days: required for sliding mode")
    split = cfg.get("split", {"strategy": "leave-one-out"})
    if not isinstance(split, dict) or split.get("strategy", "leave-one-out") not in (
            "leave-one-out", "by-timepoint", "random-by-ratio", "random-by-user"):
        problems.append("split.strategy: unknown strategy")
    return problems


def cmd_timeline(args) -> int:
    started = time.perf_counter()
    cfg = _load_json(args.config)
    problems = _validate_timeline_config(cfg)
    d = None
    if not any(p.startswith("dataset") for p in problems):
        d = _ingest_from_config(cfg, problems)
    if problems:
        raise ConfigError(problems)
    assert d is not None

    mode = cfg.get("mode", "timeline")
    seed = cfg.get("seed", 0)
    split_cfg = cfg.get("split", {"strategy": "leave-one-out"})
    strategy = split_cfg.get("strategy", "leave-one-out")
    if strategy == "leave-one-out":
        split = splits_mod.split_leave_one_out(d)
    elif strategy == "by-timepoint":
        split = splits_mod.split_by_timepoint(d, split_cfg["timepoint"])
    elif strategy == "random-by-ratio":
        split = splits_mod.split_random_by_ratio(d, split_cfg.get("ratio", 0.2), seed)
    else:
        split = splits_mod.split_random_by_user(d, split_cfg.get("ratio", 0.2), seed)

    model_cfg = cfg["model"]
    factory = lambda: build_model(model_cfg["kind"], model_cfg.get("params"), seed=seed)
    report = run_timeline(
        d, split.test, factory, mode=mode, n=cfg.get("topn", 20),
        batch_size=cfg.get("batch", 1),
        window=int(cfg["window_days"] * DAY) if cfg.get("window_days") else None,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reporting.write_timeline_csv(out_dir / "timeline.csv", report)
    summary = {
        "mode": mode,
        "rows": len(report.rows),
        "mean_hr": report.mean_hr,
        "mean_ndcg": report.mean_ndcg,
        "violations": report.violations,
    }
    (out_dir / "timeline_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(out_dir, "timeline", started, config_path=args.config,
                    dataset_path=cfg["dataset"]["path"], seeds=[seed],
                    extra={"violations": report.violations})
    print(f"mode={mode} rows={len(report.rows)} hr={report.mean_hr:.6f} "
          f"ndcg={report.mean_ndcg:.6f}")
    print(f"violations: {report.violations}")
    return EXIT_OK


# -------------------------------------------------------------- summarize ---

def cmd_summarize(args) -> int:
    by_model: dict[str, dict[int, dict]] = {}
    for path in args.inputs:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                fw = int(row["future_windows"])
                by_model.setdefault(row["model"], {})[fw] = {
                    "hr": float(row["mean_hr"]),
                    "ndcg": float(row["mean_ndcg"]),
                }
    if not by_model:
        raise ConfigError(["no summary rows found in the given inputs"])

    changes: dict[str, dict[str, tuple[float, float] | None]] = {}
    for model, per_fw in sorted(by_model.items()):
        if 0 not in per_fw:
            raise ConfigError([f"{model}: missing the future_windows=0 reference row"])
        per_metric = {}
        for metric in ("hr", "ndcg"):
            if per_fw[0][metric] <= 0:
                per_metric[metric] = None
                continue
            deltas = [metrics.percent_change(per_fw[0][metric], per_fw[fw][metric])
                      for fw in sorted(per_fw) if fw > 0]
            per_metric[metric] = (min(deltas), max(deltas)) if deltas else None
        changes[model] = per_metric

    shared = sorted(set.intersection(*(set(v) for v in by_model.values())))
    ranks: dict[int, dict[str, int]] = {}
    for fw in shared:
        scores = {m: by_model[m][fw]["hr"] for m in by_model}
        ranks[fw] = metrics.rank_models(scores) if len(scores) >= 2 else {m: 1 for m in scores}

    summary = reporting.SweepSummary(changes=changes, ranks=ranks)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reporting.write_changes_csv(out_dir / "changes.csv", summary)
    reporting.write_ranks_csv(out_dir / "ranks.csv", summary)
    for model, per_metric in changes.items():
        for metric, span in per_metric.items():
            shown = "n/a" if span is None else f"{span[0]:+.1f}% .. {span[1]:+.1f}%"
            print(f"{model} {metric}: {shown}")
    return EXIT_OK


# ----------------------------------------------------------------- parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakproof",
        description="Leakage-aware offline evaluation for top-N recommenders",
    )
    parser.add_argument("--version", action="version", version=f"leakproof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input_flags(p, default_schema: str):
        p.add_argument("--input", required=True, help="interaction file")
        p.add_argument("--schema", default=default_schema,
                       help="user:item:rating:ts column indices (empty rating = none)")
        p.add_argument("--delimiter", default="tab",
                       help="tab, comma, space, ws (any whitespace), or a literal")
        p.add_argument("--header", action="store_true", help="skip the first row")

    p = sub.add_parser("ingest", help="parse, dedup, span-select, k-core filter")
    add_input_flags(p, "0:1:2:3")
    p.add_argument("--dedup", choices=("exact-triple", "earliest-per-pair", "none"),
                   default="exact-triple")
    p.add_argument("--span", help="START:DAYS selection window (epoch seconds, days)")
    p.add_argument("--grace-days", type=float, default=1.0,
                   help="drop users whose first rating precedes start + grace")
    p.add_argument("--k-core", type=int, default=0, help="k-core filter (0 = off)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="temporal statistics and figure CSVs")
    add_input_flags(p, "0:1::2")
    p.add_argument("--window", type=float, default=365.0, help="popularity window in days")
    p.add_argument("--items", help="comma-separated item ids to profile (default: top 3)")
    p.add_argument("--name", help="dataset label in CSVs (default: file stem)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("audit", help="build a split and audit its leakage")
    add_input_flags(p, "0:1::2")
    p.add_argument("--strategy", required=True,
                   choices=("random-by-ratio", "random-by-user", "leave-one-out", "by-timepoint"))
    p.add_argument("--ratio", type=float, default=0.2)
    p.add_argument("--timepoint", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-validation", action="store_true")
    p.add_argument("--out", help="optional output directory for split + audit files")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sweep", help="graded-leakage sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="concurrent (config, seed) runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timeline", help="timeline/prequential/sliding evaluation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("summarize", help="change ranges and rank tables from summary CSVs")
    p.add_argument("--inputs", nargs="+", required=True, help="summary.csv files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("LEAKPROOF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        print(f"ingest error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

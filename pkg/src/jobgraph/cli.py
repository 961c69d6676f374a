"""Command-line pipeline.

Subcommands mirror the library stages: ingest, tags, build-graph, walk,
train, eval-classify, eval-linkpred, report, run-all, config. A JSON config
file supplies paths and hyperparameters; config --print-defaults documents
every key. Relative paths in the config file, the output directory included,
resolve against the config file's directory; a JOBGRAPH_OUTPUT_DIR
environment variable or --output-dir flag overrides the output directory (in
rising priority) and resolves against the working directory.

Exit codes: 0 success, 1 usage or configuration error, 2 input or format
error, 3 numeric or consistency error.
"""

from __future__ import annotations

import argparse
import copy
import importlib.resources
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import (
    Corpus,
    build_vocabulary,
    filter_corpus,
    load_histories,
    load_stopwords,
    write_features_tsv,
    write_histories,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    InputError,
    JobGraphError,
    NumericError,
    SamplingError,
)
from .evaluation import (
    GRAPH_KINDS,
    METHODS,
    ExperimentConfig,
    MetricsReport,
    build_graph_variant,
    run_experiment,
    write_per_run_tsv,
    write_projection_tsv,
    write_report_json,
)
from .graphs import NodeKind, graph_stats, read_edge_list, write_edge_list
from .sgns import TrainConfig, load_embeddings, persist_embeddings, train_embeddings
from .tagger import TagSet, generate_tags, load_lexicon, write_tags_tsv
from .walks import WalkConfig, metapath_walks, node2vec_walks, read_walks, write_walks

OUTPUT_DIR_ENV = "JOBGRAPH_OUTPUT_DIR"

DEFAULTS: dict = {
    "paths": {
        "corpus": "corpus.jsonl",
        "lexicon": "lexicon.txt",
        "stopwords": "stopwords.txt",
        "output_dir": "out",
    },
    "filtering": {
        "min_records": 2,
        "min_label_occurrence": 200,
        "remove_rare_label_records": True,
    },
    "tags": {"k": 200, "count_distinct_titles": False},
    "walk": {
        "walk_length": 10,
        "walks_per_node": 50,
        "p": 1.0,
        "q": 1.0,
        "respect_direction": False,
        "metapath": ["job", "tag", "job"],
    },
    "train": {
        "dim": 128,
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "initial_step_size": 0.025,
        "deterministic": True,
        "workers": 4,
    },
    "evaluation": {
        "ratios": [0.6, 0.2, 0.2],
        "l2": 0.0005,
        "operators": ["average", "hadamard", "weighted_l1", "weighted_l2", "dot"],
        "repetitions": 10,
    },
    "experiments": [
        {"task": "classification", "graph": "transition", "method": "node2vec"},
        {"task": "classification", "graph": "enhanced", "method": "node2vec"},
        {"task": "classification", "graph": "transition-tag", "method": "metapath"},
        {"task": "link-prediction", "graph": "transition", "method": "node2vec"},
        {"task": "link-prediction", "graph": "enhanced", "method": "node2vec"},
    ],
    "base_seed": 2024,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _merge(base: dict, override: dict, trail: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{trail}.{key}" if trail else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "experiments":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _merge_experiment(entry: dict, idx: int) -> dict:
    allowed = {"task", "graph", "method"}
    unknown = set(entry) - allowed
    if unknown:
        raise ConfigError(f"experiments[{idx}]: unknown keys {sorted(unknown)}")
    for key in ("task", "graph"):
        if key not in entry:
            raise ConfigError(f"experiments[{idx}]: missing {key!r}")
    out = dict(entry)
    out.setdefault("method", "node2vec")
    return out


def load_config(path: str | None) -> dict:
    """Resolve a config file (or the bundled demo) against the defaults."""
    if path is None:
        cfg = copy.deepcopy(DEFAULTS)
        cfg["_dir"] = Path.cwd()
        return cfg
    if path == "demo":
        resource = importlib.resources.files("jobgraph").joinpath("data/demo_config.json")
        raw = resource.read_text(encoding="utf-8")
        base_dir = Path(str(importlib.resources.files("jobgraph").joinpath("data")))
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        raw = p.read_text(encoding="utf-8")
        base_dir = p.parent.resolve()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = _merge(DEFAULTS, data)
    cfg["experiments"] = [
        _merge_experiment(e, i) for i, e in enumerate(cfg["experiments"])
    ]
    cfg["_dir"] = base_dir
    return cfg


def _resolve_input(cfg: dict, key: str) -> Path:
    raw = Path(cfg["paths"][key])
    return raw if raw.is_absolute() else cfg["_dir"] / raw


def _output_dir(cfg: dict, args: argparse.Namespace) -> Path:
    flag = getattr(args, "output_dir", None)
    if flag:
        out = Path(flag)
    elif os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV])
    else:
        # config-file value resolves beside the config, like input paths
        out = Path(cfg["paths"]["output_dir"])
        if not out.is_absolute():
            out = cfg["_dir"] / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo_config(cfg: dict, out_dir: Path) -> None:
    echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
    echo["paths"] = dict(echo["paths"])
    echo["paths"]["output_dir"] = str(out_dir)
    (out_dir / "resolved.config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _walk_config(cfg: dict, method: str, seed: int) -> WalkConfig:
    w = cfg["walk"]
    metapath = None
    if method == "metapath":
        try:
            metapath = tuple(NodeKind(k) for k in w["metapath"])
        except ValueError:
            raise ConfigError(f"walk.metapath holds unknown node kinds: {w['metapath']!r}") from None
    return WalkConfig(
        walk_length=int(w["walk_length"]),
        walks_per_node=int(w["walks_per_node"]),
        p=float(w["p"]),
        q=float(w["q"]),
        respect_direction=bool(w["respect_direction"]),
        metapath=metapath,
        seed=seed,
    )


def _train_config(cfg: dict, seed: int) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(
        dim=int(t["dim"]),
        window=int(t["window"]),
        negatives=int(t["negatives"]),
        epochs=int(t["epochs"]),
        initial_step_size=float(t["initial_step_size"]),
        seed=seed,
        deterministic=bool(t["deterministic"]),
        workers=int(t["workers"]),
    )


def _experiment_config(cfg: dict, entry: dict) -> ExperimentConfig:
    ev = cfg["evaluation"]
    seed = int(cfg["base_seed"])
    return ExperimentConfig(
        task=entry["task"],
        graph=entry["graph"],
        method=entry["method"],
        walk=_walk_config(cfg, entry["method"], seed),
        train=_train_config(cfg, seed),
        ratios=tuple(float(x) for x in ev["ratios"]),
        l2=float(ev["l2"]),
        operators=tuple(ev["operators"]),
        repetitions=int(ev["repetitions"]),
        base_seed=seed,
    )


def _load_filtered_corpus(cfg: dict, out_dir: Path) -> Corpus:
    """Prefer the ingest output; fall back to filtering the raw corpus."""
    stopwords = load_stopwords(_resolve_input(cfg, "stopwords"))
    filtered_path = out_dir / "corpus.filtered.jsonl"
    if filtered_path.is_file():
        return load_histories(filtered_path, stopwords)
    f = cfg["filtering"]
    raw = load_histories(_resolve_input(cfg, "corpus"), stopwords)
    return filter_corpus(
        raw,
        min_records=int(f["min_records"]),
        min_label_occurrence=int(f["min_label_occurrence"]),
        remove_rare_label_records=bool(f["remove_rare_label_records"]),
    )


def _mine_tags(cfg: dict, corpus: Corpus) -> TagSet:
    lexicon = load_lexicon(_resolve_input(cfg, "lexicon"))
    t = cfg["tags"]
    return generate_tags(
        corpus,
        lexicon,
        k=int(t["k"]),
        count_distinct_titles=bool(t["count_distinct_titles"]),
    )


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    stopwords = load_stopwords(_resolve_input(cfg, "stopwords"))
    raw = load_histories(_resolve_input(cfg, "corpus"), stopwords)
    f = cfg["filtering"]
    corpus = filter_corpus(
        raw,
        min_records=int(f["min_records"]),
        min_label_occurrence=int(f["min_label_occurrence"]),
        remove_rare_label_records=bool(f["remove_rare_label_records"]),
    )
    write_histories(out_dir / "corpus.filtered.jsonl", corpus)
    vocab = build_vocabulary(corpus)
    write_features_tsv(out_dir / "features.tsv", corpus, vocab)
    _echo_config(cfg, out_dir)
    print(
        f"ingest: {len(raw.histories)} histories -> {len(corpus.histories)} kept, "
        f"{len(corpus.titles)} titles, {len(corpus.labels)} labeled, "
        f"{len(vocab)} vocabulary tokens"
    )
    return 0


def cmd_tags(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    corpus = _load_filtered_corpus(cfg, out_dir)
    tagset = _mine_tags(cfg, corpus)
    write_tags_tsv(out_dir / "tags.tsv", tagset)
    _echo_config(cfg, out_dir)
    print(f"tags: {len(tagset)} tags mined (top {cfg['tags']['k']})")
    return 0


def _kinds_from(args: argparse.Namespace) -> list[str]:
    return list(GRAPH_KINDS) if args.kind == "all" else [args.kind]


def cmd_build_graph(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    corpus = _load_filtered_corpus(cfg, out_dir)
    tagset = _mine_tags(cfg, corpus)
    summaries = []
    for kind in _kinds_from(args):
        g = build_graph_variant(corpus, tagset, kind)
        write_edge_list(out_dir / f"edges.{kind}.tsv", g)
        s = graph_stats(g)
        summaries.append(
            f"{kind}: jobs={s.job_count} tags={s.tag_count} "
            f"transitions={s.transition_edge_count} job-job={s.enhanced_edge_count} "
            f"title-tag-pairs={s.has_tag_pair_count}"
        )
    _echo_config(cfg, out_dir)
    print("build-graph: " + "; ".join(summaries))
    return 0


def cmd_walk(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    edges_path = out_dir / f"edges.{args.kind}.tsv"
    if not edges_path.is_file():
        raise InputError(f"edge list not found: {edges_path} (run build-graph first)")
    g = read_edge_list(edges_path)
    walk_cfg = _walk_config(cfg, args.method, int(cfg["base_seed"]))
    corpus_walks = (
        metapath_walks(g, walk_cfg) if args.method == "metapath" else node2vec_walks(g, walk_cfg)
    )
    path = out_dir / f"walks.{args.kind}.{args.method}.txt"
    write_walks(path, corpus_walks)
    _echo_config(cfg, out_dir)
    print(f"walk: {len(corpus_walks)} walks over {args.kind} -> {path.name}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    walks_path = out_dir / f"walks.{args.kind}.{args.method}.txt"
    if not walks_path.is_file():
        raise InputError(f"walk corpus not found: {walks_path} (run walk first)")
    walks = read_walks(walks_path)
    matrix = train_embeddings(walks, _train_config(cfg, int(cfg["base_seed"])))
    path = out_dir / f"embeddings.{args.kind}.{args.method}.txt"
    persist_embeddings(path, matrix)
    _echo_config(cfg, out_dir)
    print(f"train: {len(matrix.index)} vectors (dim {matrix.dim}) -> {path.name}")
    return 0


def _run_task(args: argparse.Namespace, task: str, report_name: str) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    corpus = _load_filtered_corpus(cfg, out_dir)
    tagset = _mine_tags(cfg, corpus)
    entries = [e for e in cfg["experiments"] if e["task"] == task]
    if getattr(args, "graph", None):
        entries = [e for e in entries if e["graph"] == args.graph]
    if getattr(args, "method", None):
        entries = [e for e in entries if e["method"] == args.method]
    if not entries:
        raise ConfigError(f"no {task} experiments selected")
    reports = [run_experiment(corpus, tagset, _experiment_config(cfg, e)) for e in entries]
    write_report_json(out_dir / f"report.{report_name}.json", reports)
    write_per_run_tsv(out_dir / f"runs.{report_name}.tsv", reports)
    _echo_config(cfg, out_dir)
    print("; ".join(_summary_line(r) for r in reports))
    return 0


def _summary_line(r: MetricsReport) -> str:
    if r.task == "classification":
        return (
            f"{r.graph}/{r.method}: macro-F1 {r.mean['macro_f1']:.3f}"
            f"+/-{r.std['macro_f1']:.3f} micro-F1 {r.mean['micro_f1']:.3f}"
            f"+/-{r.std['micro_f1']:.3f}"
        )
    return f"{r.graph}/{r.method}: AUC {r.mean['auc']:.3f}+/-{r.std['auc']:.3f}"


def cmd_eval_classify(args: argparse.Namespace) -> int:
    return _run_task(args, "classification", "classification")


def cmd_eval_linkpred(args: argparse.Namespace) -> int:
    return _run_task(args, "link-prediction", "link-prediction")


def cmd_report(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    report_paths = [Path(p) for p in (args.reports or [])]
    if not report_paths:
        report_paths = sorted(out_dir.glob("report.*.json"))
    if not report_paths and not args.embeddings:
        raise InputError(f"no report files found under {out_dir}")
    shown = 0
    for path in report_paths:
        if not path.is_file():
            raise InputError(f"report file not found: {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON: {exc.msg}") from exc
        for entry in payload:
            mean = entry["mean"]
            std = entry["std"]
            metrics = " ".join(
                f"{k} {mean[k]:.4f}+/-{std[k]:.4f}" for k in sorted(mean)
            )
            print(f"{entry['task']} {entry['graph']} {entry['method']}: {metrics}")
            shown += 1
    if args.embeddings:
        matrix = load_embeddings(args.embeddings)
        corpus = _load_filtered_corpus(cfg, out_dir)
        write_projection_tsv(out_dir / "projection.tsv", matrix, corpus.labels)
        print(f"report: wrote projection.tsv for {args.embeddings}")
    elif shown:
        print(f"report: {shown} experiment summaries")
    return 0


def cmd_run_all(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = _output_dir(cfg, args)
    rc = cmd_ingest(args)
    rc = rc or cmd_tags(args)
    corpus = _load_filtered_corpus(cfg, out_dir)
    tagset = _mine_tags(cfg, corpus)
    needed_kinds = sorted({e["graph"] for e in cfg["experiments"]})
    for kind in needed_kinds:
        g = build_graph_variant(corpus, tagset, kind)
        write_edge_list(out_dir / f"edges.{kind}.tsv", g)
    # Showcase walk/train artifacts plus the 2-D projection come from the
    # first experiment's graph and method at the base seed.
    pairs = []
    for e in cfg["experiments"]:
        pair = (e["graph"], e["method"])
        if pair not in pairs:
            pairs.append(pair)
    for kind, method in pairs:
        g = read_edge_list(out_dir / f"edges.{kind}.tsv")
        walk_cfg = _walk_config(cfg, method, int(cfg["base_seed"]))
        corpus_walks = (
            metapath_walks(g, walk_cfg) if method == "metapath" else node2vec_walks(g, walk_cfg)
        )
        write_walks(out_dir / f"walks.{kind}.{method}.txt", corpus_walks)
        matrix = train_embeddings(
            corpus_walks, _train_config(cfg, int(cfg["base_seed"])), nodes=g.nodes
        )
        persist_embeddings(out_dir / f"embeddings.{kind}.{method}.txt", matrix)
    first_kind, first_method = pairs[0]
    showcase = load_embeddings(out_dir / f"embeddings.{first_kind}.{first_method}.txt")
    write_projection_tsv(out_dir / "projection.tsv", showcase, corpus.labels)
    reports = [
        run_experiment(corpus, tagset, _experiment_config(cfg, e))
        for e in cfg["experiments"]
    ]
    write_report_json(out_dir / "report.json", reports)
    write_per_run_tsv(out_dir / "runs.tsv", reports)
    by_task: dict[str, list[MetricsReport]] = {}
    for r in reports:
        by_task.setdefault(r.task, []).append(r)
    for task, group in by_task.items():
        name = "classification" if task == "classification" else "link-prediction"
        write_report_json(out_dir / f"report.{name}.json", group)
    _echo_config(cfg, out_dir)
    print(
        f"run-all: {len(reports)} experiments -> {out_dir / 'report.json'}; "
        + "; ".join(_summary_line(r) for r in reports)
    )
    return 0


def cmd_config(args: argparse.Namespace) -> int:
    if args.print_defaults:
        print(json.dumps(DEFAULTS, indent=2, sort_keys=True))
        return 0
    cfg = load_config(args.config)
    echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
    print(json.dumps(echo, indent=2, sort_keys=True))
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        help="config JSON path, or 'demo' for the bundled example pipeline",
    )
    common.add_argument("--output-dir", help="override the output directory")

    parser = _Parser(prog="jobgraph", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[common], help="parse, validate, and filter the corpus")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tags", parents=[common], help="mine the tag set from the lexicon")
    p.set_defaults(func=cmd_tags)

    p = sub.add_parser("build-graph", parents=[common], help="construct graph edge lists")
    p.add_argument("--kind", choices=list(GRAPH_KINDS) + ["all"], default="all")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("walk", parents=[common], help="generate a walk corpus from an edge list")
    p.add_argument("--kind", choices=GRAPH_KINDS, required=True)
    p.add_argument("--method", choices=METHODS, default="node2vec")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("train", parents=[common], help="train embeddings from a walk corpus")
    p.add_argument("--kind", choices=GRAPH_KINDS, required=True)
    p.add_argument("--method", choices=METHODS, default="node2vec")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-classify", parents=[common], help="title classification experiments")
    p.add_argument("--graph", choices=GRAPH_KINDS)
    p.add_argument("--method", choices=METHODS)
    p.set_defaults(func=cmd_eval_classify)

    p = sub.add_parser("eval-linkpred", parents=[common], help="link prediction experiments")
    p.add_argument("--graph", choices=GRAPH_KINDS)
    p.add_argument("--method", choices=METHODS)
    p.set_defaults(func=cmd_eval_linkpred)

    p = sub.add_parser("report", parents=[common], help="summarize reports; project embeddings")
    p.add_argument("--reports", nargs="*", help="report JSON files (default: output dir)")
    p.add_argument("--embeddings", help="embedding file to project to 2-D")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run-all", parents=[common], help="full pipeline end to end")
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("config", parents=[common], help="print configuration")
    p.add_argument("--print-defaults", action="store_true")
    p.set_defaults(func=cmd_config)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ConsistencyError, NumericError, SamplingError) as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return 3
    except JobGraphError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_entry() -> None:
    raise SystemExit(main())

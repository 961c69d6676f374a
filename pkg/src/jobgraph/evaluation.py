"""Evaluation harness: splits, edge operators, AUC, experiments, projection.

Two protocols are supported end to end:

* title classification: labeled titles split 60/20/20, classifier trained on
  train+val embedding rows, Macro/Micro-F1 reported on test;
* next-transition link prediction: transition-connected title pairs split
  60/20/20 with matched unconnected negatives, embeddings retrained on the
  graph with val/test positives removed, a binary classifier per edge
  operator scored by validation AUC, test AUC reported for the winner.

Every experiment runs `repetitions` times with per-run seeds derived from the
base seed; reports carry per-run records plus mean and population std.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from .classify import evaluate_classification, train_classifier
from .corpus import Corpus
from .errors import ConfigError, InputError, NumericError, SamplingError
from .graphs import (
    HeteroGraph,
    NodeKind,
    NodeRef,
    build_enhanced_job_transition,
    build_job_tag,
    build_job_transition,
    build_job_transition_tag,
    job,
)
from .sgns import EmbeddingMatrix, TrainConfig, train_embeddings
from .tagger import TagSet, corpus_title_tags
from .util import check_at_least, check_fractions, derive_seed, make_rng
from .walks import DEFAULT_METAPATH, WalkConfig, metapath_walks, node2vec_walks

GRAPH_KINDS = ("transition", "enhanced", "job-tag", "transition-tag")
METHODS = ("node2vec", "metapath")
TASKS = ("classification", "link-prediction")
OPERATORS = ("average", "hadamard", "weighted_l1", "weighted_l2", "dot")

# Enumerating candidate negative pairs is exact and cheap below this many
# unordered pairs; denser graphs fall back to rejection sampling.
_ENUMERATION_LIMIT = 500_000


def build_graph_variant(corpus: Corpus, tagset: TagSet, kind: str) -> HeteroGraph:
    """Construct one of the four graph variants from a filtered corpus."""
    if kind not in GRAPH_KINDS:
        raise ConfigError(f"unknown graph kind {kind!r}, expected one of {GRAPH_KINDS}")
    if kind == "transition":
        return build_job_transition(corpus)
    if kind == "enhanced":
        gjj = build_job_transition(corpus)
        return build_enhanced_job_transition(gjj, corpus_title_tags(corpus, tagset))
    if kind == "job-tag":
        return build_job_tag(corpus, tagset)
    gjj = build_job_transition(corpus)
    gjt = build_job_tag(corpus, tagset)
    return build_job_transition_tag(gjj, gjt)


# -- splits ------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    seed: int = 0

    def validate(self) -> None:
        if len(self.ratios) != 3:
            raise ConfigError(f"ratios must have 3 entries, got {self.ratios!r}")
        check_fractions("ratios", self.ratios)


def split_sizes(n: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    """Floor rule: train and val floor their shares, test takes the rest."""
    n_train = int(np.floor(ratios[0] * n))
    n_val = int(np.floor(ratios[1] * n))
    return n_train, n_val, n - n_train - n_val


@dataclass(frozen=True)
class NodeSplit:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]


def make_node_splits(labels: Mapping[str, str], spec: SplitSpec) -> NodeSplit:
    """Shuffle the labeled titles and partition by the floor rule."""
    spec.validate()
    if not labels:
        raise InputError("empty label mapping")
    titles = sorted(labels)
    rng = make_rng(spec.seed, "node-split")
    order = rng.permutation(len(titles))
    shuffled = [titles[i] for i in order]
    n_train, n_val, _ = split_sizes(len(titles), spec.ratios)
    return NodeSplit(
        train=tuple(shuffled[:n_train]),
        val=tuple(shuffled[n_train : n_train + n_val]),
        test=tuple(shuffled[n_train + n_val :]),
    )


Pair = tuple[NodeRef, NodeRef]


@dataclass(frozen=True)
class EdgeSplit:
    """Unordered positive/negative title pairs for link prediction."""

    train_pos: tuple[Pair, ...]
    val_pos: tuple[Pair, ...]
    test_pos: tuple[Pair, ...]
    train_neg: tuple[Pair, ...]
    val_neg: tuple[Pair, ...]
    test_neg: tuple[Pair, ...]


def _canonical(u: NodeRef, v: NodeRef) -> Pair:
    return (u, v) if u <= v else (v, u)


def make_edge_splits(g: HeteroGraph, spec: SplitSpec) -> tuple[EdgeSplit, HeteroGraph]:
    """Split transition-connected pairs and sample matched negatives.

    Positives are unordered pairs joined by a transition in either direction,
    so no pair can appear twice across the six sets. Negatives are unordered
    job pairs with no transition at all. The returned embedding graph is g
    with every val/test positive's transitions removed (both directions);
    node set unchanged.
    """
    spec.validate()
    positives = sorted({_canonical(u, v) for u, v in g.transition_pairs()})
    if not positives:
        raise InputError("graph has no transition edges to split")
    rng = make_rng(spec.seed, "edge-split")
    order = rng.permutation(len(positives))
    shuffled = [positives[i] for i in order]
    n_train, n_val, n_test = split_sizes(len(positives), spec.ratios)
    train_pos = tuple(shuffled[:n_train])
    val_pos = tuple(shuffled[n_train : n_train + n_val])
    test_pos = tuple(shuffled[n_train + n_val :])

    jobs = [n for n in g.nodes if n.kind is NodeKind.JOB]
    total_pairs = len(jobs) * (len(jobs) - 1) // 2
    need = len(positives)
    available = total_pairs - len(positives)
    if need > available:
        raise SamplingError(
            f"graph too dense for negative sampling: need {need} unconnected"
            f" pairs, only {available} exist"
        )
    connected = set(positives)
    rng_neg = make_rng(spec.seed, "edge-negatives")
    negatives: list[Pair]
    if total_pairs <= _ENUMERATION_LIMIT:
        candidates = [
            pair
            for pair in itertools.combinations(jobs, 2)
            if pair not in connected
        ]
        picked = rng_neg.choice(len(candidates), size=need, replace=False)
        negatives = [candidates[i] for i in picked]
    else:
        seen: set[Pair] = set()
        negatives = []
        while len(negatives) < need:
            i, j = rng_neg.integers(len(jobs)), rng_neg.integers(len(jobs))
            if i == j:
                continue
            pair = _canonical(jobs[int(i)], jobs[int(j)])
            if pair in connected or pair in seen:
                continue
            seen.add(pair)
            negatives.append(pair)
    split = EdgeSplit(
        train_pos=train_pos,
        val_pos=val_pos,
        test_pos=test_pos,
        train_neg=tuple(negatives[:n_train]),
        val_neg=tuple(negatives[n_train : n_train + n_val]),
        test_neg=tuple(negatives[n_train + n_val :]),
    )
    embedding_graph = g.without_transition_pairs(val_pos + test_pos)
    return split, embedding_graph


# -- edge operators and AUC --------------------------------------------------


def edge_feature(u: np.ndarray, v: np.ndarray, operator: str) -> np.ndarray | float:
    """Combine two node vectors into an edge representation.

    Vector operators return arrays of the same dimension; "dot" returns a
    scalar. All five are symmetric in their arguments.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise InputError(f"vector shapes differ: {u.shape} vs {v.shape}")
    if operator == "average":
        return (u + v) / 2.0
    if operator == "hadamard":
        return u * v
    if operator == "weighted_l1":
        return np.abs(u - v)
    if operator == "weighted_l2":
        return (u - v) ** 2
    if operator == "dot":
        return float(u @ v)
    raise ConfigError(f"unknown edge operator {operator!r}, expected one of {OPERATORS}")


def edge_feature_matrix(
    matrix: EmbeddingMatrix, pairs: Sequence[Pair], operator: str
) -> np.ndarray:
    """Stack edge features for pairs into a 2-D design matrix."""
    rows = []
    for u, v in pairs:
        feat = edge_feature(matrix.vector(u), matrix.vector(v), operator)
        rows.append(np.atleast_1d(feat))
    return np.vstack(rows) if rows else np.empty((0, 1))


def compute_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outscores a random negative, ties at 1/2.

    Computed by the midrank formula, which equals the exhaustive pairwise
    count exactly (all intermediate quantities are exact halves in float64).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise InputError("scores and labels must be equal-length 1-D sequences")
    if not np.isfinite(s).all():
        raise NumericError("non-finite scores")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("AUC needs at least one positive and one negative")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + 1 + j + 1) / 2.0
        i = j + 1
    r_pos = float(ranks[pos].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


# -- 2-D projection -----------------------------------------------------------


def pca_project_2d(vectors: np.ndarray) -> np.ndarray:
    """Project rows onto the top two principal axes.

    Axis signs are fixed by making each component's largest-magnitude entry
    positive, so output is fully deterministic. A degenerate second axis
    yields zero coordinates there.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InputError("need a 2-D array with at least 2 rows")
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / (X.shape[0] - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1][:2]
    components = eigenvectors[:, order]
    for k in range(components.shape[1]):
        pivot = np.argmax(np.abs(components[:, k]))
        if components[pivot, k] < 0:
            components[:, k] = -components[:, k]
    coords = centered @ components
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((coords.shape[0], 2 - coords.shape[1]))])
    return coords


# -- experiments --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    graph: str
    method: str
    walk: WalkConfig = WalkConfig()
    train: TrainConfig = TrainConfig()
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    l2: float = 5e-4
    operators: tuple[str, ...] = OPERATORS
    repetitions: int = 10
    base_seed: int = 0

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.graph not in GRAPH_KINDS:
            raise ConfigError(f"unknown graph kind {self.graph!r}, expected one of {GRAPH_KINDS}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.method == "metapath" and self.graph in ("transition", "enhanced"):
            raise ConfigError(
                f"metapath walks need tag nodes; graph {self.graph!r} has none"
            )
        if self.task == "link-prediction" and self.graph == "job-tag":
            raise ConfigError("link prediction needs transition edges; job-tag graph has none")
        check_fractions("ratios", self.ratios)
        check_at_least("repetitions", self.repetitions, 1)
        for op in self.operators:
            if op not in OPERATORS:
                raise ConfigError(f"unknown edge operator {op!r}")
        if not self.operators:
            raise ConfigError("operators must be nonempty")
        self.walk.validate()
        self.train.validate()


@dataclass(frozen=True)
class MetricsReport:
    task: str
    graph: str
    method: str
    per_run: tuple[dict, ...]
    mean: dict[str, float]
    std: dict[str, float]
    config: dict


def _fit_embedding(
    cfg: ExperimentConfig, graph: HeteroGraph, walk_seed: int, train_seed: int
) -> EmbeddingMatrix:
    if cfg.method == "metapath":
        walk_cfg = replace(
            cfg.walk, seed=walk_seed, metapath=cfg.walk.metapath or DEFAULT_METAPATH
        )
        walks = metapath_walks(graph, walk_cfg)
    else:
        walk_cfg = replace(cfg.walk, seed=walk_seed, metapath=None)
        walks = node2vec_walks(graph, walk_cfg)
    return train_embeddings(walks, replace(cfg.train, seed=train_seed), nodes=graph.nodes)


def _aggregate(records: list[dict], keys: tuple[str, ...]) -> tuple[dict, dict]:
    mean = {k: float(np.mean([r[k] for r in records])) for k in keys}
    std = {k: float(np.std([r[k] for r in records])) for k in keys}  # population std
    return mean, std


def _config_provenance(cfg: ExperimentConfig, seeds: list[dict]) -> dict:
    walk = {
        "walk_length": cfg.walk.walk_length,
        "walks_per_node": cfg.walk.walks_per_node,
        "p": cfg.walk.p,
        "q": cfg.walk.q,
        "respect_direction": cfg.walk.respect_direction,
        "metapath": [k.value for k in cfg.walk.metapath] if cfg.walk.metapath else None,
    }
    train = {
        "dim": cfg.train.dim,
        "window": cfg.train.window,
        "negatives": cfg.train.negatives,
        "epochs": cfg.train.epochs,
        "initial_step_size": cfg.train.initial_step_size,
        "deterministic": cfg.train.deterministic,
    }
    return {
        "task": cfg.task,
        "graph": cfg.graph,
        "method": cfg.method,
        "walk": walk,
        "train": train,
        "ratios": list(cfg.ratios),
        "l2": cfg.l2,
        "operators": list(cfg.operators),
        "repetitions": cfg.repetitions,
        "base_seed": cfg.base_seed,
        "seeds": seeds,
    }


def run_experiment(corpus: Corpus, tagset: TagSet, cfg: ExperimentConfig) -> MetricsReport:
    """Run one experiment descriptor end to end and aggregate its repetitions."""
    cfg.validate()
    graph = build_graph_variant(corpus, tagset, cfg.graph)
    records: list[dict] = []
    seeds: list[dict] = []
    for r in range(cfg.repetitions):
        run_seeds = {
            "walk": derive_seed(cfg.base_seed, r, "walk"),
            "train": derive_seed(cfg.base_seed, r, "train"),
            "split": derive_seed(cfg.base_seed, r, "split"),
        }
        seeds.append(run_seeds)
        if cfg.task == "classification":
            records.append(_run_classification(corpus, graph, cfg, r, run_seeds))
        else:
            records.append(_run_link_prediction(graph, cfg, r, run_seeds))
    keys = ("macro_f1", "micro_f1") if cfg.task == "classification" else ("auc",)
    mean, std = _aggregate(records, keys)
    return MetricsReport(
        task=cfg.task,
        graph=cfg.graph,
        method=cfg.method,
        per_run=tuple(records),
        mean=mean,
        std=std,
        config=_config_provenance(cfg, seeds),
    )


def _run_classification(
    corpus: Corpus, graph: HeteroGraph, cfg: ExperimentConfig, run: int, run_seeds: dict
) -> dict:
    if len(set(corpus.labels.values())) < 2:
        raise InputError("classification needs at least two occupation labels")
    matrix = _fit_embedding(cfg, graph, run_seeds["walk"], run_seeds["train"])
    split = make_node_splits(corpus.labels, SplitSpec(cfg.ratios, run_seeds["split"]))
    # Unsupervised embeddings: the classifier may use train+val rows.
    fit_titles = split.train + split.val
    model = train_classifier(
        matrix.rows(job(t) for t in fit_titles),
        [corpus.labels[t] for t in fit_titles],
        l2=cfg.l2,
    )
    macro, micro = evaluate_classification(
        model,
        matrix.rows(job(t) for t in split.test),
        [corpus.labels[t] for t in split.test],
    )
    return {"run": run, "seeds": run_seeds, "macro_f1": macro, "micro_f1": micro}


def _run_link_prediction(
    graph: HeteroGraph, cfg: ExperimentConfig, run: int, run_seeds: dict
) -> dict:
    split, embedding_graph = make_edge_splits(graph, SplitSpec(cfg.ratios, run_seeds["split"]))
    matrix = _fit_embedding(cfg, embedding_graph, run_seeds["walk"], run_seeds["train"])
    y_train = [1] * len(split.train_pos) + [0] * len(split.train_neg)
    y_val = np.array([1] * len(split.val_pos) + [0] * len(split.val_neg))
    y_test = np.array([1] * len(split.test_pos) + [0] * len(split.test_neg))
    train_pairs = split.train_pos + split.train_neg
    val_pairs = split.val_pos + split.val_neg
    test_pairs = split.test_pos + split.test_neg

    best_operator = None
    best_val = -np.inf
    best_model = None
    val_auc_by_operator: dict[str, float] = {}
    for operator in cfg.operators:
        X_train = edge_feature_matrix(matrix, train_pairs, operator)
        model = train_classifier(X_train, y_train, l2=cfg.l2)
        positive_col = int(np.nonzero(model.classes_ == 1)[0][0])
        val_scores = model.predict_proba(edge_feature_matrix(matrix, val_pairs, operator))
        val_auc = compute_auc(val_scores[:, positive_col], y_val)
        val_auc_by_operator[operator] = val_auc
        if val_auc > best_val:
            best_operator, best_val, best_model = operator, val_auc, model
    assert best_model is not None
    positive_col = int(np.nonzero(best_model.classes_ == 1)[0][0])
    test_scores = best_model.predict_proba(
        edge_feature_matrix(matrix, test_pairs, best_operator)
    )
    auc = compute_auc(test_scores[:, positive_col], y_test)
    return {
        "run": run,
        "seeds": run_seeds,
        "operator": best_operator,
        "val_auc_by_operator": val_auc_by_operator,
        "val_auc": best_val,
        "auc": auc,
    }


# -- report serialization ------------------------------------------------------


def _round_floats(obj: object, ndigits: int = 10) -> object:
    """Round every float in a JSON-ready structure for byte-stable output."""
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "task": report.task,
        "graph": report.graph,
        "method": report.method,
        "per_run": list(report.per_run),
        "mean": report.mean,
        "std": report.std,
        "config": report.config,
    }


def write_report_json(target: str | Path | IO[str], reports: Sequence[MetricsReport]) -> None:
    """Serialize reports with sorted keys and rounded floats (byte stable)."""
    payload = _round_floats([report_to_dict(r) for r in reports])
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


def write_per_run_tsv(target: str | Path | IO[str], reports: Sequence[MetricsReport]) -> None:
    """Flat per-run scores for plotting."""

    def _dump(fh: IO[str]) -> None:
        fh.write("task\tgraph\tmethod\trun\tmetric\tvalue\toperator\n")
        for rep in reports:
            keys = ("macro_f1", "micro_f1") if rep.task == "classification" else ("auc",)
            for rec in rep.per_run:
                for key in keys:
                    operator = rec.get("operator", "")
                    fh.write(
                        f"{rep.task}\t{rep.graph}\t{rep.method}\t{rec['run']}\t"
                        f"{key}\t{round(float(rec[key]), 10)!r}\t{operator}\n"
                    )

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)


def write_projection_tsv(
    target: str | Path | IO[str],
    matrix: EmbeddingMatrix,
    labels: Mapping[str, str],
) -> None:
    """2-D PCA coordinates of job nodes: (node key, class, x, y) rows."""
    jobs = [n for n in sorted(matrix.index) if n.kind is NodeKind.JOB]
    if len(jobs) < 2:
        raise InputError("need at least 2 job nodes to project")
    coords = pca_project_2d(matrix.rows(jobs))

    def _dump(fh: IO[str]) -> None:
        fh.write("node\tclass\tx\ty\n")
        for node, (x, y) in zip(jobs, coords):
            label = labels.get(node.key, "")
            fh.write(f"{node.key}\t{label}\t{round(float(x), 10)!r}\t{round(float(y), 10)!r}\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)

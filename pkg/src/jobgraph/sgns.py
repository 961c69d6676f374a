"""Skip-gram with negative sampling, trained from scratch.

Walk corpora are turned into (center, context) pairs inside a symmetric
window; each pair takes one SGD step on the loss

    -log sigmoid(u.v) - sum_i log sigmoid(-u.n_i)

with analytic gradients, negatives drawn from the unigram^(3/4) distribution
over walk-corpus node frequencies, and a step size decaying linearly from
initial_step_size to 1e-4 of itself over all pair updates. Input vectors are
the published embedding; output (context) vectors exist only during training.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, InputError, NumericError, SamplingError
from .graphs import NodeRef
from .util import check_at_least, check_positive, make_rng
from .walks import WalkCorpus, _node_to_token, node_from_token

_FINAL_STEP_FRACTION = 1e-4
_COLLISION_RETRIES = 5


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 128
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_step_size: float = 0.025
    seed: int = 0
    deterministic: bool = True
    workers: int = 4

    def validate(self) -> None:
        check_at_least("dim", self.dim, 1)
        check_at_least("window", self.window, 1)
        check_at_least("negatives", self.negatives, 1)
        check_at_least("epochs", self.epochs, 0)
        check_positive("initial_step_size", self.initial_step_size)
        check_at_least("workers", self.workers, 1)


@dataclass
class EmbeddingMatrix:
    """Dense embeddings with a node-to-row index.

    input_vectors holds the embedding proper; output_vectors are the training
    context parameters (zeros when loaded from disk). epoch_losses records the
    mean pair loss per training epoch for diagnostics.
    """

    index: dict[NodeRef, int]
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    epoch_losses: tuple[float, ...] = ()

    @property
    def dim(self) -> int:
        return int(self.input_vectors.shape[1])

    def vector(self, node: NodeRef) -> np.ndarray:
        row = self.index.get(node)
        if row is None:
            raise ConsistencyError(f"node not in embedding index: {node.prefixed()}")
        return self.input_vectors[row]

    def rows(self, nodes: Iterable[NodeRef]) -> np.ndarray:
        refs = list(nodes)
        out = np.empty((len(refs), self.dim))
        for i, node in enumerate(refs):
            out[i] = self.vector(node)
        return out


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.asarray(x)))


def log_sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    # log sigmoid(x) = -log(1 + e^-x), stable for large |x|
    return -np.logaddexp(0.0, -np.asarray(x))


def sgns_step(
    center: np.ndarray,
    context: np.ndarray,
    negatives: np.ndarray | Sequence[np.ndarray],
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Loss and analytic gradients for one (center, context, negatives) triple.

    Returns (loss, (grad_center, grad_context, grad_negatives)) where
    grad_negatives has one row per negative vector. Raises NumericError on
    non-finite inputs.
    """
    u = np.asarray(center, dtype=np.float64)
    v = np.asarray(context, dtype=np.float64)
    negs = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if not (np.isfinite(u).all() and np.isfinite(v).all() and np.isfinite(negs).all()):
        raise NumericError("non-finite vector passed to sgns_step")
    pos_score = float(v @ u)
    neg_scores = negs @ u
    loss = float(np.logaddexp(0.0, -pos_score) + np.logaddexp(0.0, neg_scores).sum())
    sig_pos = float(sigmoid(pos_score))
    sig_negs = sigmoid(neg_scores)
    grad_center = (sig_pos - 1.0) * v + sig_negs @ negs
    grad_context = (sig_pos - 1.0) * u
    grad_negatives = sig_negs[:, None] * u[None, :]
    return loss, (grad_center, grad_context, grad_negatives)


class NegativeSampler:
    """Draws node rows proportional to walk frequency raised to a power."""

    def __init__(self, counts: np.ndarray, power: float = 0.75) -> None:
        weights = np.asarray(counts, dtype=np.float64) ** power
        total = weights.sum()
        if total <= 0:
            raise SamplingError("no node occurrences to sample negatives from")
        self.probabilities = weights / total

    def draw(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
        return rng.choice(len(self.probabilities), size=size, p=self.probabilities)


def _extract_pairs(
    walks: Sequence[tuple[NodeRef, ...]], index: dict[NodeRef, int], window: int
) -> tuple[np.ndarray, np.ndarray]:
    """All in-window (center, context) index pairs in corpus order."""
    centers: list[int] = []
    contexts: list[int] = []
    for walk in walks:
        rows = []
        for node in walk:
            row = index.get(node)
            if row is None:
                raise ConsistencyError(
                    f"walk references node outside the registered set: {node.prefixed()}"
                )
            rows.append(row)
        n = len(rows)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(rows[i])
                    contexts.append(rows[j])
    return (
        np.asarray(centers, dtype=np.int64),
        np.asarray(contexts, dtype=np.int64),
    )


def _train_span(
    w_in: np.ndarray,
    w_out: np.ndarray,
    centers: np.ndarray,
    contexts: np.ndarray,
    negatives: np.ndarray,
    positions: np.ndarray,
    total_updates: int,
    alpha0: float,
) -> float:
    """Run SGD over one span of pairs; returns the summed pair loss.

    positions carries each pair's global schedule slot so the step size is a
    function of the pair, not of execution order; parallel workers can
    therefore share this code.
    """
    decay = (1.0 - _FINAL_STEP_FRACTION) / max(1, total_updates)
    loss_sum = 0.0
    for row in range(len(centers)):
        c = centers[row]
        ctx = contexts[row]
        negs = negatives[row]
        if (negs < 0).any():
            negs = negs[negs >= 0]
        alpha = alpha0 * (1.0 - decay * positions[row])
        u = w_in[c]
        v = w_out[ctx]
        neg_vecs = w_out[negs]
        pos_score = v @ u
        neg_scores = neg_vecs @ u
        loss_sum += np.logaddexp(0.0, -pos_score) + np.logaddexp(0.0, neg_scores).sum()
        sig_pos = 1.0 / (1.0 + np.exp(-pos_score))
        sig_negs = 1.0 / (1.0 + np.exp(-neg_scores))
        g_pos = sig_pos - 1.0
        grad_u = g_pos * v + sig_negs @ neg_vecs
        w_out[ctx] = v - alpha * g_pos * u
        # duplicate negative ids must each contribute, hence subtract.at
        np.subtract.at(w_out, negs, alpha * np.outer(sig_negs, u))
        w_in[c] = u - alpha * grad_u
    return float(loss_sum)


def train_embeddings(
    walks: WalkCorpus | Sequence[tuple[NodeRef, ...]],
    cfg: TrainConfig,
    nodes: Iterable[NodeRef] | None = None,
) -> EmbeddingMatrix:
    """Train an embedding over a walk corpus.

    nodes, when given, fixes the embedding index (every row present even for
    nodes that never entered a walk); a walk node outside it is a consistency
    error. Otherwise the index covers the distinct walk nodes. Identical
    seeds and deterministic mode reproduce results bit for bit.
    """
    cfg.validate()
    walk_seq = walks.walks if isinstance(walks, WalkCorpus) else tuple(walks)
    if not walk_seq:
        raise InputError("empty walk corpus")
    if nodes is None:
        node_list = sorted({n for walk in walk_seq for n in walk})
    else:
        node_list = sorted(set(nodes))
    index = {node: i for i, node in enumerate(node_list)}
    n = len(node_list)

    rng_init = make_rng(cfg.seed, "init")
    w_in = (rng_init.random((n, cfg.dim)) - 0.5) / cfg.dim
    w_out = np.zeros((n, cfg.dim))

    centers, contexts = _extract_pairs(walk_seq, index, cfg.window)
    pair_count = len(centers)
    if cfg.epochs == 0 or pair_count == 0:
        return EmbeddingMatrix(index=index, input_vectors=w_in, output_vectors=w_out)

    counts = np.zeros(n)
    for walk in walk_seq:
        for node in walk:
            counts[index[node]] += 1
    sampler = NegativeSampler(counts)

    total_updates = pair_count * cfg.epochs
    epoch_losses: list[float] = []
    for epoch in range(cfg.epochs):
        rng_epoch = make_rng(cfg.seed, "train", epoch)
        negatives = sampler.draw(rng_epoch, (pair_count, cfg.negatives))
        # Resample collisions with the positive context; after bounded
        # retries the slot is skipped (-1 sentinel filtered in _train_span).
        for row in np.nonzero((negatives == contexts[:, None]).any(axis=1))[0]:
            for col in range(cfg.negatives):
                tries = 0
                while negatives[row, col] == contexts[row]:
                    if tries == _COLLISION_RETRIES:
                        negatives[row, col] = -1
                        break
                    negatives[row, col] = sampler.draw(rng_epoch, ())
                    tries += 1
        positions = np.arange(pair_count, dtype=np.float64) + epoch * pair_count
        if cfg.deterministic or cfg.workers == 1:
            loss = _train_span(
                w_in, w_out, centers, contexts, negatives, positions,
                total_updates, cfg.initial_step_size,
            )
        else:
            # Lock-free parallel mode: workers share the weight matrices and
            # race benignly; the schedule stays position-based.
            bounds = np.linspace(0, pair_count, cfg.workers + 1, dtype=int)
            with concurrent.futures.ThreadPoolExecutor(cfg.workers) as pool:
                futures = [
                    pool.submit(
                        _train_span,
                        w_in, w_out,
                        centers[lo:hi], contexts[lo:hi], negatives[lo:hi],
                        positions[lo:hi], total_updates, cfg.initial_step_size,
                    )
                    for lo, hi in zip(bounds[:-1], bounds[1:])
                    if hi > lo
                ]
                loss = sum(f.result() for f in futures)
        epoch_losses.append(loss / pair_count)

    return EmbeddingMatrix(
        index=index,
        input_vectors=w_in,
        output_vectors=w_out,
        epoch_losses=tuple(epoch_losses),
    )


# -- text persistence -------------------------------------------------------


def persist_embeddings(target: str | Path | IO[str], matrix: EmbeddingMatrix) -> None:
    """Write the word2vec-style text format: "count dim" header, then one
    line per node with its kind-prefixed, percent-escaped key and the input
    vector. repr-formatted floats round-trip bit for bit.
    """

    def _dump(fh: IO[str]) -> None:
        fh.write(f"{len(matrix.index)} {matrix.dim}\n")
        by_row = sorted(matrix.index.items(), key=lambda kv: kv[1])
        for node, row in by_row:
            vec = " ".join(repr(float(x)) for x in matrix.input_vectors[row])
            fh.write(f"{_node_to_token(node)} {vec}\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)


def load_embeddings(source: str | Path | IO[str]) -> EmbeddingMatrix:
    """Parse the text format back; output vectors come back as zeros."""

    def _load(lines: list[str]) -> EmbeddingMatrix:
        if not lines:
            raise InputError("line 1: missing header")
        header = lines[0].split()
        if len(header) != 2:
            raise InputError("line 1: header must be '<count> <dim>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise InputError("line 1: header must hold two integers") from None
        if count < 0 or dim < 1:
            raise InputError("line 1: invalid count or dim")
        index: dict[NodeRef, int] = {}
        vectors = np.empty((count, dim))
        row = 0
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise InputError(
                    f"line {lineno}: expected {dim + 1} columns, got {len(parts)}"
                )
            node = node_from_token(parts[0], lineno)
            if node in index:
                raise InputError(f"line {lineno}: duplicate key {parts[0]!r}")
            if row >= count:
                raise InputError(f"line {lineno}: more rows than header count {count}")
            try:
                vectors[row] = [float(x) for x in parts[1:]]
            except ValueError:
                raise InputError(f"line {lineno}: non-numeric vector entry") from None
            index[node] = row
            row += 1
        if row != count:
            raise InputError(f"header promised {count} rows, file holds {row}")
        return EmbeddingMatrix(
            index=index, input_vectors=vectors, output_vectors=np.zeros((count, dim))
        )

    if isinstance(source, (str, Path)):
        try:
            fh = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
        with fh:
            return _load(fh.read().splitlines())
    return _load(source.read().splitlines())

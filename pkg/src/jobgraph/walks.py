"""Random-walk corpus generation.

Two samplers over a HeteroGraph:

* second-order biased walks: next-hop weights depend on the previous node
  (return weight 1/p, weight 1 to neighbors of the previous node, weight 1/q
  otherwise), with a uniform first hop;
* metapath-guided walks: a cyclic node-kind pattern restricts each hop to a
  uniform draw over neighbors of the required kind.

Every node heads exactly walks_per_node walks, each generated from its own
RNG stream derived from (seed, start ordinal, walk index), so output is
independent of scheduling and reproducible node by node. Dead ends truncate
walks early; isolated nodes yield singleton walks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError, InputError
from .graphs import HeteroGraph, NodeKind, NodeRef
from .util import check_at_least, check_positive, make_rng

DEFAULT_METAPATH = (NodeKind.JOB, NodeKind.TAG, NodeKind.JOB)


@dataclass(frozen=True)
class WalkConfig:
    """Sampler parameters.

    walk_length counts nodes, so a walk has at most walk_length - 1 hops.
    metapath, when set, selects the metapath sampler (p and q are ignored
    there) and must start and end with the same node kind.
    """

    walk_length: int = 10
    walks_per_node: int = 50
    p: float = 1.0
    q: float = 1.0
    respect_direction: bool = False
    metapath: tuple[NodeKind, ...] | None = None
    seed: int = 0

    def validate(self) -> None:
        check_at_least("walk_length", self.walk_length, 1)
        check_at_least("walks_per_node", self.walks_per_node, 1)
        check_positive("p", self.p)
        check_positive("q", self.q)
        if self.metapath is not None:
            if len(self.metapath) < 2:
                raise ConfigError("metapath needs at least two kinds")
            if self.metapath[0] != self.metapath[-1]:
                raise ConfigError(
                    f"metapath must be cyclic (same first and last kind), got "
                    f"{tuple(k.value for k in self.metapath)}"
                )


@dataclass(frozen=True)
class WalkCorpus:
    walks: tuple[tuple[NodeRef, ...], ...]
    config: WalkConfig

    def __len__(self) -> int:
        return len(self.walks)

    def node_frequencies(self) -> dict[NodeRef, int]:
        freq: dict[NodeRef, int] = {}
        for walk in self.walks:
            for node in walk:
                freq[node] = freq.get(node, 0) + 1
        return freq


def step_distribution(
    g: HeteroGraph,
    prev: NodeRef | None,
    current: NodeRef,
    cfg: WalkConfig,
) -> tuple[tuple[NodeRef, ...], np.ndarray]:
    """Candidates and normalized next-hop probabilities for one walk step.

    With prev None (first hop) the draw is uniform. Exposed separately so the
    transition rule can be checked exactly against enumeration.
    """
    nbrs = g.neighbors(current, cfg.respect_direction)
    if not nbrs:
        return (), np.empty(0)
    if prev is None:
        probs = np.full(len(nbrs), 1.0 / len(nbrs))
        return nbrs, probs
    prev_adj = g.neighbor_set(prev, cfg.respect_direction)
    weights = np.empty(len(nbrs))
    for i, x in enumerate(nbrs):
        if x == prev:
            weights[i] = 1.0 / cfg.p
        elif x in prev_adj:
            weights[i] = 1.0
        else:
            weights[i] = 1.0 / cfg.q
    return nbrs, weights / weights.sum()


def _biased_walk(
    g: HeteroGraph, start: NodeRef, cfg: WalkConfig, rng: np.random.Generator
) -> tuple[NodeRef, ...]:
    walk = [start]
    prev: NodeRef | None = None
    while len(walk) < cfg.walk_length:
        nbrs, probs = step_distribution(g, prev, walk[-1], cfg)
        if not nbrs:
            break
        # Inverse-CDF draw keeps one uniform per step regardless of degree.
        idx = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        idx = min(idx, len(nbrs) - 1)
        prev = walk[-1]
        walk.append(nbrs[idx])
    return tuple(walk)


def node2vec_walks(g: HeteroGraph, cfg: WalkConfig) -> WalkCorpus:
    """Second-order biased walk corpus, walks_per_node from every node.

    Edge kinds are ignored: any adjacent node is a candidate, so transition
    and enhanced edges are indistinguishable here. Ordering is (start-node
    ordinal, walk index).
    """
    cfg.validate()
    if cfg.metapath is not None:
        raise ConfigError("metapath set; use metapath_walks for metapath sampling")
    if len(g) == 0:
        raise ConfigError("cannot walk an empty graph")
    walks: list[tuple[NodeRef, ...]] = []
    for ordinal, start in enumerate(g.nodes):
        for w in range(cfg.walks_per_node):
            rng = make_rng(cfg.seed, ordinal, w)
            walks.append(_biased_walk(g, start, cfg, rng))
    return WalkCorpus(walks=tuple(walks), config=cfg)


def _metapath_walk(
    g: HeteroGraph,
    start: NodeRef,
    pattern: Sequence[NodeKind],
    cfg: WalkConfig,
    rng: np.random.Generator,
) -> tuple[NodeRef, ...]:
    # Cyclic extension drops the repeated endpoint: J-T-J yields J,T,J,T,...
    period = len(pattern) - 1
    walk = [start]
    while len(walk) < cfg.walk_length:
        want = pattern[len(walk) % period]
        candidates = [
            x for x in g.neighbors(walk[-1], cfg.respect_direction) if x.kind is want
        ]
        if not candidates:
            break
        walk.append(candidates[int(rng.integers(len(candidates)))])
    return tuple(walk)


def metapath_walks(g: HeteroGraph, cfg: WalkConfig) -> WalkCorpus:
    """Metapath-guided walk corpus from every node of the pattern's head kind."""
    cfg.validate()
    if cfg.metapath is None:
        raise ConfigError("metapath_walks requires cfg.metapath")
    present = {n.kind for n in g.nodes}
    missing = [k.value for k in set(cfg.metapath) - present]
    if missing:
        raise ConfigError(f"metapath references node kinds absent from graph: {sorted(missing)}")
    starts = [n for n in g.nodes if n.kind is cfg.metapath[0]]
    walks: list[tuple[NodeRef, ...]] = []
    for ordinal, start in enumerate(starts):
        for w in range(cfg.walks_per_node):
            rng = make_rng(cfg.seed, ordinal, w)
            walks.append(_metapath_walk(g, start, cfg.metapath, cfg, rng))
    return WalkCorpus(walks=tuple(walks), config=cfg)


# -- text round trip --------------------------------------------------------


def escape_key(key: str) -> str:
    return key.replace("%", "%25").replace(" ", "%20")


def unescape_key(key: str) -> str:
    return key.replace("%20", " ").replace("%25", "%")


def _node_to_token(node: NodeRef) -> str:
    prefix = "J:" if node.kind is NodeKind.JOB else "T:"
    return prefix + escape_key(node.key)


def node_from_token(token: str, lineno: int = 0) -> NodeRef:
    where = f"line {lineno}: " if lineno else ""
    if len(token) < 3 or token[1] != ":":
        raise InputError(f"{where}bad walk token {token!r}")
    prefix, key = token[0], unescape_key(token[2:])
    if prefix == "J":
        return NodeRef(NodeKind.JOB, key)
    if prefix == "T":
        return NodeRef(NodeKind.TAG, key)
    raise InputError(f"{where}unknown node prefix in token {token!r}")


def write_walks(target: str | Path | IO[str], corpus: WalkCorpus) -> None:
    """One walk per line, kind-prefixed keys separated by single spaces.

    Spaces inside keys are percent-escaped so the format stays whitespace
    splittable.
    """

    def _dump(fh: IO[str]) -> None:
        for walk in corpus.walks:
            fh.write(" ".join(_node_to_token(n) for n in walk) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)


def read_walks(source: str | Path | IO[str]) -> tuple[tuple[NodeRef, ...], ...]:
    def _load(lines: Iterator[str]) -> tuple[tuple[NodeRef, ...], ...]:
        walks = []
        for lineno, line in enumerate(lines, start=1):
            tokens = line.split()
            if not tokens:
                continue
            walks.append(tuple(node_from_token(t, lineno) for t in tokens))
        return tuple(walks)

    if isinstance(source, (str, Path)):
        try:
            fh = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
        with fh:
            return _load(iter(fh))
    return _load(iter(source))

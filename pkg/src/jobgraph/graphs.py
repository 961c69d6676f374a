"""Typed career graphs over job-title and tag nodes.

Four constructions share one container:

* transition graph: directed job-to-job edges from consecutive records, with
  multiplicities;
* enhanced transition graph: the transition graph plus bidirectional edges
  between any two titles sharing a tag;
* job-tag graph: bidirectional edges between titles and their tags;
* transition-tag graph: transition edges and job-tag edges combined.

Edge kinds are stored as a set of flags per ordered node pair, so a pair that
is both a transition and tag-induced stays a single adjacency entry while
each kind keeps its own semantics (enhanced and has-tag memberships are
always symmetric, transitions are not).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .corpus import Corpus
from .errors import ConsistencyError, InputError
from .tagger import TagSet, corpus_title_tags


class NodeKind(str, Enum):
    JOB = "job"
    TAG = "tag"


class EdgeKind(str, Enum):
    TRANSITION = "transition"
    ENHANCED = "enhanced"
    HAS_TAG = "has_tag"


@dataclass(frozen=True, order=True)
class NodeRef:
    kind: NodeKind
    key: str

    def prefixed(self) -> str:
        return ("J:" if self.kind is NodeKind.JOB else "T:") + self.key


def job(key: str) -> NodeRef:
    return NodeRef(NodeKind.JOB, key)


def tag(key: str) -> NodeRef:
    return NodeRef(NodeKind.TAG, key)


class HeteroGraph:
    """Immutable-by-convention typed multigraph with per-pair edge-kind flags.

    Mutation happens only through the module's constructors (and from_edges);
    adjacency indexes are built lazily and invalidated on every edit.
    """

    def __init__(self) -> None:
        self._nodes: set[NodeRef] = set()
        self._kinds: dict[tuple[NodeRef, NodeRef], set[EdgeKind]] = {}
        self._mult: dict[tuple[NodeRef, NodeRef], int] = {}
        self._index: dict[str, dict] | None = None

    # -- construction ----------------------------------------------------

    def add_node(self, ref: NodeRef) -> None:
        self._nodes.add(ref)
        self._index = None

    def add_edge(self, src: NodeRef, dst: NodeRef, kind: EdgeKind, count: int = 1) -> None:
        if src == dst:
            raise ConsistencyError(f"self-loop rejected: {src.prefixed()}")
        self._nodes.add(src)
        self._nodes.add(dst)
        self._kinds.setdefault((src, dst), set()).add(kind)
        if kind is EdgeKind.TRANSITION:
            self._mult[(src, dst)] = self._mult.get((src, dst), 0) + count
        self._index = None

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[NodeRef, NodeRef, EdgeKind]],
        nodes: Iterable[NodeRef] = (),
    ) -> "HeteroGraph":
        g = cls()
        for ref in nodes:
            g.add_node(ref)
        for src, dst, kind in edges:
            g.add_edge(src, dst, kind)
        return g

    def copy(self) -> "HeteroGraph":
        g = HeteroGraph()
        g._nodes = set(self._nodes)
        g._kinds = {pair: set(kinds) for pair, kinds in self._kinds.items()}
        g._mult = dict(self._mult)
        return g

    def without_transition_pairs(
        self, pairs: Iterable[tuple[NodeRef, NodeRef]]
    ) -> "HeteroGraph":
        """Copy with both directed transitions of each given pair removed.

        Other edge kinds on the same pairs survive; the node set is
        unchanged, so embedding indexes stay aligned.
        """
        g = self.copy()
        for a, b in pairs:
            for u, v in ((a, b), (b, a)):
                kinds = g._kinds.get((u, v))
                if kinds and EdgeKind.TRANSITION in kinds:
                    kinds.discard(EdgeKind.TRANSITION)
                    g._mult.pop((u, v), None)
                    if not kinds:
                        del g._kinds[(u, v)]
        g._index = None
        return g

    # -- basic queries ---------------------------------------------------

    @property
    def nodes(self) -> tuple[NodeRef, ...]:
        """All nodes, sorted by (kind, key) for deterministic iteration."""
        return self._ensure_index()["nodes"]

    def jobs(self) -> tuple[NodeRef, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.JOB)

    def tags(self) -> tuple[NodeRef, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.TAG)

    def __contains__(self, ref: NodeRef) -> bool:
        return ref in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def edge_kinds(self, src: NodeRef, dst: NodeRef) -> frozenset[EdgeKind]:
        return frozenset(self._kinds.get((src, dst), ()))

    def has_edge(self, src: NodeRef, dst: NodeRef, kind: EdgeKind | None = None) -> bool:
        kinds = self._kinds.get((src, dst))
        if not kinds:
            return False
        return kind is None or kind in kinds

    def has_link(self, a: NodeRef, b: NodeRef, kind: EdgeKind | None = None) -> bool:
        """Edge in either direction."""
        return self.has_edge(a, b, kind) or self.has_edge(b, a, kind)

    def multiplicity(self, src: NodeRef, dst: NodeRef) -> int:
        return self._mult.get((src, dst), 0)

    def edge_triples(self) -> list[tuple[NodeRef, NodeRef, EdgeKind]]:
        """Every (src, dst, kind) membership, sorted."""
        out = [
            (src, dst, kind)
            for (src, dst), kinds in self._kinds.items()
            for kind in kinds
        ]
        out.sort(key=lambda t: (t[0], t[1], t[2].value))
        return out

    def transition_pairs(self) -> list[tuple[NodeRef, NodeRef]]:
        """Directed transition edges, sorted."""
        return sorted(p for p, kinds in self._kinds.items() if EdgeKind.TRANSITION in kinds)

    # -- adjacency -------------------------------------------------------

    def _ensure_index(self) -> dict[str, dict]:
        if self._index is None:
            out: dict[NodeRef, set[NodeRef]] = {n: set() for n in self._nodes}
            inn: dict[NodeRef, set[NodeRef]] = {n: set() for n in self._nodes}
            for src, dst in self._kinds:
                out[src].add(dst)
                inn[dst].add(src)
            und = {n: out[n] | inn[n] for n in self._nodes}
            self._index = {
                "nodes": tuple(sorted(self._nodes)),
                "out": {n: tuple(sorted(s)) for n, s in out.items()},
                "in": {n: tuple(sorted(s)) for n, s in inn.items()},
                "und": {n: tuple(sorted(s)) for n, s in und.items()},
                "und_set": {n: frozenset(s) for n, s in und.items()},
                "out_set": {n: frozenset(s) for n, s in out.items()},
            }
        return self._index

    def out_neighbors(self, ref: NodeRef) -> tuple[NodeRef, ...]:
        return self._ensure_index()["out"][ref]

    def in_neighbors(self, ref: NodeRef) -> tuple[NodeRef, ...]:
        return self._ensure_index()["in"][ref]

    def neighbors(self, ref: NodeRef, respect_direction: bool = False) -> tuple[NodeRef, ...]:
        idx = self._ensure_index()
        return idx["out"][ref] if respect_direction else idx["und"][ref]

    def neighbor_set(self, ref: NodeRef, respect_direction: bool = False) -> frozenset[NodeRef]:
        idx = self._ensure_index()
        return idx["out_set"][ref] if respect_direction else idx["und_set"][ref]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeteroGraph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and {p: frozenset(k) for p, k in self._kinds.items()}
            == {p: frozenset(k) for p, k in other._kinds.items()}
            and self._mult == other._mult
        )


# -- constructors ---------------------------------------------------------


def build_job_transition(corpus: Corpus) -> HeteroGraph:
    """Directed graph of consecutive-record title transitions.

    Every title becomes a node even when isolated. Self-transitions
    (consecutive records with the same normalized title) are skipped;
    repeated transitions accumulate multiplicity.
    """
    g = HeteroGraph()
    for title in corpus.titles:
        g.add_node(job(title))
    for h in corpus.histories:
        for a, b in itertools.pairwise(h.records):
            if a.title_norm == b.title_norm:
                continue
            g.add_edge(job(a.title_norm), job(b.title_norm), EdgeKind.TRANSITION)
    return g


def build_enhanced_job_transition(
    g: HeteroGraph, title_tags: Mapping[str, Iterable[str]]
) -> HeteroGraph:
    """Add bidirectional enhanced edges between titles sharing any tag.

    The input graph is not modified. Only titles present as job nodes in g
    participate; the node set is unchanged and the transition edge set of the
    output is a superset (in fact equal) of the input's.
    """
    out = g.copy()
    present = {n.key for n in g.nodes if n.kind is NodeKind.JOB}
    by_tag: dict[str, list[str]] = {}
    for title, tags_ in title_tags.items():
        if title not in present:
            continue
        for t in tags_:
            by_tag.setdefault(t, []).append(title)
    linked: set[tuple[str, str]] = set()
    for members in by_tag.values():
        members.sort()
        for x, y_ in itertools.combinations(members, 2):
            linked.add((x, y_))
    for x, y_ in sorted(linked):
        out.add_edge(job(x), job(y_), EdgeKind.ENHANCED)
        out.add_edge(job(y_), job(x), EdgeKind.ENHANCED)
    return out


def build_job_tag(corpus: Corpus, tagset: TagSet) -> HeteroGraph:
    """Bipartite-style graph joining titles to their tags, both directions.

    Every corpus title and every tag of the tag set becomes a node, isolated
    or not.
    """
    g = HeteroGraph()
    for title in corpus.titles:
        g.add_node(job(title))
    for t in tagset.tags:
        g.add_node(tag(t))
    for title, tags_ in corpus_title_tags(corpus, tagset).items():
        for t in sorted(tags_):
            g.add_edge(job(title), tag(t), EdgeKind.HAS_TAG)
            g.add_edge(tag(t), job(title), EdgeKind.HAS_TAG)
    return g


def build_job_transition_tag(gjj: HeteroGraph, gjt: HeteroGraph) -> HeteroGraph:
    """Union of transition edges of gjj with job-tag edges of gjt.

    The two graphs must agree on their job node sets.
    """
    jobs_jj = {n for n in gjj.nodes if n.kind is NodeKind.JOB}
    jobs_jt = {n for n in gjt.nodes if n.kind is NodeKind.JOB}
    if jobs_jj != jobs_jt:
        only_jj = sorted(n.key for n in jobs_jj - jobs_jt)[:3]
        only_jt = sorted(n.key for n in jobs_jt - jobs_jj)[:3]
        raise ConsistencyError(
            f"job node sets differ between transition and job-tag graphs "
            f"(e.g. only in transition: {only_jj}, only in job-tag: {only_jt})"
        )
    g = HeteroGraph()
    for n in gjj.nodes:
        g.add_node(n)
    for n in gjt.nodes:
        g.add_node(n)
    for src, dst in gjj.transition_pairs():
        g.add_edge(src, dst, EdgeKind.TRANSITION, count=gjj.multiplicity(src, dst))
    for src, dst, kind in gjt.edge_triples():
        if kind is EdgeKind.HAS_TAG:
            g.add_edge(src, dst, EdgeKind.HAS_TAG)
    return g


# -- statistics and serialization ------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    """Recountable size statistics.

    enhanced_edge_count counts all directed job-job edges (transition union
    enhanced); for a plain transition graph it equals transition_edge_count.
    has_tag_pair_count counts unordered title-tag pairs.
    """

    job_count: int
    tag_count: int
    transition_edge_count: int
    enhanced_edge_count: int
    has_tag_pair_count: int


def graph_stats(g: HeteroGraph) -> GraphStats:
    transition = 0
    job_job = 0
    has_tag_directed = 0
    for (src, dst), kinds in g._kinds.items():
        if EdgeKind.TRANSITION in kinds:
            transition += 1
        if EdgeKind.TRANSITION in kinds or EdgeKind.ENHANCED in kinds:
            job_job += 1
        if EdgeKind.HAS_TAG in kinds:
            has_tag_directed += 1
    return GraphStats(
        job_count=len(g.jobs()),
        tag_count=len(g.tags()),
        transition_edge_count=transition,
        enhanced_edge_count=job_job,
        has_tag_pair_count=has_tag_directed // 2,
    )


def write_edge_list(target: str | Path | IO[str], g: HeteroGraph) -> None:
    """Write the sorted edge list TSV.

    Columns: source_kind, source_key, target_kind, target_key, edge_kind,
    multiplicity (1 for non-transition kinds). '#node' comment lines carry
    the full node set so isolated nodes survive a round trip.
    """

    def _dump(fh: IO[str]) -> None:
        for n in g.nodes:
            fh.write(f"#node\t{n.kind.value}\t{n.key}\n")
        lines = []
        for src, dst, kind in g.edge_triples():
            mult = g.multiplicity(src, dst) if kind is EdgeKind.TRANSITION else 1
            lines.append(
                f"{src.kind.value}\t{src.key}\t{dst.kind.value}\t{dst.key}\t{kind.value}\t{mult}"
            )
        lines.sort()
        for line in lines:
            fh.write(line + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)


def _node_from(kind_raw: str, key: str, lineno: int) -> NodeRef:
    try:
        return NodeRef(NodeKind(kind_raw), key)
    except ValueError:
        raise InputError(f"line {lineno}: unknown node kind {kind_raw!r}") from None


def read_edge_list(source: str | Path | IO[str]) -> HeteroGraph:
    """Parse an edge-list TSV written by write_edge_list."""

    def _load(lines: Iterator[str]) -> HeteroGraph:
        g = HeteroGraph()
        for lineno, line in enumerate(lines, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                parts = line.split("\t")
                if parts[0] == "#node" and len(parts) == 3:
                    g.add_node(_node_from(parts[1], parts[2], lineno))
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise InputError(f"line {lineno}: expected 6 columns, got {len(parts)}")
            src = _node_from(parts[0], parts[1], lineno)
            dst = _node_from(parts[2], parts[3], lineno)
            try:
                kind = EdgeKind(parts[4])
            except ValueError:
                raise InputError(f"line {lineno}: unknown edge kind {parts[4]!r}") from None
            try:
                mult = int(parts[5])
            except ValueError:
                raise InputError(f"line {lineno}: bad multiplicity {parts[5]!r}") from None
            if mult < 1:
                raise InputError(f"line {lineno}: multiplicity must be >= 1")
            g.add_edge(src, dst, kind, count=mult if kind is EdgeKind.TRANSITION else 1)
        return g

    if isinstance(source, (str, Path)):
        try:
            fh = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
        with fh:
            return _load(iter(fh))
    return _load(iter(source))

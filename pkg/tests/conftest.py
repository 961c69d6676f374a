import importlib.resources
import json
from pathlib import Path

import numpy as np
import pytest

from jobgraph import (
    Corpus,
    EdgeKind,
    HeteroGraph,
    TagSet,
    filter_corpus,
    generate_tags,
    job,
    load_histories,
    load_lexicon,
    load_stopwords,
    parse_histories,
)

DATA_DIR = Path(str(importlib.resources.files("jobgraph").joinpath("data")))


def month(i: int) -> str:
    return f"{2010 + i // 12:04d}-{i % 12 + 1:02d}"


def history_json(user_id: str, titles: list[str], labels: list | None = None) -> str:
    """One JSONL line with synthetic month-by-month dates."""
    records = []
    for i, t in enumerate(titles):
        rec = {"title": t, "start": month(2 * i), "end": month(2 * i + 1)}
        if labels is not None and labels[i] is not None:
            rec["label"] = labels[i]
        records.append(rec)
    return json.dumps({"user_id": user_id, "records": records})


def corpus_from_title_lists(
    title_lists: list[list[str]],
    labels: dict[str, str] | None = None,
    stopwords: frozenset[str] = frozenset(),
) -> Corpus:
    lines = []
    for i, titles in enumerate(title_lists):
        labs = [labels.get(t) for t in titles] if labels else None
        lines.append(history_json(f"u{i}", titles, labs))
    return parse_histories(lines, stopwords)


WORDS = [
    "alpha", "bravo", "carbon", "delta", "ember", "falcon", "granite",
    "harbor", "iris", "jasper", "krill", "lumen", "mango", "nickel",
    "onyx", "pallet", "quartz", "rubin", "sable", "tundra",
]


def random_corpus(rng: np.random.Generator, max_histories: int = 50) -> Corpus:
    """Random corpus over two-word titles from a small alphabet."""
    n_titles = int(rng.integers(3, 15))
    titles = []
    while len(titles) < n_titles:
        t = " ".join(rng.choice(WORDS, size=int(rng.integers(1, 4)), replace=True))
        if t not in titles:
            titles.append(t)
    n_hist = int(rng.integers(1, max_histories + 1))
    lists = []
    for _ in range(n_hist):
        n = int(rng.integers(1, 6))
        lists.append([titles[int(rng.integers(n_titles))] for _ in range(n)])
    label_pool = ["L0", "L1", "L2"]
    labels = {t: label_pool[int(rng.integers(3))] for t in titles if rng.random() < 0.8}
    return corpus_from_title_lists(lists, labels)


def random_tagset(rng: np.random.Generator, corpus: Corpus, max_tags: int = 10) -> TagSet:
    lexicon = frozenset(rng.choice(WORDS, size=int(rng.integers(1, 12)), replace=False))
    return generate_tags(corpus, lexicon, k=max_tags)


def two_clique_graph(size: int = 8) -> HeteroGraph:
    """Two job cliques joined by a single bridge edge."""
    left = [job(f"l{i}") for i in range(size)]
    right = [job(f"r{i}") for i in range(size)]
    edges = []
    for group in (left, right):
        for i, a in enumerate(group):
            for b in group[i + 1 :]:
                edges.append((a, b, EdgeKind.TRANSITION))
    edges.append((left[0], right[0], EdgeKind.TRANSITION))
    return HeteroGraph.from_edges(edges, left + right)


@pytest.fixture(scope="session")
def toy_corpus() -> Corpus:
    stopwords = load_stopwords(DATA_DIR / "stopwords_en.txt")
    raw = load_histories(DATA_DIR / "toy_corpus.jsonl", stopwords)
    return filter_corpus(raw, min_records=2, min_label_occurrence=2)


@pytest.fixture(scope="session")
def toy_tags(toy_corpus) -> TagSet:
    lexicon = load_lexicon(DATA_DIR / "demo_lexicon.txt")
    return generate_tags(toy_corpus, lexicon, k=50)

def plain_edges(g: HeteroGraph) -> dict:
    """Graph edges as primitive tuples, transition multiplicities included."""
    out = {}
    for src, dst, kind in g.edge_triples():
        mult = g.multiplicity(src, dst) if kind is EdgeKind.TRANSITION else 1
        out[(src.kind.value, src.key, dst.kind.value, dst.key, kind.value)] = mult
    return out


def plain_nodes(g: HeteroGraph) -> set:
    return {(n.kind.value, n.key) for n in g.nodes}


def history_lists(corpus) -> list:
    return [[r.title_norm for r in h.records] for h in corpus.histories]

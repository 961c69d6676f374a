"""Tag lexicon mining.

Intersects the corpus token-frequency table with a reference lexicon of
occupational skill/function words and keeps the k most frequent hits. The
resulting TagSet drives job-tag graph construction and metapath walks.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .corpus import Corpus, tokenize_title
from .errors import ConfigError
from .util import read_text_file

DEFAULT_TOP_K = 200


def load_lexicon(path: str | Path) -> frozenset[str]:
    """Read a lexicon file: one token per line, '#' starts a comment."""
    tokens = set()
    for line in read_text_file(path).splitlines():
        token = line.split("#", 1)[0].strip()
        if token:
            tokens.add(token)
    return frozenset(tokens)


@dataclass(frozen=True)
class TagSet:
    """Mined tags ordered by falling corpus frequency, then token."""

    tags: tuple[str, ...]
    frequency: dict[str, int]

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, token: str) -> bool:
        return token in self.frequency


def _title_token_freq(corpus: Corpus) -> Counter[str]:
    """Frequency counting each distinct title once instead of per record."""
    freq: Counter[str] = Counter()
    for title in corpus.titles:
        freq.update(set(tokenize_title(title, corpus.stopwords)))
    return freq


def generate_tags(
    corpus: Corpus,
    lexicon: frozenset[str],
    k: int = DEFAULT_TOP_K,
    count_distinct_titles: bool = False,
) -> TagSet:
    """Keep the k highest-frequency corpus tokens that appear in the lexicon.

    The ordering key is (frequency descending, token ascending), so ties at
    the rank-k boundary resolve lexicographically. Frequencies count token
    occurrences across all records; count_distinct_titles switches to
    counting each distinct title once.

    The output depends only on (token frequencies restricted to the lexicon,
    k), never on corpus layout.
    """
    if not lexicon:
        raise ConfigError("tag lexicon is empty")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    freq = _title_token_freq(corpus) if count_distinct_titles else corpus.token_freq
    hits = [(tok, n) for tok, n in freq.items() if tok in lexicon]
    hits.sort(key=lambda kv: (-kv[1], kv[0]))
    top = hits[:k]
    return TagSet(tags=tuple(tok for tok, _ in top), frequency=dict(top))


def assign_title_tags(title_norm: str, tagset: TagSet, stopwords: frozenset[str] = frozenset()) -> frozenset[str]:
    """Tags of a title: its tokens intersected with the tag set."""
    return frozenset(t for t in tokenize_title(title_norm, stopwords) if t in tagset)


def corpus_title_tags(corpus: Corpus, tagset: TagSet) -> dict[str, frozenset[str]]:
    """Tag assignment for every title in the corpus (possibly empty sets)."""
    return {
        title: assign_title_tags(title, tagset, corpus.stopwords)
        for title in sorted(corpus.titles)
    }


def write_tags_tsv(target: str | Path | IO[str], tagset: TagSet) -> None:
    """Audit export: tab-separated (tag, frequency) rows under a header."""

    def _dump(fh: IO[str]) -> None:
        fh.write("tag\tfrequency\n")
        for tag in tagset.tags:
            fh.write(f"{tag}\t{tagset.frequency[tag]}\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)

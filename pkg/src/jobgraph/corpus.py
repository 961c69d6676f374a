"""Work-history corpus ingestion.

Parses line-delimited JSON work histories, validates and orders the records,
normalizes job titles, and applies the frequency filters used before graph
construction: occupation labels below a minimum occurrence count and histories
with too few remaining records are pruned until stable, so filtering is
idempotent. Also provides tokenization, the token vocabulary, and a one-hot
bag-of-words feature export.

Input schema (one JSON object per line):

    {"user_id": "u1",
     "records": [{"title": "Sales Manager", "start": "2011-03",
                  "end": "2013-05", "label": "41-1011"}, ...]}

"end" and "label" may be null or absent. Records are sorted by start date;
equal start dates keep input order.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import InputError
from .util import read_text_file

_WS_RE = re.compile(r"\s+")
_YEAR_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True)
class WorkRecord:
    """One employment record within a user's history."""

    title_raw: str
    title_norm: str
    start: date
    end: date | None = None
    label: str | None = None


@dataclass(frozen=True)
class WorkHistory:
    user_id: str
    records: tuple[WorkRecord, ...]


@dataclass(frozen=True)
class Corpus:
    """A validated collection of work histories plus derived lookup tables.

    titles is exactly the set of normalized titles occurring in histories;
    labels maps a subset of titles to occupation codes; token_freq counts
    tokenized title occurrences record by record. The stopword set used for
    tokenization travels with the corpus so filtering can recompute
    token_freq consistently.
    """

    histories: tuple[WorkHistory, ...]
    titles: frozenset[str]
    labels: dict[str, str]
    token_freq: dict[str, int]
    stopwords: frozenset[str] = frozenset()

    def record_count(self) -> int:
        return sum(len(h.records) for h in self.histories)


def normalize_title(raw: str) -> str:
    """Lowercase and collapse all whitespace runs to single spaces."""
    return _WS_RE.sub(" ", raw).strip().lower()


def tokenize_title(title_norm: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Split a normalized title into lowercase letter-run tokens.

    Splitting on any non-letter character drops digits and punctuation;
    stopwords are removed afterwards. Order is preserved.
    """
    runs = "".join(c if c.isalpha() else " " for c in title_norm).split()
    return [t for t in runs if t not in stopwords]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one token per line, blank lines ignored."""
    words = set()
    for line in read_text_file(path).splitlines():
        token = line.strip()
        if token:
            words.add(token)
    return frozenset(words)


def _parse_year_month(value: str, *, user_id: str, field: str) -> date:
    m = _YEAR_MONTH_RE.match(value)
    if not m:
        raise InputError(f"user {user_id!r}: {field} must be YYYY-MM, got {value!r}")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise InputError(f"user {user_id!r}: {field} month out of range in {value!r}")
    return date(year, month, 1)


def _parse_record(obj: object, user_id: str) -> WorkRecord:
    if not isinstance(obj, dict):
        raise InputError(f"user {user_id!r}: record must be an object, got {type(obj).__name__}")
    title_raw = obj.get("title")
    if not isinstance(title_raw, str):
        raise InputError(f"user {user_id!r}: record missing string 'title'")
    title_norm = normalize_title(title_raw)
    if not title_norm:
        raise InputError(f"user {user_id!r}: title empty after normalization: {title_raw!r}")
    start_raw = obj.get("start")
    if not isinstance(start_raw, str):
        raise InputError(f"user {user_id!r}: record missing string 'start'")
    start = _parse_year_month(start_raw, user_id=user_id, field="start")
    end_raw = obj.get("end")
    end: date | None = None
    if end_raw is not None:
        if not isinstance(end_raw, str):
            raise InputError(f"user {user_id!r}: 'end' must be a string or null")
        end = _parse_year_month(end_raw, user_id=user_id, field="end")
        if end < start:
            raise InputError(f"user {user_id!r}: end {end_raw!r} precedes start {start_raw!r}")
    label_raw = obj.get("label")
    if label_raw is not None and not isinstance(label_raw, str):
        raise InputError(f"user {user_id!r}: 'label' must be a string or null")
    label = label_raw if label_raw else None
    return WorkRecord(title_raw=title_raw, title_norm=title_norm, start=start, end=end, label=label)


def _assemble(histories: Iterable[WorkHistory], stopwords: frozenset[str]) -> Corpus:
    """Recompute titles, labels, and token frequencies from histories."""
    hist = tuple(histories)
    titles: set[str] = set()
    label_votes: dict[str, Counter[str]] = {}
    token_freq: Counter[str] = Counter()
    for h in hist:
        for r in h.records:
            titles.add(r.title_norm)
            token_freq.update(tokenize_title(r.title_norm, stopwords))
            if r.label is not None:
                label_votes.setdefault(r.title_norm, Counter())[r.label] += 1
    # A title seen with conflicting labels keeps the most frequent one,
    # ties broken lexicographically.
    labels = {
        title: sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        for title, votes in label_votes.items()
    }
    return Corpus(
        histories=hist,
        titles=frozenset(titles),
        labels=labels,
        token_freq=dict(token_freq),
        stopwords=stopwords,
    )


def parse_histories(
    lines: Iterable[str], stopwords: frozenset[str] = frozenset()
) -> Corpus:
    """Parse a line-delimited JSON history stream into a validated Corpus.

    Raises InputError naming the offending line number for malformed JSON and
    the offending user_id for semantically invalid records.
    """
    histories: list[WorkHistory] = []
    seen_users: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {lineno}: malformed JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise InputError(f"line {lineno}: expected a JSON object")
        user_id = obj.get("user_id")
        if not isinstance(user_id, str) or not user_id:
            raise InputError(f"line {lineno}: missing nonempty string 'user_id'")
        if user_id in seen_users:
            raise InputError(f"line {lineno}: duplicate user_id {user_id!r}")
        seen_users.add(user_id)
        records_raw = obj.get("records")
        if not isinstance(records_raw, list) or not records_raw:
            raise InputError(f"user {user_id!r}: 'records' must be a nonempty list")
        records = [_parse_record(r, user_id) for r in records_raw]
        records.sort(key=lambda r: r.start)  # stable: equal starts keep input order
        histories.append(WorkHistory(user_id=user_id, records=tuple(records)))
    return _assemble(histories, stopwords)


def load_histories(path: str | Path, stopwords: frozenset[str] = frozenset()) -> Corpus:
    return parse_histories(read_text_file(path).splitlines(), stopwords)


def write_histories(target: str | Path | IO[str], corpus: Corpus) -> None:
    """Serialize histories back to the line-delimited JSON input schema."""

    def _dump(fh: IO[str]) -> None:
        for h in corpus.histories:
            obj = {
                "user_id": h.user_id,
                "records": [
                    {
                        "title": r.title_raw,
                        "start": f"{r.start.year:04d}-{r.start.month:02d}",
                        "end": f"{r.end.year:04d}-{r.end.month:02d}" if r.end else None,
                        "label": r.label,
                    }
                    for r in h.records
                ],
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _dump(fh)
    else:
        _dump(target)


def filter_corpus(
    corpus: Corpus,
    min_records: int = 2,
    min_label_occurrence: int = 200,
    remove_rare_label_records: bool = True,
) -> Corpus:
    """Prune rare occupation labels and short histories until stable.

    Two rules are applied repeatedly to a fixed point, which makes the
    operation idempotent (one pass is not: dropping a short history can push
    a surviving label back under the threshold):

    1. Records whose label occurs fewer than min_label_occurrence times in
       the current corpus are removed, or merely unlabeled when
       remove_rare_label_records is False.
    2. Histories left with fewer than min_records records are removed.

    Derived tables are recomputed from the survivors.
    """
    current: list[tuple[str, list[WorkRecord]]] = [
        (h.user_id, list(h.records)) for h in corpus.histories
    ]
    while True:
        label_counts: Counter[str] = Counter(
            r.label for _, recs in current for r in recs if r.label is not None
        )
        rare = {lab for lab, n in label_counts.items() if n < min_label_occurrence}
        changed = False
        pruned: list[tuple[str, list[WorkRecord]]] = []
        for user_id, recs in current:
            if rare:
                if remove_rare_label_records:
                    kept = [r for r in recs if r.label not in rare]
                else:
                    kept = [replace(r, label=None) if r.label in rare else r for r in recs]
                if kept != recs:
                    changed = True
                recs = kept
            if len(recs) < min_records:
                changed = True
                continue
            pruned.append((user_id, recs))
        current = pruned
        if not changed:
            break
    histories = tuple(
        WorkHistory(user_id=uid, records=tuple(recs)) for uid, recs in current
    )
    return _assemble(histories, corpus.stopwords)


@dataclass(frozen=True)
class Vocabulary:
    """Tokens with corpus frequency >= 2, ordered by falling frequency then token."""

    tokens: tuple[str, ...]
    index: dict[str, int]

    def __len__(self) -> int:
        return len(self.tokens)


def build_vocabulary(corpus: Corpus, min_freq: int = 2) -> Vocabulary:
    kept = [(tok, n) for tok, n in corpus.token_freq.items() if n >= min_freq]
    kept.sort(key=lambda kv: (-kv[1], kv[0]))
    tokens = tuple(tok for tok, _ in kept)
    return Vocabulary(tokens=tokens, index={tok: i for i, tok in enumerate(tokens)})


def one_hot_features(corpus: Corpus, vocab: Vocabulary) -> tuple[list[str], np.ndarray]:
    """Multi-hot bag-of-words rows per title.

    Returns (titles, matrix) with titles sorted and matrix[i, j] = 1 when
    vocab token j occurs in title i. Row sums therefore equal the number of
    distinct in-vocabulary tokens of each title.
    """
    titles = sorted(corpus.titles)
    matrix = np.zeros((len(titles), len(vocab)), dtype=np.int64)
    for i, title in enumerate(titles):
        for tok in set(tokenize_title(title, corpus.stopwords)):
            j = vocab.index.get(tok)
            if j is not None:
                matrix[i, j] = 1
    return titles, matrix


def write_features_tsv(path: str | Path, corpus: Corpus, vocab: Vocabulary) -> None:
    """Write the one-hot features: header of vocab tokens, one row per title."""
    titles, matrix = one_hot_features(corpus, vocab)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("title\t" + "\t".join(vocab.tokens) + "\n")
        for title, row in zip(titles, matrix):
            fh.write(title + "\t" + "\t".join(str(int(v)) for v in row) + "\n")

"""Independent reference implementations used to cross-check the package.

Everything here is written directly from first principles with plain loops
and dicts, deliberately sharing no code with the package internals.
"""

from __future__ import annotations

from collections import Counter


def transition_counts(history_titles: list[list[str]]) -> dict[tuple[str, str], int]:
    """Directed consecutive-title counts, skipping same-title repeats."""
    counts: Counter[tuple[str, str]] = Counter()
    for titles in history_titles:
        for a, b in zip(titles, titles[1:]):
            if a != b:
                counts[(a, b)] += 1
    return dict(counts)


def tag_assignments(
    titles: set[str], tags: set[str], stopwords: set[str] = frozenset()
) -> dict[str, set[str]]:
    """Title -> tag tokens, tokenizing by whitespace (ASCII test data only)."""
    out = {}
    for t in titles:
        toks = [w for w in t.split() if w not in stopwords]
        out[t] = {w for w in toks if w in tags}
    return out


def top_k_tags(
    history_titles: list[list[str]],
    lexicon: set[str],
    k: int,
    stopwords: set[str] = frozenset(),
) -> list[str]:
    """Highest-frequency lexicon tokens, per record occurrence, ties by name."""
    freq: Counter[str] = Counter()
    for titles in history_titles:
        for t in titles:
            for w in t.split():
                if w not in stopwords:
                    freq[w] += 1
    eligible = [(w, c) for w, c in freq.items() if w in lexicon]
    eligible.sort(key=lambda wc: (-wc[1], wc[0]))
    return [w for w, _ in eligible[:k]]


def enhanced_pairs(
    titles: set[str], title_tags: dict[str, set[str]]
) -> set[tuple[str, str]]:
    """Directed job pairs sharing at least one tag (both directions)."""
    out = set()
    ordered = sorted(titles)
    for a in ordered:
        for b in ordered:
            if a != b and title_tags.get(a, set()) & title_tags.get(b, set()):
                out.add((a, b))
    return out


def job_tag_pairs(
    titles: set[str], title_tags: dict[str, set[str]]
) -> set[tuple[str, str]]:
    """Directed (title, tag) incidences; callers add both orientations."""
    return {(t, w) for t in sorted(titles) for w in title_tags.get(t, set())}


def pairwise_auc(scores: list[float], labels: list[int]) -> float:
    """Exhaustive positive-versus-negative comparison with half ties."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def f1_scores(gold: list, pred: list) -> tuple[float, float]:
    """(macro over gold classes, pooled micro) from raw count definitions."""
    classes = sorted({repr(c) for c in gold})
    by_class = {}
    for c in classes:
        tp = sum(1 for g, p in zip(gold, pred) if repr(g) == c and repr(p) == c)
        fp = sum(1 for g, p in zip(gold, pred) if repr(g) != c and repr(p) == c)
        fn = sum(1 for g, p in zip(gold, pred) if repr(g) == c and repr(p) != c)
        by_class[c] = (tp, fp, fn)
    f1s = []
    for c in classes:
        tp, fp, fn = by_class[c]
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    macro = sum(f1s) / len(f1s)
    # micro pools over gold and predicted classes alike; a prediction on a
    # class absent from gold still contributes its false positive
    pool = sorted({repr(c) for c in gold} | {repr(c) for c in pred})
    tp_all = fp_all = fn_all = 0
    for c in pool:
        tp_all += sum(1 for g, p in zip(gold, pred) if repr(g) == c and repr(p) == c)
        fp_all += sum(1 for g, p in zip(gold, pred) if repr(g) != c and repr(p) == c)
        fn_all += sum(1 for g, p in zip(gold, pred) if repr(g) == c and repr(p) != c)
    micro = 2 * tp_all / (2 * tp_all + fp_all + fn_all) if tp_all + fp_all + fn_all else 0.0
    return macro, micro


def split_lengths(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """floor, floor, remainder."""
    import math

    a = math.floor(ratios[0] * n)
    b = math.floor(ratios[1] * n)
    return a, b, n - a - b

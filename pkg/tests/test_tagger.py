import numpy as np
import pytest

from jobgraph import (
    ConfigError,
    InputError,
    assign_title_tags,
    corpus_title_tags,
    generate_tags,
    load_lexicon,
    tokenize_title,
    write_tags_tsv,
)

from .conftest import corpus_from_title_lists, random_corpus
from .oracles import top_k_tags


def test_load_lexicon_skips_comments_and_blanks(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text("# heading\nsales\n\n  data  \n#tail\n", encoding="utf-8")
    assert load_lexicon(path) == frozenset({"sales", "data"})


def make_corpus_with_freqs(freqs: dict[str, int]):
    """One long history whose token frequencies match freqs exactly."""
    titles = [w for w, n in sorted(freqs.items()) for _ in range(n)]
    return corpus_from_title_lists([titles])


def test_top_k_breaks_frequency_ties_lexicographically():
    corpus = make_corpus_with_freqs({"apple": 5, "brine": 5, "cord": 4})
    lexicon = frozenset({"apple", "brine", "cord"})
    assert generate_tags(corpus, lexicon, k=1).tags == ("apple",)
    assert generate_tags(corpus, lexicon, k=2).tags == ("apple", "brine")
    assert generate_tags(corpus, lexicon, k=3).tags == ("apple", "brine", "cord")


def test_tags_are_limited_to_lexicon_and_corpus():
    corpus = corpus_from_title_lists([["data analyst", "data engineer"]])
    lexicon = frozenset({"data", "sales", "analyst"})
    tagset = generate_tags(corpus, lexicon, k=10)
    assert tagset.tags == ("data", "analyst")
    assert tagset.frequency == {"data": 2, "analyst": 1}
    assert "sales" not in tagset
    assert "engineer" not in tagset
    assert len(tagset) <= 10


def test_tag_frequency_counts_record_occurrences_by_default():
    corpus = corpus_from_title_lists([["data lead", "data lead"], ["data lead"]])
    lexicon = frozenset({"data"})
    by_occurrence = generate_tags(corpus, lexicon, k=5)
    assert by_occurrence.frequency["data"] == 3
    by_title = generate_tags(corpus, lexicon, k=5, count_distinct_titles=True)
    assert by_title.frequency["data"] == 1


def test_tags_depend_only_on_lexicon_token_frequencies():
    # same lexicon-token counts arranged into different histories and titles
    a = corpus_from_title_lists([["data analyst", "data lead"], ["sales rep"]])
    b = corpus_from_title_lists([["data chief"], ["officer data", "sales head"]])
    lexicon = frozenset({"data", "sales"})
    assert generate_tags(a, lexicon, k=5) == generate_tags(b, lexicon, k=5)


def test_generate_tags_rejects_bad_inputs():
    corpus = corpus_from_title_lists([["data analyst"]])
    with pytest.raises(ConfigError):
        generate_tags(corpus, frozenset(), k=5)
    with pytest.raises(ConfigError):
        generate_tags(corpus, frozenset({"data"}), k=0)


def test_generate_tags_matches_reference_counting():
    rng = np.random.default_rng(11)
    for _ in range(25):
        corpus = random_corpus(rng, max_histories=20)
        lists = [[r.title_norm for r in h.records] for h in corpus.histories]
        lexicon = frozenset({"alpha", "bravo", "carbon", "delta", "ember"})
        k = int(rng.integers(1, 6))
        expected = top_k_tags(lists, set(lexicon), k)
        assert list(generate_tags(corpus, lexicon, k=k).tags) == expected


def test_assigned_tags_are_a_subset_of_title_tokens(toy_corpus, toy_tags):
    for title in toy_corpus.titles:
        tags = assign_title_tags(title, toy_tags, toy_corpus.stopwords)
        assert tags <= set(tokenize_title(title, toy_corpus.stopwords))


def test_corpus_title_tags_covers_every_title():
    corpus = corpus_from_title_lists([["data analyst", "chief officer"]])
    tagset = generate_tags(corpus, frozenset({"data"}), k=5)
    mapping = corpus_title_tags(corpus, tagset)
    assert set(mapping) == corpus.titles
    assert mapping["data analyst"] == {"data"}
    assert mapping["chief officer"] == frozenset()


def test_tags_tsv_layout(tmp_path):
    corpus = make_corpus_with_freqs({"data": 3, "sales": 2})
    tagset = generate_tags(corpus, frozenset({"data", "sales"}), k=5)
    path = tmp_path / "tags.tsv"
    write_tags_tsv(path, tagset)
    assert path.read_text(encoding="utf-8") == "tag\tfrequency\ndata\t3\nsales\t2\n"


def test_missing_lexicon_is_input_error(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        load_lexicon(tmp_path / "absent.txt")

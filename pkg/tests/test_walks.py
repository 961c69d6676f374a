import itertools

import numpy as np
import pytest

from jobgraph import (
    ConfigError,
    EdgeKind,
    HeteroGraph,
    NodeKind,
    WalkConfig,
    build_job_tag,
    build_job_transition,
    build_job_transition_tag,
    job,
    metapath_walks,
    node2vec_walks,
    read_walks,
    step_distribution,
    tag,
    write_walks,
)
from jobgraph.walks import escape_key, node_from_token, unescape_key

from .conftest import corpus_from_title_lists, two_clique_graph


def line_graph(keys: str) -> HeteroGraph:
    nodes = [job(k) for k in keys]
    edges = [(a, b, EdgeKind.TRANSITION) for a, b in zip(nodes, nodes[1:])]
    return HeteroGraph.from_edges(edges, nodes)


def triangle() -> HeteroGraph:
    nodes = [job(k) for k in "abc"]
    edges = [
        (job("a"), job("b"), EdgeKind.TRANSITION),
        (job("b"), job("c"), EdgeKind.TRANSITION),
        (job("c"), job("a"), EdgeKind.TRANSITION),
    ]
    return HeteroGraph.from_edges(edges, nodes)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"walk_length": 0},
        {"walks_per_node": 0},
        {"p": 0.0},
        {"q": -1.0},
        {"metapath": (NodeKind.JOB, NodeKind.TAG)},
        {"metapath": (NodeKind.JOB,)},
    ],
)
def test_walk_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        WalkConfig(**kwargs).validate()


def test_return_bias_on_a_path_graph():
    # standing at b having come from a: returning to a weighs 1/p = 4,
    # moving on to c weighs 1/q = 0.25
    g = line_graph("abc")
    cfg = WalkConfig(p=0.25, q=4.0)
    nbrs, probs = step_distribution(g, job("a"), job("b"), cfg)
    dist = dict(zip(nbrs, probs))
    assert dist[job("a")] == pytest.approx(16 / 17)
    assert dist[job("c")] == pytest.approx(1 / 17)
    assert probs.sum() == pytest.approx(1.0)


def test_first_hop_is_uniform():
    g = triangle()
    nbrs, probs = step_distribution(g, None, job("a"), WalkConfig(p=0.25, q=4.0))
    assert set(nbrs) == {job("b"), job("c")}
    assert np.allclose(probs, 0.5)


def test_distance_one_neighbors_keep_unit_weight():
    # square with a diagonal: from (a, b), node c is adjacent to a (weight 1)
    # while d is two steps away from a (weight 1/q)
    nodes = [job(k) for k in "abcd"]
    edges = [
        (job("a"), job("b"), EdgeKind.TRANSITION),
        (job("b"), job("c"), EdgeKind.TRANSITION),
        (job("b"), job("d"), EdgeKind.TRANSITION),
        (job("a"), job("c"), EdgeKind.TRANSITION),
    ]
    g = HeteroGraph.from_edges(edges, nodes)
    cfg = WalkConfig(p=2.0, q=5.0)
    nbrs, probs = step_distribution(g, job("a"), job("b"), cfg)
    dist = dict(zip(nbrs, probs))
    total = 1 / 2.0 + 1.0 + 1 / 5.0
    assert dist[job("a")] == pytest.approx((1 / 2.0) / total)
    assert dist[job("c")] == pytest.approx(1.0 / total)
    assert dist[job("d")] == pytest.approx((1 / 5.0) / total)


def test_unit_parameters_reduce_to_uniform_on_small_graphs():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        nodes = [job(f"n{i}") for i in range(n)]
        edges = []
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < 0.5:
                edges.append((nodes[i], nodes[j], EdgeKind.TRANSITION))
        g = HeteroGraph.from_edges(edges, nodes)
        cfg = WalkConfig(p=1.0, q=1.0)
        for cur in nodes:
            nbrs = g.neighbors(cur)
            for prev in nbrs:
                cands, probs = step_distribution(g, prev, cur, cfg)
                assert set(cands) == set(nbrs)
                assert np.allclose(probs, 1.0 / len(nbrs))


def test_walks_cover_every_node_in_order():
    g = triangle()
    cfg = WalkConfig(walk_length=5, walks_per_node=3, seed=1)
    corpus = node2vec_walks(g, cfg)
    heads = [w[0] for w in corpus.walks]
    assert heads == [job("a")] * 3 + [job("b")] * 3 + [job("c")] * 3
    for walk in corpus.walks:
        assert 1 <= len(walk) <= 5


def test_walk_steps_follow_edges_undirected():
    g = two_clique_graph()
    cfg = WalkConfig(walk_length=8, walks_per_node=4, seed=3)
    corpus = node2vec_walks(g, cfg)
    for walk in corpus.walks:
        for a, b in zip(walk, walk[1:]):
            assert g.has_link(a, b)


def test_walk_steps_follow_edge_direction_when_asked():
    g = line_graph("abc")
    cfg = WalkConfig(walk_length=6, walks_per_node=5, seed=2, respect_direction=True)
    corpus = node2vec_walks(g, cfg)
    for walk in corpus.walks:
        for a, b in zip(walk, walk[1:]):
            assert g.has_edge(a, b)
    # c is a sink, so its walks never leave it
    c_walks = [w for w in corpus.walks if w[0] == job("c")]
    assert c_walks == [(job("c"),)] * 5


def test_isolated_nodes_produce_singleton_walks():
    g = HeteroGraph.from_edges(
        [(job("a"), job("b"), EdgeKind.TRANSITION)],
        [job("a"), job("b"), job("x")],
    )
    corpus = node2vec_walks(g, WalkConfig(walks_per_node=2, seed=0))
    assert corpus.walks.count((job("x"),)) == 2


def test_walks_are_deterministic_for_a_seed():
    g = two_clique_graph()
    cfg = WalkConfig(walk_length=7, walks_per_node=3, seed=11)
    a = node2vec_walks(g, cfg)
    b = node2vec_walks(g, cfg)
    assert a.walks == b.walks
    c = node2vec_walks(g, WalkConfig(walk_length=7, walks_per_node=3, seed=12))
    assert c.walks != a.walks


def test_node2vec_rejects_metapath_config():
    g = triangle()
    cfg = WalkConfig(metapath=(NodeKind.JOB, NodeKind.TAG, NodeKind.JOB))
    with pytest.raises(ConfigError):
        node2vec_walks(g, cfg)


def job_tag_fixture():
    corpus = corpus_from_title_lists(
        [["red ant", "red bee", "blue sky"], ["blue sea", "red bee"]]
    )
    from jobgraph import generate_tags

    tagset = generate_tags(corpus, frozenset({"red", "blue"}), k=5)
    gjj = build_job_transition(corpus)
    gjt = build_job_tag(corpus, tagset)
    return build_job_transition_tag(gjj, gjt)


def test_metapath_walks_alternate_kinds():
    g = job_tag_fixture()
    cfg = WalkConfig(
        walk_length=9,
        walks_per_node=4,
        seed=7,
        metapath=(NodeKind.JOB, NodeKind.TAG, NodeKind.JOB),
    )
    corpus = metapath_walks(g, cfg)
    assert corpus.walks
    heads = {w[0] for w in corpus.walks}
    assert all(h.kind is NodeKind.JOB for h in heads)
    for walk in corpus.walks:
        for i, node in enumerate(walk):
            expected = (NodeKind.JOB, NodeKind.TAG)[i % 2]
            assert node.kind is expected
        for a, b in zip(walk, walk[1:]):
            assert g.has_link(a, b, EdgeKind.HAS_TAG)


def test_metapath_walks_truncate_at_dead_ends():
    # an untagged title has no tag neighbor: its walks stop immediately
    corpus = corpus_from_title_lists([["red ant", "plain role"]])
    from jobgraph import generate_tags

    tagset = generate_tags(corpus, frozenset({"red"}), k=5)
    g = build_job_transition_tag(
        build_job_transition(corpus), build_job_tag(corpus, tagset)
    )
    cfg = WalkConfig(walk_length=7, walks_per_node=2, seed=1, metapath=(NodeKind.JOB, NodeKind.TAG, NodeKind.JOB))
    walks = metapath_walks(g, cfg).walks
    assert walks.count((job("plain role"),)) == 2


def test_metapath_walks_need_matching_node_kinds():
    g = triangle()
    cfg = WalkConfig(metapath=(NodeKind.JOB, NodeKind.TAG, NodeKind.JOB))
    with pytest.raises(ConfigError):
        metapath_walks(g, cfg)


def test_metapath_requires_a_metapath():
    g = job_tag_fixture()
    with pytest.raises(ConfigError):
        metapath_walks(g, WalkConfig())


def test_key_escaping_round_trips():
    for key in ("sales manager", "a%20b", "100% effort", "%", " ", "a b c"):
        escaped = escape_key(key)
        assert " " not in escaped
        assert unescape_key(escaped) == key


def test_walk_file_round_trip(tmp_path):
    g = two_clique_graph(4)
    corpus = node2vec_walks(g, WalkConfig(walk_length=6, walks_per_node=2, seed=9))
    path = tmp_path / "walks.txt"
    write_walks(path, corpus)
    again = read_walks(path)
    assert again == corpus.walks


def test_walk_tokens_are_kind_prefixed(tmp_path):
    g = job_tag_fixture()
    cfg = WalkConfig(
        walk_length=5,
        walks_per_node=1,
        seed=4,
        metapath=(NodeKind.JOB, NodeKind.TAG, NodeKind.JOB),
    )
    path = tmp_path / "walks.txt"
    write_walks(path, metapath_walks(g, cfg))
    text = path.read_text(encoding="utf-8")
    for token in text.split():
        assert token.startswith(("J:", "T:"))
    assert "J:red%20ant" in text
    assert node_from_token("J:red%20ant") == job("red ant")
    assert node_from_token("T:red") == tag("red")


def test_node_frequencies_count_walk_occurrences():
    g = triangle()
    corpus = node2vec_walks(g, WalkConfig(walk_length=4, walks_per_node=2, seed=0))
    freq = corpus.node_frequencies()
    assert sum(freq.values()) == sum(len(w) for w in corpus.walks)
    assert set(freq) <= set(g.nodes)

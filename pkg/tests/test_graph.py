"""Chain discovery and recommendation evaluation over trust graphs."""
from __future__ import annotations

import itertools
import random

import pytest

from cloudtrust.calculus import chain_trust, edge_weight
from cloudtrust.graph import (
    EdgeStats,
    FixtureError,
    TrustGraph,
    discover_chains,
    evaluate_recommendation,
)

SERVICE = "files"


def stats(n_p=1, n=1, sl=1.0, dt=0.5):
    return EdgeStats(n_positive=n_p, n_total=n, sl=sl, direct_trust=dt)


def graph_of(*edges):
    graph = TrustGraph()
    for src, dst, *rest in edges:
        graph.add_edge(src, dst, SERVICE, rest[0] if rest else stats())
    return graph


def enumerate_paths_brute_force(edge_set, source, target, max_len):
    """Independent oracle: try every permutation of intermediate nodes."""
    nodes = set()
    for src, dst in edge_set:
        nodes.add(src)
        nodes.add(dst)
    others = sorted(nodes - {source, target})
    found = set()
    for size in range(1, max_len):  # path of k+1 edges has k intermediates
        for middle in itertools.permutations(others, size):
            path = (source,) + middle + (target,)
            if all((a, b) in edge_set for a, b in zip(path, path[1:])):
                found.add(path)
    return found


# ---------------------------------------------------------------------------
# discovery basics


def test_two_hop_chain_found():
    graph = graph_of(("p", "q"), ("q", "r"))
    chains = discover_chains(graph, "p", "r", SERVICE, max_len=4)
    assert [c.nodes for c in chains] == [("p", "q", "r")]
    assert chains[0].length == 2


def test_combined_four_hop_chain_found():
    graph = graph_of(("p", "q"), ("q", "r"), ("r", "s"), ("s", "t"))
    chains = discover_chains(graph, "p", "t", SERVICE, max_len=4)
    assert [c.nodes for c in chains] == [("p", "q", "r", "s", "t")]
    assert chains[0].length == 4
    # the halves are themselves two-hop chains
    assert [c.nodes for c in discover_chains(graph, "p", "r", SERVICE)] == [("p", "q", "r")]
    assert [c.nodes for c in discover_chains(graph, "r", "t", SERVICE)] == [("r", "s", "t")]


def test_no_path_yields_empty_list():
    graph = graph_of(("p", "q"), ("r", "s"))
    assert discover_chains(graph, "p", "s", SERVICE) == []


def test_direct_edge_alone_is_not_a_chain():
    graph = graph_of(("p", "q"))
    assert discover_chains(graph, "p", "q", SERVICE) == []


def test_max_len_caps_discovery():
    graph = graph_of(("p", "q"), ("q", "r"), ("r", "s"), ("s", "t"))
    assert discover_chains(graph, "p", "t", SERVICE, max_len=3) == []


def test_source_equals_target_rejected():
    graph = graph_of(("p", "q"))
    with pytest.raises(ValueError):
        discover_chains(graph, "p", "p", SERVICE)


def test_max_len_bounds_enforced():
    graph = graph_of(("p", "q"))
    with pytest.raises(ValueError):
        discover_chains(graph, "p", "q", SERVICE, max_len=1)
    with pytest.raises(ValueError):
        discover_chains(graph, "p", "q", SERVICE, max_len=9)


def test_edges_are_service_scoped():
    graph = TrustGraph()
    graph.add_edge("p", "q", "files", stats())
    graph.add_edge("q", "r", "mail", stats())
    assert discover_chains(graph, "p", "r", "files") == []


def test_chains_never_revisit_nodes_and_order_is_deterministic():
    graph = graph_of(
        ("p", "q", stats(n_p=9, n=10, sl=1.0, dt=0.9)),
        ("q", "r", stats(n_p=10, n=10, sl=1.0, dt=0.8)),
        ("p", "x", stats(n_p=1, n=10, sl=0.5, dt=0.3)),
        ("x", "r", stats(n_p=1, n=10, sl=0.5, dt=0.2)),
        ("q", "x", stats()),
        ("x", "q", stats()),
    )
    chains = discover_chains(graph, "p", "r", SERVICE, max_len=4)
    for chain in chains:
        assert len(set(chain.nodes)) == len(chain.nodes)
    weights = [c.total_weight for c in chains]
    assert weights == sorted(weights, reverse=True)
    again = discover_chains(graph, "p", "r", SERVICE, max_len=4)
    assert [c.nodes for c in again] == [c.nodes for c in chains]


def test_raising_max_len_only_adds_chains():
    rng = random.Random(7)
    for _ in range(30):
        edge_set = random_edge_set(rng, n_nodes=6, p=0.4)
        graph = graph_of(*[(a, b) for a, b in edge_set])
        previous: set = set()
        for max_len in range(2, 7):
            nodes = {c.nodes for c in discover_chains(graph, "n0", "n1", SERVICE, max_len)}
            assert previous <= nodes
            previous = nodes


# ---------------------------------------------------------------------------
# discovery vs brute force


def random_edge_set(rng, n_nodes, p):
    names = [f"n{i}" for i in range(n_nodes)]
    return {
        (a, b)
        for a in names
        for b in names
        if a != b and rng.random() < p
    }


def test_discovery_matches_brute_force_enumeration():
    rng = random.Random(31337)
    for _ in range(60):
        n_nodes = rng.randint(2, 8)
        edge_set = random_edge_set(rng, n_nodes, rng.uniform(0.15, 0.5))
        graph = graph_of(*[(a, b) for a, b in edge_set])
        graph.add_node("n0")
        graph.add_node("n1")
        max_len = rng.randint(2, 6)
        got = {c.nodes for c in discover_chains(graph, "n0", "n1", SERVICE, max_len)}
        want = enumerate_paths_brute_force(edge_set, "n0", "n1", max_len)
        assert got == want


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_two_edge_example():
    graph = TrustGraph()
    graph.add_edge("p", "q", SERVICE, stats(n_p=1, n=2, sl=1.0, dt=0.8))  # W = 0.5
    graph.add_edge("q", "r", SERVICE, stats(n_p=1, n=1, sl=1.0, dt=0.6))  # W = 1.0
    outcome = evaluate_recommendation(graph, "p", "r", SERVICE)
    assert outcome is not None
    value, count = outcome
    assert count == 1
    assert value == pytest.approx(1.0 / 1.5, rel=1e-12)


def test_evaluate_none_without_chains():
    graph = graph_of(("p", "q"))
    assert evaluate_recommendation(graph, "p", "r", SERVICE) is None


def test_evaluate_agreeing_chains_preserve_value():
    graph = graph_of(
        ("p", "q", stats(dt=0.7)),
        ("q", "r", stats(dt=0.7)),
        ("p", "x", stats(dt=0.7)),
        ("x", "r", stats(dt=0.7)),
    )
    outcome = evaluate_recommendation(graph, "p", "r", SERVICE)
    assert outcome == (pytest.approx(0.7), 2)


def test_evaluate_drops_zero_weight_chains():
    graph = graph_of(
        ("p", "q", stats(n_p=0, n=5, dt=0.9)),  # zero weight: no information
        ("q", "r", stats(n_p=0, n=5, dt=0.9)),
        ("p", "x", stats(n_p=5, n=5, sl=0.8, dt=0.4)),
        ("x", "r", stats(n_p=5, n=5, sl=0.8, dt=0.6)),
    )
    outcome = evaluate_recommendation(graph, "p", "r", SERVICE)
    value, count = outcome
    assert count == 1
    assert value == pytest.approx(0.5, rel=1e-12)


def test_evaluate_none_when_all_chains_are_zero_weight():
    graph = graph_of(
        ("p", "q", stats(n_p=0, n=5)),
        ("q", "r", stats(n_p=0, n=5)),
    )
    assert evaluate_recommendation(graph, "p", "r", SERVICE) is None


def test_evaluate_weighs_chains_by_total_evidence():
    graph = graph_of(
        ("p", "q", stats(n_p=10, n=10, sl=1.0, dt=0.9)),  # heavy chain, W sum 2.0
        ("q", "r", stats(n_p=10, n=10, sl=1.0, dt=0.9)),
        ("p", "x", stats(n_p=1, n=10, sl=1.0, dt=0.1)),  # light chain, W sum 0.2
        ("x", "r", stats(n_p=1, n=10, sl=1.0, dt=0.1)),
    )
    value, count = evaluate_recommendation(graph, "p", "r", SERVICE)
    assert count == 2
    # weighted mean of chain values 0.9 (weight 2.0) and 0.1 (weight 0.2)
    assert value == pytest.approx((0.9 * 2.0 + 0.1 * 0.2) / 2.2, rel=1e-12)


def test_edge_weight_feeds_chain_edges():
    graph = TrustGraph()
    graph.add_edge("p", "q", SERVICE, stats(n_p=3, n=4, sl=0.5, dt=0.8))
    graph.add_edge("q", "r", SERVICE, stats(n_p=2, n=2, sl=0.9, dt=0.6))
    (chain,) = discover_chains(graph, "p", "r", SERVICE)
    assert chain.edges[0].weight == edge_weight(3, 4, 0.5)
    assert chain.edges[1].weight == edge_weight(2, 2, 0.9)
    assert chain_trust(chain) == pytest.approx(
        (edge_weight(3, 4, 0.5) * 0.8 + edge_weight(2, 2, 0.9) * 0.6)
        / (edge_weight(3, 4, 0.5) + edge_weight(2, 2, 0.9)),
        rel=1e-12,
    )


# ---------------------------------------------------------------------------
# graph structure and fixtures


def test_graph_rejects_self_edges():
    graph = TrustGraph()
    with pytest.raises(ValueError):
        graph.add_edge("p", "p", SERVICE, stats())


def test_edge_stats_validation():
    with pytest.raises(ValueError):
        EdgeStats(n_positive=1, n_total=0, sl=1.0, direct_trust=0.5)
    with pytest.raises(ValueError):
        EdgeStats(n_positive=3, n_total=2, sl=1.0, direct_trust=0.5)
    with pytest.raises(ValueError):
        EdgeStats(n_positive=1, n_total=2, sl=1.5, direct_trust=0.5)


def test_fixture_round_trip():
    graph = graph_of(
        ("p", "q", stats(n_p=3, n=4, sl=0.5, dt=0.8)),
        ("q", "r", stats(n_p=2, n=2, sl=0.9, dt=0.6)),
    )
    graph.add_node("lonely")
    restored = TrustGraph.from_json(graph.to_json())
    assert restored.nodes == graph.nodes
    assert list(restored.edges()) == list(graph.edges())


def test_fixture_format_field_names():
    import json

    document = json.loads(graph_of(("p", "q")).to_json())
    assert set(document) == {"nodes", "edges"}
    assert set(document["edges"][0]) == {"from", "to", "service", "n_p", "n", "sl", "dt"}


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[1, 2]",
        '{"nodes": "oops", "edges": []}',
        '{"nodes": [], "edges": [{"from": "a"}]}',
        '{"nodes": [], "edges": [{"from": "a", "to": "b", "service": "s", "n_p": 1, "n": 0, "sl": 1, "dt": 1}]}',
        '{"nodes": [], "edges": [{"from": "a", "to": "b", "service": "s", "n_p": 1.5, "n": 2, "sl": 1, "dt": 1}]}',
    ],
)
def test_malformed_fixtures_rejected(text):
    with pytest.raises(FixtureError):
        TrustGraph.from_json(text)

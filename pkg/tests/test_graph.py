"""Relation graph: construction, symmetry, closure vs a BFS oracle, footprint."""

import random
from collections import deque

import pytest

from sramda.errors import UnknownIdError
from sramda.graph import (
    AttackGraph,
    build_graph,
    contributes_closure,
    layer_footprint,
    related_neighbors,
    to_dot,
)
from sramda.model import DltLayer

from conftest import make_kb, make_record


# independent reference: breadth-first reachability
def bfs_reachable(edges: set[tuple[str, str]], start: str) -> list[str]:
    successors: dict[str, list[str]] = {}
    for src, dst in edges:
        successors.setdefault(src, []).append(dst)
    seen: set[str] = set()
    queue = deque(successors.get(start, ()))
    while queue:
        node = queue.popleft()
        if node in seen:
            continue
        seen.add(node)
        queue.extend(successors.get(node, ()))
    seen.discard(start)
    return sorted(seen)


def random_digraph(rng: random.Random, max_nodes: int = 50) -> AttackGraph:
    n = rng.randint(2, max_nodes)
    nodes = [f"node-{i}" for i in range(n)]
    edges = set()
    for _ in range(rng.randint(0, 3 * n)):
        a, b = rng.sample(nodes, 2)
        edges.add((a, b))
    return AttackGraph(
        nodes=frozenset(nodes),
        related_edges=frozenset(),
        contributes_edges=frozenset(edges),
    )


class TestBuildGraph:
    def test_seed_kb_eclipse_sybil_edge(self, seed_kb):
        graph = build_graph(seed_kb)
        assert tuple(sorted(("eclipse-attack", "sybil-attack"))) in graph.related_edges

    def test_node_count_equals_record_count(self, seed_kb):
        graph = build_graph(seed_kb)
        assert len(graph.nodes) == len(seed_kb)

    def test_isolated_record(self):
        kb = make_kb(make_record("Lonely Attack"))
        graph = build_graph(kb)
        assert graph.nodes == frozenset({"lonely-attack"})
        assert not graph.related_edges and not graph.contributes_edges

    def test_one_sided_relation_symmetrized(self):
        kb = make_kb(
            make_record("Alpha Attack", relates=("beta-attack",)),
            make_record("Beta Attack"),
        )
        graph = build_graph(kb)
        assert graph.related_edges == frozenset({("alpha-attack", "beta-attack")})
        assert related_neighbors(graph, "beta-attack") == ["alpha-attack"]

    def test_edges_invariant_under_insertion_order(self):
        a = make_record("Alpha Attack", relates=("beta-attack",))
        b = make_record("Beta Attack", contributes=("alpha-attack",))
        assert build_graph(make_kb(a, b)) == build_graph(make_kb(b, a))


class TestRelatedNeighbors:
    def test_eclipse_includes_sybil(self, seed_kb):
        assert "sybil-attack" in related_neighbors(build_graph(seed_kb), "eclipse-attack")

    def test_long_range_has_none(self, seed_kb):
        assert related_neighbors(build_graph(seed_kb), "long-range-attack") == []

    def test_unknown_slug_rejected(self, seed_kb):
        with pytest.raises(UnknownIdError):
            related_neighbors(build_graph(seed_kb), "ghost-attack")

    def test_symmetry_over_seed_kb(self, seed_kb):
        graph = build_graph(seed_kb)
        for a in graph.nodes:
            for b in related_neighbors(graph, a):
                assert a in related_neighbors(graph, b)


class TestContributesClosure:
    def test_eclipse_closure_includes_materialized_targets(self, seed_kb):
        closure = contributes_closure(build_graph(seed_kb), "eclipse-attack")
        assert "splitting-mining-power-51-attack" in closure
        assert "selfish-mining-attack" in closure

    def test_two_hop_chain(self):
        kb = make_kb(
            make_record("Alpha Attack", contributes=("beta-attack",)),
            make_record("Beta Attack", contributes=("gamma-attack",)),
            make_record("Gamma Attack"),
        )
        assert contributes_closure(build_graph(kb), "alpha-attack") == [
            "beta-attack", "gamma-attack",
        ]

    def test_cycle_terminates_and_excludes_origin_only(self):
        graph = AttackGraph(
            nodes=frozenset({"a", "b", "c"}),
            related_edges=frozenset(),
            contributes_edges=frozenset({("a", "b"), ("b", "c"), ("c", "a")}),
        )
        assert contributes_closure(graph, "a") == ["b", "c"]

    def test_self_loop_free_reflexivity(self):
        graph = AttackGraph(
            nodes=frozenset({"a", "b"}),
            related_edges=frozenset(),
            contributes_edges=frozenset({("a", "b"), ("b", "a")}),
        )
        # a reaches itself through the cycle, but the closure excludes it
        assert contributes_closure(graph, "a") == ["b"]

    def test_unknown_slug_rejected(self, seed_kb):
        with pytest.raises(UnknownIdError):
            contributes_closure(build_graph(seed_kb), "ghost-attack")

    def test_matches_bfs_oracle_on_random_digraphs(self):
        rng = random.Random(0xD1CE)
        for _ in range(80):
            graph = random_digraph(rng, max_nodes=40)
            start = rng.choice(sorted(graph.nodes))
            assert contributes_closure(graph, start) == bfs_reachable(
                set(graph.contributes_edges), start
            )

    def test_monotone_in_edge_set(self):
        rng = random.Random(0xFEED)
        for _ in range(30):
            graph = random_digraph(rng, max_nodes=20)
            edges = sorted(graph.contributes_edges)
            if not edges:
                continue
            smaller = AttackGraph(
                nodes=graph.nodes,
                related_edges=frozenset(),
                contributes_edges=frozenset(edges[:-1]),
            )
            start = rng.choice(sorted(graph.nodes))
            assert set(contributes_closure(smaller, start)) <= set(
                contributes_closure(graph, start)
            )


class TestLayerFootprint:
    def test_empty_set_all_zero(self, seed_kb):
        counts = layer_footprint(seed_kb, set())
        assert set(counts) == set(DltLayer)
        assert all(v == 0 for v in counts.values())

    def test_multi_layer_attack_counts_in_each(self):
        kb = make_kb(
            make_record("Wide Attack", layers=(DltLayer.NETWORK, DltLayer.CONSENSUS)),
        )
        counts = layer_footprint(kb, {"wide-attack"})
        assert counts[DltLayer.NETWORK] == 1
        assert counts[DltLayer.CONSENSUS] == 1
        assert counts[DltLayer.EXECUTION] == 0

    def test_unknown_slug_rejected(self, seed_kb):
        with pytest.raises(UnknownIdError):
            layer_footprint(seed_kb, {"ghost-attack"})

    def test_mobifi_confirmed_set_peaks_at_network(self, seed_kb, mobifi_script):
        from sramda.assessment import RiskStatus, run_script

        session, final_kb = run_script(mobifi_script, seed_kb)
        confirmed = {r.attack_id for r in session.risks if r.status is RiskStatus.CONFIRMED}
        counts = layer_footprint(final_kb, confirmed)
        top = max(counts, key=lambda layer: counts[layer])
        assert top is DltLayer.NETWORK


class TestDotExport:
    def test_dot_contains_both_edge_styles(self, seed_kb):
        dot = to_dot(build_graph(seed_kb))
        assert dot.startswith("digraph attacks {")
        assert '"eclipse-attack" -> "selfish-mining-attack";' in dot
        assert '"eclipse-attack" -> "sybil-attack" [dir=none, style=dashed];' in dot

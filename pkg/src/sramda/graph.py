"""Relation graph over attack records: neighborhood, reachability, and
layer footprint queries used during risk analysis and recommendation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownIdError
from .model import LAYER_ORDER, DltLayer, KnowledgeBase


@dataclass(frozen=True)
class AttackGraph:
    """Nodes are record slugs. `related_edges` holds unordered pairs
    (stored as sorted 2-tuples); `contributes_edges` are directed
    (source, target) pairs."""

    nodes: frozenset[str]
    related_edges: frozenset[tuple[str, str]]
    contributes_edges: frozenset[tuple[str, str]]

    def _require(self, slug: str) -> None:
        if slug not in self.nodes:
            raise UnknownIdError("slug", slug)


def build_graph(kb: KnowledgeBase) -> AttackGraph:
    """One node per record; relates_to entries become deduplicated unordered
    edges (symmetric even when stored one-sided), contributes_to entries
    become directed edges. Dangling targets were rejected at KB load."""
    related: set[tuple[str, str]] = set()
    contributes: set[tuple[str, str]] = set()
    for record in kb:
        for target in record.relates_to:
            related.add(tuple(sorted((record.id, target))))
        for target in record.contributes_to:
            contributes.add((record.id, target))
    return AttackGraph(
        nodes=frozenset(kb.slugs()),
        related_edges=frozenset(related),
        contributes_edges=frozenset(contributes),
    )


def related_neighbors(graph: AttackGraph, slug: str) -> list[str]:
    """All slugs sharing a related edge with `slug`, sorted."""
    graph._require(slug)
    neighbors = set()
    for a, b in graph.related_edges:
        if a == slug:
            neighbors.add(b)
        elif b == slug:
            neighbors.add(a)
    return sorted(neighbors)


def contributes_closure(graph: AttackGraph, slug: str) -> list[str]:
    """Transitive closure along directed contributes edges from `slug`,
    excluding `slug` itself; terminates on cycles (visited-set DFS)."""
    graph._require(slug)
    successors: dict[str, list[str]] = {}
    for src, dst in graph.contributes_edges:
        successors.setdefault(src, []).append(dst)

    visited: set[str] = set()
    stack = list(successors.get(slug, ()))
    while stack:
        node = stack.pop()
        if node in visited:
            continue
        visited.add(node)
        stack.extend(successors.get(node, ()))
    visited.discard(slug)
    return sorted(visited)


def layer_footprint(kb: KnowledgeBase, slugs: set[str] | frozenset[str]) -> dict[DltLayer, int]:
    """Count how many of the given attacks impact each layer; an attack with
    several layers counts in each. All six layers appear in the result."""
    counts = {layer: 0 for layer in LAYER_ORDER}
    for slug in sorted(slugs):
        record = kb.get(slug)
        if record is None:
            raise UnknownIdError("slug", slug)
        for layer in record.impacted_layers:
            counts[layer] += 1
    return counts


def to_dot(graph: AttackGraph) -> str:
    """Render as a DOT document: solid directed edges for contributes,
    dashed undirected edges for relates."""
    lines = ["digraph attacks {"]
    for node in sorted(graph.nodes):
        lines.append(f'  "{node}";')
    for src, dst in sorted(graph.contributes_edges):
        lines.append(f'  "{src}" -> "{dst}";')
    for a, b in sorted(graph.related_edges):
        lines.append(f'  "{a}" -> "{b}" [dir=none, style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"

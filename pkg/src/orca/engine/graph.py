"""Causal DAGs, d-separation, and backdoor adjustment-set identification."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from ..errors import CyclicGraph, DanglingEdge, DuplicateNode, NotIdentifiable


@dataclass(frozen=True)
class CausalGraph:
    """Directed graph over named variables.

    ``unobserved`` nodes may appear on paths but are never eligible for
    adjustment.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    unobserved: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def build(
        cls,
        edges: Iterable[tuple[str, str]],
        nodes: Iterable[str] = (),
        unobserved: Iterable[str] = (),
    ) -> "CausalGraph":
        edge_list = [tuple(e) for e in edges]
        seen: list[str] = []
        for name in list(nodes) + [n for e in edge_list for n in e]:
            if name not in seen:
                seen.append(name)
        return cls(
            nodes=tuple(seen),
            edges=tuple(edge_list),
            unobserved=frozenset(unobserved),
        )


@dataclass
class Estimand:
    kind: str  # "backdoor"
    adjustment_set: frozenset[str]
    expression_text: str


class _Adjacency:
    def __init__(self, graph: CausalGraph):
        self.parents: dict[str, list[str]] = {n: [] for n in graph.nodes}
        self.children: dict[str, list[str]] = {n: [] for n in graph.nodes}
        for src, dst in graph.edges:
            self.children[src].append(dst)
            self.parents[dst].append(src)


def validate_graph(graph: CausalGraph) -> None:
    """Raise on duplicate nodes, dangling edges, or cycles."""
    if len(set(graph.nodes)) != len(graph.nodes):
        dupes = sorted({n for n in graph.nodes if graph.nodes.count(n) > 1})
        raise DuplicateNode(f"duplicate node names: {dupes}")
    node_set = set(graph.nodes)
    for src, dst in graph.edges:
        if src not in node_set or dst not in node_set:
            raise DanglingEdge(f"edge {src} -> {dst} references an unknown node")
    adj = _Adjacency(graph)
    # Kahn's algorithm: leftover nodes form at least one cycle.
    indegree = {n: len(adj.parents[n]) for n in graph.nodes}
    queue = [n for n in graph.nodes if indegree[n] == 0]
    seen = 0
    while queue:
        node = queue.pop()
        seen += 1
        for child in adj.children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if seen != len(graph.nodes):
        cyclic = sorted(n for n in graph.nodes if indegree[n] > 0)
        raise CyclicGraph(f"graph contains a cycle through: {cyclic}")


def _closure(start: Iterable[str], step: dict[str, list[str]]) -> set[str]:
    out: set[str] = set()
    frontier = list(start)
    while frontier:
        node = frontier.pop()
        for nxt in step.get(node, ()):
            if nxt not in out:
                out.add(nxt)
                frontier.append(nxt)
    return out


def descendants(graph: CausalGraph, node: str) -> set[str]:
    """Strict descendants (excludes the node itself)."""
    return _closure([node], _Adjacency(graph).children)


def ancestors(graph: CausalGraph, node: str) -> set[str]:
    """Strict ancestors (excludes the node itself)."""
    return _closure([node], _Adjacency(graph).parents)


def has_directed_path(graph: CausalGraph, src: str, dst: str) -> bool:
    return dst in _closure([src], _Adjacency(graph).children)


def d_separated(graph: CausalGraph, x: str, y: str, given: Iterable[str]) -> bool:
    """Directional-reachability (Bayes-ball) test of x ⫫ y | given."""
    z = set(given)
    adj = _Adjacency(graph)
    conditioned_ancestors = _closure(z, adj.parents) | z

    visited: set[tuple[str, str]] = set()
    frontier: list[tuple[str, str]] = [(x, "up")]
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == y and node not in z:
            return False
        if direction == "up" and node not in z:
            frontier.extend((p, "up") for p in adj.parents[node])
            frontier.extend((c, "down") for c in adj.children[node])
        elif direction == "down":
            if node not in z:
                frontier.extend((c, "down") for c in adj.children[node])
            if node in conditioned_ancestors:
                frontier.extend((p, "up") for p in adj.parents[node])
    return True


def backdoor_graph(graph: CausalGraph, treatment: str) -> CausalGraph:
    """Copy of the graph with the treatment's outgoing edges removed."""
    kept = tuple(e for e in graph.edges if e[0] != treatment)
    return CausalGraph(nodes=graph.nodes, edges=kept, unobserved=graph.unobserved)


def identify_backdoor(graph: CausalGraph, treatment: str, outcome: str) -> Estimand:
    """Minimal-cardinality observable adjustment set for (treatment, outcome).

    Candidates are observable non-descendants of the treatment. Subsets are
    searched by ascending size; within a size, in lexicographic order of the
    sorted variable list, so the returned set is the deterministic minimum.
    """
    validate_graph(graph)
    node_set = set(graph.nodes)
    if treatment not in node_set or outcome not in node_set:
        raise ValueError("treatment and outcome must be graph nodes")
    if treatment == outcome:
        raise ValueError("treatment and outcome must differ")

    forbidden = descendants(graph, treatment) | {treatment, outcome}
    candidates = sorted(n for n in node_set - forbidden if n not in graph.unobserved)
    stripped = backdoor_graph(graph, treatment)

    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            if d_separated(stripped, treatment, outcome, combo):
                zset = frozenset(combo)
                return Estimand(
                    kind="backdoor",
                    adjustment_set=zset,
                    expression_text=_expression_text(treatment, outcome, zset),
                )
    witness = _confounding_witness(stripped, treatment, outcome)
    raise NotIdentifiable(
        f"no observable adjustment set blocks every backdoor path from "
        f"{treatment} to {outcome}; open path: {witness}"
    )


def _expression_text(treatment: str, outcome: str, zset: frozenset[str]) -> str:
    if not zset:
        return (
            f"E[{outcome} | do({treatment})] = E[{outcome} | {treatment}] "
            f"(no backdoor adjustment required)"
        )
    zs = ", ".join(sorted(zset))
    return (
        f"E[{outcome} | do({treatment})] = "
        f"sum over values of {{{zs}}} of E[{outcome} | {treatment}, {zs}] "
        f"weighted by P({zs})"
    )


def _confounding_witness(stripped: CausalGraph, treatment: str, outcome: str) -> str:
    """A collider-free path open given the empty set, rendered with arrows.

    When identification fails, the empty set in particular failed, so such a
    path always exists.
    """
    adj = _Adjacency(stripped)

    def neighbors(node: str):
        for p in sorted(adj.parents[node]):
            yield p, "<-"
        for c in sorted(adj.children[node]):
            yield c, "->"

    # DFS over simple paths; reject any step that would create a collider.
    stack: list[tuple[str, list[str], list[str], Optional[str]]] = [
        (treatment, [treatment], [], None)
    ]
    while stack:
        node, path, arrows, last_arrow = stack.pop()
        for nxt, arrow in neighbors(node):
            if nxt in path:
                continue
            if last_arrow == "->" and arrow == "<-":
                continue  # collider at `node`: blocked given the empty set
            if nxt == outcome:
                pieces = []
                for name, a in zip(path, arrows + [arrow]):
                    pieces.append(name)
                    pieces.append(a)
                pieces.append(outcome)
                return " ".join(pieces)
            stack.append((nxt, path + [nxt], arrows + [arrow], arrow))
    return "(no witness path found)"


# --- edge-list exchange format ------------------------------------------------


def parse_graph_text(text: str) -> CausalGraph:
    """Parse the edge-list exchange format.

    One ``A -> B`` per line; ``#`` starts a comment; a bare name declares an
    isolated node; ``unobserved: U1 U2`` marks nodes as latent.
    """
    edges: list[tuple[str, str]] = []
    nodes: list[str] = []
    unobserved: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("unobserved:"):
            names = line.split(":", 1)[1].replace(",", " ").split()
            unobserved.extend(names)
            nodes.extend(names)
            continue
        if "->" in line:
            src, dst = (part.strip() for part in line.split("->", 1))
            if not src or not dst:
                raise ValueError(f"malformed edge line: {raw!r}")
            edges.append((src, dst))
        else:
            if len(line.split()) != 1:
                raise ValueError(f"malformed graph line: {raw!r}")
            nodes.append(line)
    return CausalGraph.build(edges=edges, nodes=nodes, unobserved=unobserved)


def render_graph_text(graph: CausalGraph) -> str:
    lines = [f"{src} -> {dst}" for src, dst in graph.edges]
    connected = {n for e in graph.edges for n in e}
    lines.extend(n for n in graph.nodes if n not in connected)
    if graph.unobserved:
        lines.append("unobserved: " + " ".join(sorted(graph.unobserved)))
    return "\n".join(lines) + "\n"

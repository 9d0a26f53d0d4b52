"""Graph validation, d-separation, and backdoor identification tests.

The identification oracle used here is deliberately independent of the
package: exhaustive subset enumeration judged by networkx's d-separation.
"""

from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orca.engine import (
    CausalGraph,
    ancestors,
    d_separated,
    descendants,
    has_directed_path,
    identify_backdoor,
    parse_graph_text,
    render_graph_text,
    validate_graph,
)
from orca.errors import CyclicGraph, DanglingEdge, DuplicateNode, NotIdentifiable


def graph(*edges, nodes=(), unobserved=()):
    return CausalGraph.build(edges=edges, nodes=nodes, unobserved=unobserved)


def oracle_minimal_backdoor(g: CausalGraph, treatment: str, outcome: str):
    """Brute force: smallest (then lexicographically first) observable subset
    of non-descendants that d-separates treatment from outcome once the
    treatment's outgoing edges are removed. Returns None when no set works.
    """
    full = nx.DiGraph()
    full.add_nodes_from(g.nodes)
    full.add_edges_from(g.edges)
    forbidden = nx.descendants(full, treatment) | {treatment, outcome}
    candidates = sorted(
        n for n in set(g.nodes) - forbidden if n not in g.unobserved
    )
    stripped = nx.DiGraph()
    stripped.add_nodes_from(g.nodes)
    stripped.add_edges_from(e for e in g.edges if e[0] != treatment)
    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            if nx.is_d_separator(stripped, {treatment}, {outcome}, set(combo)):
                return frozenset(combo)
    return None


def random_dag(rng, max_nodes=8, with_latents=False):
    n = rng.randint(3, max_nodes)
    names = [chr(ord("A") + i) for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                edges.append((order[i], order[j]))
    unobserved = ()
    if with_latents and n > 3:
        unobserved = tuple(rng.sample(names[2:], rng.randint(0, min(2, n - 3))))
    return CausalGraph.build(edges=edges, nodes=names, unobserved=unobserved)


class TestValidation:
    def test_valid_chain(self):
        validate_graph(graph(("A", "B"), ("B", "C")))

    def test_cycle(self):
        with pytest.raises(CyclicGraph):
            validate_graph(graph(("A", "B"), ("B", "A")))

    def test_long_cycle(self):
        with pytest.raises(CyclicGraph):
            validate_graph(graph(("A", "B"), ("B", "C"), ("C", "A")))

    def test_duplicate_node(self):
        with pytest.raises(DuplicateNode):
            validate_graph(CausalGraph(nodes=("A", "A"), edges=()))

    def test_dangling_edge(self):
        with pytest.raises(DanglingEdge):
            validate_graph(CausalGraph(nodes=("A",), edges=(("A", "B"),)))


class TestDSeparation:
    def test_chain_blocked_by_middle(self):
        g = graph(("A", "B"), ("B", "C"))
        assert not d_separated(g, "A", "C", [])
        assert d_separated(g, "A", "C", ["B"])

    def test_fork_blocked_by_root(self):
        g = graph(("B", "A"), ("B", "C"))
        assert not d_separated(g, "A", "C", [])
        assert d_separated(g, "A", "C", ["B"])

    def test_collider_opens_when_conditioned(self):
        g = graph(("A", "B"), ("C", "B"))
        assert d_separated(g, "A", "C", [])
        assert not d_separated(g, "A", "C", ["B"])

    def test_collider_descendant_opens_path(self):
        g = graph(("A", "B"), ("C", "B"), ("B", "D"))
        assert d_separated(g, "A", "C", [])
        assert not d_separated(g, "A", "C", ["D"])

    @settings(max_examples=100, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_matches_networkx_on_random_dags(self, rng):
        g = random_dag(rng)
        nxg = nx.DiGraph()
        nxg.add_nodes_from(g.nodes)
        nxg.add_edges_from(g.edges)
        names = list(g.nodes)
        x, y = rng.sample(names, 2)
        pool = [n for n in names if n not in (x, y)]
        z = set(rng.sample(pool, rng.randint(0, len(pool))))
        assert d_separated(g, x, y, z) == nx.is_d_separator(nxg, {x}, {y}, z)


class TestHelpers:
    def test_descendants_and_ancestors(self):
        g = graph(("A", "B"), ("B", "C"), ("D", "C"))
        assert descendants(g, "A") == {"B", "C"}
        assert ancestors(g, "C") == {"A", "B", "D"}

    def test_directed_path(self):
        g = graph(("A", "B"), ("B", "C"))
        assert has_directed_path(g, "A", "C")
        assert not has_directed_path(g, "C", "A")


class TestIdentifyBackdoor:
    def test_classic_confounder(self):
        g = graph(("Z", "T"), ("Z", "Y"), ("T", "Y"))
        assert identify_backdoor(g, "T", "Y").adjustment_set == {"Z"}

    def test_chain_needs_nothing(self):
        g = graph(("T", "M"), ("M", "Y"))
        assert identify_backdoor(g, "T", "Y").adjustment_set == frozenset()

    def test_collider_excluded(self):
        g = graph(("T", "C"), ("Y", "C"), ("T", "Y"))
        assert identify_backdoor(g, "T", "Y").adjustment_set == frozenset()

    def test_two_confounders(self):
        g = graph(
            ("A", "T"), ("A", "Y"), ("B", "T"), ("B", "Y"), ("T", "Y")
        )
        assert identify_backdoor(g, "T", "Y").adjustment_set == {"A", "B"}

    def test_mediator_not_adjusted(self):
        g = graph(("T", "M"), ("M", "Y"), ("Z", "T"), ("Z", "Y"))
        assert identify_backdoor(g, "T", "Y").adjustment_set == {"Z"}

    def test_unobserved_confounder_not_identifiable(self):
        g = graph(("U", "T"), ("U", "Y"), ("T", "Y"), unobserved=("U",))
        with pytest.raises(NotIdentifiable) as excinfo:
            identify_backdoor(g, "T", "Y")
        assert "U" in str(excinfo.value)

    def test_unobserved_bypassed_by_observable_blocker(self):
        # T <- Z <- U -> Y: conditioning on Z blocks the path through U.
        g = graph(("U", "Z"), ("Z", "T"), ("U", "Y"), ("T", "Y"), unobserved=("U",))
        assert identify_backdoor(g, "T", "Y").adjustment_set == {"Z"}

    def test_lexicographic_tie_break(self):
        # Either {A} or {B} blocks the single backdoor chain; A wins.
        g = graph(("A", "T"), ("B", "A"), ("B", "Y"), ("A", "Y"), ("T", "Y"))
        result = identify_backdoor(g, "T", "Y")
        oracle = oracle_minimal_backdoor(g, "T", "Y")
        assert result.adjustment_set == oracle

    def test_expression_text_mentions_adjustment(self):
        g = graph(("Z", "T"), ("Z", "Y"), ("T", "Y"))
        e = identify_backdoor(g, "T", "Y")
        assert "Z" in e.expression_text and "do(T)" in e.expression_text

    @settings(max_examples=120, deadline=None)
    @given(st.randoms(use_true_random=False), st.booleans())
    def test_matches_exhaustive_oracle(self, rng, with_latents):
        g = random_dag(rng, with_latents=with_latents)
        names = list(g.nodes)
        observable = [n for n in names if n not in g.unobserved]
        if len(observable) < 2:
            return
        treatment, outcome = rng.sample(observable, 2)
        expected = oracle_minimal_backdoor(g, treatment, outcome)
        if expected is None:
            with pytest.raises(NotIdentifiable):
                identify_backdoor(g, treatment, outcome)
        else:
            assert identify_backdoor(g, treatment, outcome).adjustment_set == expected


class TestExchangeFormat:
    def test_parse_edges_comments_and_latents(self):
        text = "# demo\nZ -> T\nZ -> Y  # confounder\nT -> Y\nW\nunobserved: U\n"
        g = parse_graph_text(text)
        assert set(g.nodes) == {"Z", "T", "Y", "W", "U"}
        assert ("Z", "T") in g.edges
        assert g.unobserved == {"U"}

    def test_round_trip(self):
        g = graph(("A", "B"), ("B", "C"), nodes=("D",), unobserved=("D",))
        assert parse_graph_text(render_graph_text(g)) == g

    def test_malformed_edge_rejected(self):
        with pytest.raises(ValueError):
            parse_graph_text("A -> \n")

import random

import pytest
from hypothesis import given, settings, strategies as st

from modgraph.errors import NotAModule, NotInSignature, TooSmall
from modgraph.generators import random_digraph, random_f_graph, random_term
from modgraph.graphs import LabeledGraph
from modgraph.mdec import (DecompositionCase, NodeKind, binarize,
                           brute_force_modules, brute_force_prime_modules,
                           decompose, format_tree, maximal_prime_modules,
                           quotient_graph, reconstruct, shuffle_admissible,
                           tree_prime_modules, tree_to_term)
from modgraph.samples import spw5_signature, word_graph
from modgraph.signature import Term, eval_term


def leaf(s):
    return Term.leaf(s)


def node(op, *kids):
    return Term.node(op, list(kids))


SIG = spw5_signature()


class TestMaximalPrimeModules:
    def test_seq_chain_order(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a")))
        case, blocks = maximal_prime_modules(g)
        assert case is DecompositionCase.SEQ
        assert blocks == [frozenset({1}), frozenset({2}), frozenset({3})]

    def test_par_two_isolated(self):
        g = eval_term(SIG, node("par", leaf("a"), leaf("b")))
        case, blocks = maximal_prime_modules(g)
        assert case is DecompositionCase.PAR
        assert blocks == [frozenset({1}), frozenset({2})]

    def test_clique(self):
        g = LabeledGraph.build([1, 2], [(1, 2), (2, 1)], {1: "a", 2: "b"})
        case, _ = maximal_prime_modules(g)
        assert case is DecompositionCase.CLIQUE

    def test_w5_prime_quotient(self):
        g = eval_term(SIG, node("W5", *[leaf(s) for s in "ababa"]))
        case, blocks = maximal_prime_modules(g)
        assert case is DecompositionCase.PRIME_QUOTIENT
        assert len(blocks) == 5 and all(len(b) == 1 for b in blocks)

    def test_too_small(self):
        with pytest.raises(TooSmall):
            maximal_prime_modules(word_graph("a"))

    def test_non_consecutive_chain_blocks(self):
        # a . (b (+) b) . a : middle block is not a singleton
        g = eval_term(SIG, node("seq", leaf("a"),
                                node("par", leaf("b"), leaf("b")), leaf("a")))
        case, blocks = maximal_prime_modules(g)
        assert case is DecompositionCase.SEQ
        assert blocks == [frozenset({1}), frozenset({2, 3}), frozenset({4})]


class TestQuotient:
    def test_chain_quotient(self):
        g = word_graph("ab")
        q = quotient_graph(g, [frozenset({1}), frozenset({2})])
        assert q.edges == frozenset({(1, 2)})

    def test_block_pair(self):
        g = LabeledGraph.build([1, 2, 3], [(1, 3), (2, 3)],
                               {1: "a", 2: "a", 3: "a"})
        q = quotient_graph(g, [frozenset({1, 2}), frozenset({3})])
        assert q.edges == frozenset({(1, 2)})

    def test_single_block(self):
        g = word_graph("ab")
        q = quotient_graph(g, [g.vertices])
        assert q.n == 1 and not q.edges

    def test_rejects_non_module(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a")))
        with pytest.raises(NotAModule):
            quotient_graph(g, [frozenset({1, 3}), frozenset({2})])


class TestDecompose:
    def test_single_vertex_leaf(self):
        t = decompose(word_graph("a"))
        assert t.root.is_leaf and t.root.symbol == "a"

    def test_seq_par_tree(self):
        g = eval_term(SIG, node("seq", leaf("a"),
                                node("par", leaf("b"), leaf("b")), leaf("a")))
        t = decompose(g, SIG)
        root = t.root
        assert root.kind is NodeKind.SEQ
        kinds = [c.kind for c in root.children]
        assert kinds == [NodeKind.LEAF, NodeKind.PAR, NodeKind.LEAF]
        # ground truth from the subset-enumeration oracle
        assert tree_prime_modules(t) == brute_force_prime_modules(g)

    def test_w5_children_in_admissible_order(self):
        g = eval_term(SIG, node("W5", *[leaf(s) for s in "ababa"]))
        t = decompose(g, SIG)
        assert t.root.kind is NodeKind.PRIME and t.root.op.name == "W5"
        mods = [c.module for c in t.root.children]
        es = g.edges
        for (i, j) in t.root.op.graph.edges:
            assert all((u, v) in es for u in mods[i - 1] for v in mods[j - 1])

    def test_not_in_signature_carries_quotient(self):
        g = LabeledGraph.build([1, 2, 3], [(1, 2), (2, 3)],
                               {1: "a", 2: "a", 3: "a"})
        with pytest.raises(NotInSignature) as exc:
            decompose(g, SIG)
        assert exc.value.quotient is not None
        assert exc.value.quotient.n == 3

    def test_open_mode_accepts_any_prime(self):
        g = LabeledGraph.build([1, 2, 3], [(1, 2), (2, 3)],
                               {1: "a", 2: "a", 3: "a"})
        t = decompose(g)
        assert t.root.kind is NodeKind.PRIME


class TestBinarize:
    def test_three_children_comb(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a")))
        t = binarize(decompose(g, SIG))
        root = t.root
        assert [sorted(c.module) for c in root.children] == [[1], [2, 3]]
        inner = root.children[1]
        assert inner.kind is NodeKind.SEQ
        assert [sorted(c.module) for c in inner.children] == [[2], [3]]
        assert t.first_child(root).module == frozenset({1})

    def test_no_seq_unchanged(self):
        g = eval_term(SIG, node("par", leaf("a"), leaf("b")))
        t = decompose(g, SIG)
        assert reconstruct(binarize(t)) == g

    def test_two_children_kept(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b")))
        t = binarize(decompose(g, SIG))
        assert len(t.root.children) == 2
        assert all(not c.children for c in t.root.children)


class TestReconstruct:
    def test_leaf(self):
        t = decompose(word_graph("a"))
        assert reconstruct(t) == word_graph("a")

    def test_binarized_same_graph(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a"), leaf("b")))
        t = decompose(g, SIG)
        assert reconstruct(t) == g == reconstruct(binarize(t))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_roundtrip_random_terms(self, seed):
        rng = random.Random(seed)
        g = eval_term(SIG, random_term(rng, SIG, max_depth=5, max_leaves=10))
        t = decompose(g, SIG)
        assert reconstruct(t) == g
        assert reconstruct(binarize(t)) == g


class TestOracle:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        g = random_digraph(rng, rng.randint(1, 7))
        assert tree_prime_modules(decompose(g)) == brute_force_prime_modules(g)

    def test_modules_contain_trivial(self):
        g = word_graph("aba")
        mods = set(brute_force_modules(g))
        assert g.vertices in mods
        assert all(frozenset({v}) in mods for v in g.vertices)


class TestTreeOutput:
    def test_format_marks_first_child(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a")))
        text = format_tree(binarize(decompose(g, SIG)))
        assert "[first]" in text
        assert text.splitlines()[0].startswith("seq {1,2,3}")

    def test_term_roundtrip(self):
        t0 = node("seq", leaf("a"), node("par", leaf("b"), leaf("b")), leaf("a"))
        g = eval_term(SIG, t0)
        term = tree_to_term(decompose(g, SIG))
        assert eval_term(SIG, term) == g

    def test_binarized_term_is_flattened(self):
        g = eval_term(SIG, node("seq", leaf("a"), leaf("b"), leaf("a")))
        term = tree_to_term(binarize(decompose(g, SIG)))
        assert term.op == "seq" and len(term.children) == 3


class TestShuffle:
    def test_admissible_reorder_reconstructs_same_graph(self):
        rng = random.Random(5)
        for _ in range(20):
            g = random_f_graph(rng, SIG, max_depth=4, max_leaves=9)
            t = decompose(g, SIG)
            assert reconstruct(shuffle_admissible(t, rng)) == g

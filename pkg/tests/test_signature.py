import pytest
from hypothesis import given, settings, strategies as st

from modgraph.errors import ArityMismatch, NotWeaklyRigid, UnknownOp, UnknownSymbol
from modgraph.graphs import Alphabet, LabeledGraph
from modgraph.samples import (W5_GRAPH, cycle_graph, sp_signature,
                              spw5_signature, w5_op)
from modgraph.signature import (CLIQUE_OP, PAR_OP, SEQ_OP, Signature,
                                Term, compose, cp_equations, eval_term,
                                is_prime, is_weakly_rigid_op, prime_op,
                                select_distinguished,
                                validate_weakly_rigid_signature)

D3 = LabeledGraph.on_range(3, [(1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1)])
P4 = LabeledGraph.on_range(4, [(1, 2), (2, 1), (2, 3), (3, 2), (3, 4), (4, 3)])


def leaf(s):
    return Term.leaf(s)


def node(op, *kids):
    return Term.node(op, list(kids))


class TestPrimality:
    def test_undirected_triangle_not_prime(self):
        assert not is_prime(D3)

    def test_w5_prime(self):
        assert is_prime(W5_GRAPH)

    def test_undirected_path4_prime(self):
        assert is_prime(P4)

    def test_directed_cycles_prime(self):
        for n in (3, 4, 5, 6):
            assert is_prime(cycle_graph(n))


class TestCompose:
    def test_par_of_two_letters(self):
        g = compose(PAR_OP, [LabeledGraph.single_vertex("a"),
                             LabeledGraph.single_vertex("b")])
        assert g.n == 2 and not g.edges

    def test_seq_of_two_letters(self):
        g = compose(SEQ_OP, [LabeledGraph.single_vertex("a"),
                             LabeledGraph.single_vertex("b")])
        assert g.edges == frozenset({(1, 2)})
        assert g.labels == {1: "a", 2: "b"}

    def test_clique_of_two_letters(self):
        g = compose(CLIQUE_OP, [LabeledGraph.single_vertex("a"),
                                LabeledGraph.single_vertex("b")])
        assert g.edges == frozenset({(1, 2), (2, 1)})

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            compose(w5_op(), [LabeledGraph.single_vertex("a")] * 4)
        with pytest.raises(ArityMismatch):
            compose(SEQ_OP, [LabeledGraph.single_vertex("a")])


class TestEvalTerm:
    def test_leaf(self):
        g = eval_term(sp_signature(), leaf("a"))
        assert g.n == 1 and g.labels == {1: "a"}

    def test_seq_over_par(self):
        g = eval_term(sp_signature(), node("seq", leaf("a"),
                                           node("par", leaf("b"), leaf("b"))))
        assert g.edges == frozenset({(1, 2), (1, 3)})

    def test_associativity_exact(self):
        sig = sp_signature()
        left = node("seq", node("seq", leaf("a"), leaf("b")), leaf("a"))
        right = node("seq", leaf("a"), node("seq", leaf("b"), leaf("a")))
        assert eval_term(sig, left) == eval_term(sig, right)

    def test_flattening(self):
        t = node("seq", node("seq", leaf("a"), leaf("b")), leaf("a"))
        assert t.op == "seq" and len(t.children) == 3

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            eval_term(sp_signature(), leaf("z"))

    def test_unknown_op(self):
        with pytest.raises(UnknownOp):
            eval_term(sp_signature(), node("W5", *[leaf("a")] * 5))

    def test_leaf_count_is_vertex_count(self):
        sig = spw5_signature()
        t = node("W5", leaf("a"), leaf("b"), node("seq", leaf("a"), leaf("b")),
                 leaf("a"), node("par", leaf("b"), leaf("b")))
        assert eval_term(sig, t).n == len(t.leaves()) == 7


class TestSizeLaw:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
    def test_w5_edge_count(self, a, b, c):
        # |E| = sum of operand edges + sum over op edges of |V_i|*|V_j|
        sizes = [a, b, c, 1, 1]
        ops = [LabeledGraph.build(range(1, s + 1), [], {v: "a" for v in range(1, s + 1)})
               for s in sizes]
        g = compose(w5_op(), ops)
        expected = sum(sizes[i - 1] * sizes[j - 1] for (i, j) in W5_GRAPH.edges)
        assert len(g.edges) == expected
        assert g.n == sum(sizes)


class TestWeakRigidity:
    def test_seq_weakly_rigid(self):
        assert is_weakly_rigid_op(SEQ_OP)

    def test_cycles_not_weakly_rigid(self):
        for n in (3, 4, 5, 6):
            assert not is_weakly_rigid_op(prime_op(f"C{n}", cycle_graph(n)))

    def test_w5_weakly_rigid(self):
        assert is_weakly_rigid_op(w5_op())

    def test_commutative_ops_rejected(self):
        with pytest.raises(ValueError):
            is_weakly_rigid_op(PAR_OP)

    def test_sp_signature_accepted(self):
        assert validate_weakly_rigid_signature(sp_signature()).accepted

    def test_both_commutative_rejected(self):
        sig = Signature(Alphabet(("a",)), (PAR_OP, CLIQUE_OP))
        report = validate_weakly_rigid_signature(sig)
        assert not report.accepted
        assert any("commutative" in str(v) for v in report.violations)

    def test_cycle_rejected_with_full_orbit(self):
        sig = Signature(Alphabet(("a",)),
                        (SEQ_OP, PAR_OP, prime_op("C3", cycle_graph(3))))
        report = validate_weakly_rigid_signature(sig)
        assert not report.accepted
        (violation,) = report.violations
        assert violation.op_name == "C3"
        assert violation.witness_orbit == frozenset({1, 2, 3})


class TestDistinguished:
    def test_seq_origin(self):
        assert select_distinguished(SEQ_OP).vertices == frozenset({1})

    def test_w5_orbit_of_one(self):
        assert select_distinguished(w5_op()).vertices == frozenset({1, 5})

    def test_cycle_raises(self):
        with pytest.raises(NotWeaklyRigid):
            select_distinguished(prime_op("C4", cycle_graph(4)))

    def test_invariant_under_automorphisms(self):
        dist = select_distinguished(w5_op()).vertices
        for sigma in cp_equations(w5_op()):
            assert frozenset(sigma(i) for i in dist) == dist


class TestCpEquations:
    def test_w5(self):
        assert [str(p) for p in cp_equations(w5_op())] == ["(1 5)(2 4)"]

    def test_seq_trivial(self):
        assert cp_equations(SEQ_OP) == []

    def test_c3_rotations(self):
        perms = cp_equations(prime_op("C3", cycle_graph(3)))
        assert {str(p) for p in perms} == {"(1 2 3)", "(1 3 2)"}


class TestSignatureInvariants:
    def test_isomorphic_primes_rejected(self):
        mirror = prime_op("W5m", LabeledGraph.on_range(
            5, [(5, 2), (3, 2), (3, 4), (1, 4)]))
        with pytest.raises(ValueError):
            Signature(Alphabet(("a",)), (w5_op(), mirror))

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            Signature(Alphabet(("a",)), (SEQ_OP, SEQ_OP))

    def test_prime_ops_need_three_vertices(self):
        with pytest.raises(ValueError):
            prime_op("tiny", LabeledGraph.on_range(2, [(1, 2)]))

    def test_non_prime_payload_rejected(self):
        with pytest.raises(ValueError):
            prime_op("D3", D3)

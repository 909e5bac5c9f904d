import itertools
import random

import pytest

from modgraph.errors import NotInSignature, UnvalidatedAlgebra
from modgraph.generators import random_f_graph
from modgraph.mdec import decompose, shuffle_admissible
from modgraph.recognizer import (FiniteAlgebra, binary_table, evaluate,
                                 evaluate_tree, member, nary_table,
                                 validate_algebra)
from modgraph.samples import (even_vertices_algebra, parity_algebra,
                              seq_signature, spw5_signature, word_graph)
from modgraph.signature import Term, eval_term


def make_w5_algebra(w5_fn):
    """Parity-style algebra over seq+par+W5 with a custom W5 table."""
    sig = spw5_signature()
    carrier = ("q0", "q1")
    add = binary_table(carrier, lambda a, b: "q0" if a == b else "q1")
    tables = {"seq": add, "par": dict(add), "W5": nary_table(carrier, 5, w5_fn)}
    return FiniteAlgebra(sig, carrier, {"a": "q1", "b": "q0"}, tables,
                         frozenset(["q0"]))


class TestValidation:
    def test_parity_valid(self):
        report = validate_algebra(parity_algebra(validate=False))
        assert report.ok

    def test_commutativity_violation_located(self):
        sig = seq_signature()
        table = binary_table(("q0", "q1"), lambda a, b: a)
        from modgraph.graphs import Alphabet
        from modgraph.signature import PAR_OP, SEQ_OP, Signature
        sig2 = Signature(Alphabet(("a", "b")), (SEQ_OP, PAR_OP))
        alg = FiniteAlgebra(sig2, ("q0", "q1"), {"a": "q0", "b": "q1"},
                            {"seq": table, "par": dict(table)},
                            frozenset(["q0"]))
        report = validate_algebra(alg)
        assert not report.ok
        assert any(v.law == "commutativity" and v.op_name == "par"
                   for v in report.violations)

    def test_cp_violation_reports_tuple(self):
        # projection on the first argument breaks the mirror symmetry
        alg = make_w5_algebra(lambda *qs: qs[0])
        report = validate_algebra(alg)
        assert not report.ok
        bad = [v for v in report.violations if v.op_name == "W5"]
        assert bad and all(v.law == "argument-permutation" for v in bad)
        assert any(v.instance == ("q0", "q0", "q0", "q0", "q1") for v in bad)

    def test_symmetric_w5_table_valid(self):
        alg = make_w5_algebra(
            lambda *qs: "q1" if sum(q == "q1" for q in qs) % 2 else "q0")
        assert validate_algebra(alg).ok

    def test_associativity_violation(self):
        sig = seq_signature()
        rigged = binary_table(("q0", "q1"),
                              lambda a, b: "q1" if (a, b) == ("q0", "q0") else "q0")
        alg = FiniteAlgebra(sig, ("q0", "q1"), {"a": "q0", "b": "q1"},
                            {"seq": rigged}, frozenset())
        report = validate_algebra(alg)
        assert any(v.law == "associativity" for v in report.violations)

    def test_partial_table_rejected_at_construction(self):
        sig = seq_signature()
        with pytest.raises(ValueError):
            FiniteAlgebra(sig, ("q0", "q1"), {"a": "q0", "b": "q1"},
                          {"seq": {("q0", "q0"): "q0"}}, frozenset())


class TestEvaluate:
    def test_single_letter(self):
        alg = parity_algebra()
        assert evaluate(word_graph("a"), alg) == "q1"
        assert evaluate(word_graph("b"), alg) == "q0"

    def test_word_parity(self):
        alg = parity_algebra()
        assert evaluate(word_graph("abab"), alg) == "q0"
        assert evaluate(word_graph("ab"), alg) == "q1"

    def test_refuses_unvalidated(self):
        alg = parity_algebra(validate=False)
        with pytest.raises(UnvalidatedAlgebra):
            evaluate(word_graph("ab"), alg)
        assert evaluate(word_graph("ab"), alg, allow_unvalidated=True) == "q1"

    def test_refuses_invalid(self):
        alg = make_w5_algebra(lambda *qs: qs[0])
        validate_algebra(alg)
        with pytest.raises(UnvalidatedAlgebra):
            evaluate(word_graph("ab"), alg)

    def test_graph_outside_signature(self):
        alg = parity_algebra()  # seq only
        g = eval_term(spw5_signature(), Term.node("par", [Term.leaf("a"),
                                                          Term.leaf("b")]))
        with pytest.raises(NotInSignature):
            evaluate(g, alg)

    def test_reorder_invariance(self):
        sig = spw5_signature()
        alg = even_vertices_algebra(sig)
        rng = random.Random(11)
        for _ in range(30):
            g = random_f_graph(rng, sig, max_depth=4, max_leaves=10)
            t = decompose(g, sig)
            ref = evaluate_tree(t, alg)
            for _ in range(5):
                assert evaluate_tree(shuffle_admissible(t, rng), alg) == ref


class TestMember:
    def test_even_letter_membership(self):
        alg = parity_algebra()
        assert member(word_graph("abab"), alg)
        assert member(word_graph("aab"), alg)
        assert not member(word_graph("ab"), alg)

    def test_empty_accepting_rejects_all(self):
        alg = parity_algebra()
        alg.accepting = frozenset()
        for w in ("a", "b", "ab", "aa"):
            assert not member(word_graph(w), alg)

    def test_agrees_with_letter_count_all_short_words(self):
        alg = parity_algebra()
        for n in range(1, 7):
            for word in itertools.product("ab", repeat=n):
                w = "".join(word)
                assert member(word_graph(w), alg) == (w.count("a") % 2 == 0)

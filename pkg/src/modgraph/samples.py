"""Ready-made graphs, signatures and algebras used by tests and scripts."""

from __future__ import annotations

from .graphs import Alphabet, LabeledGraph
from .recognizer import FiniteAlgebra, binary_table, nary_table, validate_algebra
from .signature import (CLIQUE_OP, PAR_OP, SEQ_OP, Signature, SignatureOp, Term,
                        prime_op)

# W-shaped five-vertex prime dag: sources 1,3,5 point down at sinks 2,4.
# Its only non-trivial automorphism is the mirror (1 5)(2 4).
W5_GRAPH = LabeledGraph.on_range(5, [(1, 2), (3, 2), (3, 4), (5, 4)])
W5_MIRROR_GRAPH = LabeledGraph.on_range(5, [(5, 2), (3, 2), (3, 4), (1, 4)])

# three-vertex directed path, the smallest prime graph beyond the products
P3_GRAPH = LabeledGraph.on_range(3, [(1, 2), (2, 3)])


def cycle_graph(n: int) -> LabeledGraph:
    """Directed cycle on n vertices (vertex-transitive, hence not weakly rigid)."""
    return LabeledGraph.on_range(n, [(i, i % n + 1) for i in range(1, n + 1)])


def w5_op() -> SignatureOp:
    return prime_op("W5", W5_GRAPH)


def p3_op() -> SignatureOp:
    return prime_op("P3", P3_GRAPH)


def sp_signature(symbols=("a", "b")) -> Signature:
    """Sequential + parallel products: the series-parallel poset signature."""
    return Signature(Alphabet(tuple(symbols)), (SEQ_OP, PAR_OP))


def seq_signature(symbols=("a", "b")) -> Signature:
    """Sequential product only: graphs are exactly the finite words."""
    return Signature(Alphabet(tuple(symbols)), (SEQ_OP,))


def spw5_signature(symbols=("a", "b")) -> Signature:
    return Signature(Alphabet(tuple(symbols)), (SEQ_OP, PAR_OP, w5_op()))


def scw5_signature(symbols=("a", "b")) -> Signature:
    """Dual variant: clique product instead of the parallel one."""
    return Signature(Alphabet(tuple(symbols)), (SEQ_OP, CLIQUE_OP, w5_op()))


def spp3_signature(symbols=("a", "b")) -> Signature:
    return Signature(Alphabet(tuple(symbols)), (SEQ_OP, PAR_OP, p3_op()))


def word_graph(word: str) -> LabeledGraph:
    """The labeled chain (transitive linear order) spelling the word."""
    if not word:
        raise ValueError("words are non-empty")
    n = len(word)
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return LabeledGraph.build(range(1, n + 1), edges,
                              {i + 1: word[i] for i in range(n)})


def word_term(word: str) -> Term:
    if len(word) == 1:
        return Term.leaf(word)
    return Term.node("seq", [Term.leaf(c) for c in word])


def parity_algebra(validate: bool = True) -> FiniteAlgebra:
    """Over {seq}: counts occurrences of the letter a modulo 2, accepts 0."""
    sig = seq_signature(("a", "b"))
    carrier = ("q0", "q1")
    add = binary_table(carrier, lambda x, y: "q0" if x == y else "q1")
    alg = FiniteAlgebra(sig, carrier, {"a": "q1", "b": "q0"},
                        {"seq": add}, frozenset(["q0"]), name="parity-a")
    if validate:
        validate_algebra(alg)
    return alg


def even_vertices_algebra(sig: Signature, validate: bool = True) -> FiniteAlgebra:
    """Counts vertices modulo 2 (every letter worth 1), accepts 0.

    Works over any of the sample signatures: all tables are sums mod 2,
    which satisfies every law including the prime argument permutations.
    """
    carrier = ("q0", "q1")

    def add(*args):
        return "q1" if sum(a == "q1" for a in args) % 2 else "q0"

    tables = {}
    for op in sig.ops:
        if op.arity is None:
            tables[op.name] = binary_table(carrier, add)
        else:
            tables[op.name] = nary_table(carrier, op.arity, add)
    alg = FiniteAlgebra(sig, carrier, {sym: "q1" for sym in sig.alphabet},
                        tables, frozenset(["q0"]), name="even-vertices")
    if validate:
        validate_algebra(alg)
    return alg

"""Seeded random instances: terms, graphs and structures for the test harness.

Random graphs come in two flavors: terms over a signature (guaranteeing
generated graphs) and raw digraphs for oracle-only properties.
"""

from __future__ import annotations

from random import Random
from typing import Sequence

from .graphs import LabeledGraph
from .signature import Signature, Term, eval_term


def random_term(rng: Random, sig: Signature, max_depth: int = 5,
                max_leaves: int = 12) -> Term:
    """Random well-formed term; leaf budget caps the evaluated graph size."""
    symbols = sig.alphabet.symbols

    def gen(depth: int, budget: int) -> tuple[Term, int]:
        ops = [op for op in sig.ops
               if (op.arity or 2) <= budget]
        if depth == 0 or budget < 2 or not ops or rng.random() < 0.25:
            return Term.leaf(rng.choice(symbols)), 1
        op = rng.choice(ops)
        k = op.arity if op.arity is not None else rng.randint(2, 3)
        kids = []
        used = 0
        for i in range(k):
            child, spent = gen(depth - 1, max(1, (budget - used) // (k - i)))
            kids.append(child)
            used += spent
        return Term.node(op.name, kids), used

    term, _ = gen(max_depth, max_leaves)
    return term


def random_f_graph(rng: Random, sig: Signature, max_depth: int = 5,
                   max_leaves: int = 12) -> LabeledGraph:
    return eval_term(sig, random_term(rng, sig, max_depth, max_leaves))


def random_digraph(rng: Random, n: int, p: float = 0.3,
                   symbols: Sequence[str] = ("a", "b")) -> LabeledGraph:
    """Raw random digraph, not necessarily generated by any signature."""
    edges = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1)
             if u != v and rng.random() < p]
    labels = {v: rng.choice(list(symbols)) for v in range(1, n + 1)}
    return LabeledGraph.build(range(1, n + 1), edges, labels)


def random_subset(rng: Random, pool: Sequence[int],
                  allow_empty: bool = True) -> frozenset[int]:
    out = frozenset(v for v in pool if rng.random() < 0.5)
    if not out and not allow_empty and pool:
        out = frozenset([rng.choice(list(pool))])
    return out


def random_word(rng: Random, symbols: Sequence[str], max_len: int = 6) -> str:
    return "".join(rng.choice(list(symbols))
                   for _ in range(rng.randint(1, max_len)))

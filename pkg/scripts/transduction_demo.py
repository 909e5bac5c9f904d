#!/usr/bin/env python3
"""Walk one graph through the whole pipeline and print every artifact.

The demo graph composes the W-shaped prime operation over mixed operands,
so the tree exercises all four node classes.
"""

import argparse

from modgraph.cms import to_text
from modgraph.formats import graph_to_text
from modgraph.mdec import format_tree
from modgraph.samples import spw5_signature
from modgraph.signature import Term, eval_term
from modgraph.transduction import (build_repr, check_kappa_lemma, encode_graph,
                                   transduction_schema, verify_isomorphism)


def leaf(s):
    return Term.leaf(s)


def node(op, *kids):
    return Term.node(op, list(kids))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--term", default=None,
                        help="term over seq/par/W5, e.g. '(seq a (par b b))'")
    args = parser.parse_args()

    sig = spw5_signature()
    if args.term:
        from modgraph.formats import parse_term
        term = parse_term(args.term, sig)
    else:
        term = node("seq", leaf("a"),
                    node("par", leaf("b"), node("seq", leaf("a"), leaf("b"))),
                    node("W5", leaf("a"), leaf("b"), leaf("a"), leaf("b"),
                         leaf("a")))
    print(f"term: {term}\n")
    g = eval_term(sig, term)
    print(graph_to_text(g, name="demo"))

    t, cls, enc = encode_graph(g, sig)
    print("binarized decomposition tree:")
    print(format_tree(t))
    print()
    for i in range(4):
        mods = ["{" + ",".join(map(str, sorted(n.module))) + "}"
                for n in cls.nodes_in(i)]
        print(f"N_{i}: {' '.join(mods) if mods else '(none)'}")
    print()
    print(enc.format_tables())
    print()

    rep = build_repr(t, enc, sig=sig)
    for i, xs in enumerate(rep.reps):
        print(f"X_{i} = {{{','.join(map(str, sorted(xs)))}}}")
    print()
    print(check_kappa_lemma(t, enc, sig))
    verdict = verify_isomorphism(rep, t, sig=sig)
    print("leaf representation isomorphic to the tree:", verdict)

    sch = transduction_schema(sig)
    print("\nformula for kappa_1 (first 400 chars):")
    print(to_text(sch.kappa_formula(1))[:400], "...")
    return 0 if verdict else 1


if __name__ == "__main__":
    raise SystemExit(main())

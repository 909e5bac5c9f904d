#!/usr/bin/env python3
"""Count small prime digraphs and measure how many are weakly rigid.

Enumerates digraphs on n vertices up to isomorphism, keeps the prime ones,
and reports the fraction whose automorphism group fixes some vertex class.
Prime graphs dominate quickly, and transitive ones stay rare.
"""

import argparse
import itertools

from modgraph.graphs import LabeledGraph, automorphism_group
from modgraph.signature import is_prime


def nonisomorphic_digraphs(n):
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    perms = list(itertools.permutations(range(1, n + 1)))
    seen = set()
    for bits in range(1 << len(pairs)):
        edges = frozenset(pairs[k] for k in range(len(pairs)) if bits >> k & 1)
        key = min(tuple(sorted((p[u - 1], p[v - 1]) for (u, v) in edges))
                  for p in perms)
        if key in seen:
            continue
        seen.add(key)
        yield LabeledGraph.on_range(n, edges)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=4)
    args = parser.parse_args()

    print(f"{'n':>2} {'digraphs':>9} {'prime':>7} {'weakly rigid':>13} {'rigid %':>8}")
    for n in range(2, args.max_n + 1):
        total = prime = rigid = 0
        for g in nonisomorphic_digraphs(n):
            total += 1
            if not is_prime(g):
                continue
            prime += 1
            if len(automorphism_group(g).orbits) > 1:
                rigid += 1
        pct = 100.0 * rigid / prime if prime else 0.0
        print(f"{n:>2} {total:>9} {prime:>7} {rigid:>13} {pct:>7.1f}%")


if __name__ == "__main__":
    main()

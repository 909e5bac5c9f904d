"""Graph composition operations, term evaluation and weak rigidity.

An n-vertex concrete graph H on 1..n acts as an n-ary operation: compose
takes the disjoint union of the operands and adds, for every edge (i,j)
of H, all edges from operand i to operand j.  The three 2-vertex graphs
give the parallel (par), sequential (seq) and clique products; prime
graphs with >= 3 vertices give everything else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .errors import (ArityMismatch, NotWeaklyRigid, OverlappingOperands,
                     SizeLimitExceeded, TooSmall, UnknownOp, UnknownSymbol)
from .graphs import (DEFAULT_SEARCH_BOUND, Alphabet, LabeledGraph,
                     Permutation, automorphism_group, find_isomorphism,
                     is_module, is_vertex_transitive)


class OpKind(Enum):
    PARALLEL = "par"
    SEQUENTIAL = "seq"
    CLIQUE = "clique"
    PRIME = "prime"


BUILTIN_NAMES = ("par", "seq", "clique")

# the 2-vertex graphs behind the three built-in products
H_PAR = LabeledGraph.on_range(2, [])
H_SEQ = LabeledGraph.on_range(2, [(1, 2)])
H_CLIQUE = LabeledGraph.on_range(2, [(1, 2), (2, 1)])


def is_prime(h: LabeledGraph, max_vertices: int = 12) -> bool:
    """True iff every module of h is a singleton or the full vertex set."""
    if h.n < 2:
        raise TooSmall("primality needs at least 2 vertices")
    if h.n > max_vertices:
        raise SizeLimitExceeded(f"primality check limited to {max_vertices} vertices")
    verts = h.sorted_vertices()
    for size in range(2, h.n):
        for x in itertools.combinations(verts, size):
            if is_module(h, x):
                return False
    return True


@dataclass(frozen=True)
class SignatureOp:
    """One operation: a built-in product or a concrete prime graph on 1..n."""

    name: str
    kind: OpKind
    graph: Optional[LabeledGraph] = None

    def __post_init__(self):
        if self.kind is OpKind.PRIME:
            if self.graph is None:
                raise ValueError("prime operation needs its defining graph")
            g = self.graph
            if g.vertices != frozenset(range(1, g.n + 1)):
                raise ValueError("prime operation graph must live on 1..n")
            if g.labels is not None:
                raise ValueError("prime operation graphs are unlabeled syntax")
            if g.n < 3:
                raise ValueError("prime operations need at least 3 vertices")
        else:
            if self.graph is not None:
                raise ValueError("built-in operations carry no graph payload")
            if self.name not in BUILTIN_NAMES or self.name != self.kind.value:
                raise ValueError(f"built-in operation must be named {self.kind.value!r}")

    @property
    def arity(self) -> Optional[int]:
        """Exact arity for prime operations; None for the variadic built-ins."""
        return self.graph.n if self.kind is OpKind.PRIME else None

    def op_graph(self) -> LabeledGraph:
        """The concrete graph defining this operation (2-vertex for built-ins)."""
        if self.kind is OpKind.PARALLEL:
            return H_PAR
        if self.kind is OpKind.SEQUENTIAL:
            return H_SEQ
        if self.kind is OpKind.CLIQUE:
            return H_CLIQUE
        return self.graph

    def __str__(self):
        return self.name


PAR_OP = SignatureOp("par", OpKind.PARALLEL)
SEQ_OP = SignatureOp("seq", OpKind.SEQUENTIAL)
CLIQUE_OP = SignatureOp("clique", OpKind.CLIQUE)


def prime_op(name: str, graph: LabeledGraph, check_prime: bool = True) -> SignatureOp:
    if check_prime and not is_prime(graph, max_vertices=max(12, graph.n)):
        raise ValueError(f"graph of operation {name!r} is not prime")
    return SignatureOp(name, OpKind.PRIME, graph)


@dataclass(frozen=True)
class Signature:
    """Finite list of operations over a fixed alphabet.

    Holds at most one concrete representative per isomorphism class of
    prime graphs; enforced pairwise at construction.
    """

    alphabet: Alphabet
    ops: tuple[SignatureOp, ...]

    def __post_init__(self):
        names = [op.name for op in self.ops]
        if len(set(names)) != len(names):
            raise ValueError("operation names must be distinct")
        primes = [op for op in self.ops if op.kind is OpKind.PRIME]
        for a, b in itertools.combinations(primes, 2):
            if a.graph.n == b.graph.n and find_isomorphism(
                    a.graph, b.graph, respect_labels=False,
                    max_vertices=max(DEFAULT_SEARCH_BOUND, a.graph.n)) is not None:
                raise ValueError(
                    f"prime operations {a.name!r} and {b.name!r} are isomorphic; "
                    "keep one representative per isomorphism class")

    def op(self, name: str) -> SignatureOp:
        for op in self.ops:
            if op.name == name:
                return op
        raise UnknownOp(f"operation {name!r} not in signature")

    def has_op(self, name: str) -> bool:
        return any(op.name == name for op in self.ops)

    @property
    def prime_ops(self) -> tuple[SignatureOp, ...]:
        return tuple(op for op in self.ops if op.kind is OpKind.PRIME)

    def builtin(self, kind: OpKind) -> Optional[SignatureOp]:
        for op in self.ops:
            if op.kind is kind:
                return op
        return None

    def match_prime(self, quotient: LabeledGraph) -> Optional[tuple[SignatureOp, Permutation]]:
        """Signature op isomorphic to the quotient, with the witnessing map.

        The permutation maps vertices of the op graph onto vertices of the
        quotient (edge pattern carried exactly).
        """
        for op in self.prime_ops:
            if op.graph.n != quotient.n:
                continue
            sigma = find_isomorphism(op.graph, quotient, respect_labels=False,
                                     max_vertices=max(DEFAULT_SEARCH_BOUND, quotient.n))
            if sigma is not None:
                return op, sigma
        return None


@dataclass(frozen=True)
class Term:
    """Term over a signature: leaf(symbol) or node(op name, children).

    The variadic built-ins are kept flattened: a seq node never has a seq
    child, and likewise for par and clique.
    """

    op: Optional[str]
    symbol: Optional[str]
    children: tuple["Term", ...]

    @staticmethod
    def leaf(symbol: str) -> "Term":
        return Term(None, symbol, ())

    @staticmethod
    def node(op: str, children: Sequence["Term"]) -> "Term":
        kids: list[Term] = []
        for c in children:
            if op in BUILTIN_NAMES and c.op == op:
                kids.extend(c.children)
            else:
                kids.append(c)
        return Term(op, None, tuple(kids))

    @property
    def is_leaf(self) -> bool:
        return self.op is None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.symbol]
        return [s for c in self.children for s in c.leaves()]

    def __str__(self):
        if self.is_leaf:
            return self.symbol
        head = self.op if self.op in BUILTIN_NAMES else f"prime {self.op}"
        return "(" + head + " " + " ".join(str(c) for c in self.children) + ")"


def compose_graph(h: LabeledGraph, operands: Sequence[LabeledGraph],
                  relabel: bool = True) -> LabeledGraph:
    """Composition by an arbitrary concrete graph h on 1..n.

    With relabel=True the operands are renumbered onto consecutive ids
    (operand i offset by the running vertex count), making evaluation
    reproducible; with relabel=False the operand vertex sets must already
    be pairwise disjoint and are kept as-is.
    """
    n = h.n
    if len(operands) != n:
        raise ArityMismatch(f"operation expects {n} operands, got {len(operands)}")
    if h.vertices != frozenset(range(1, n + 1)):
        raise ValueError("operation graph must live on 1..n")

    if relabel:
        parts = []
        offset = 0
        for g in operands:
            ren = {v: offset + k for k, v in enumerate(g.sorted_vertices(), start=1)}
            parts.append((frozenset(ren.values()),
                          {(ren[u], ren[v]) for (u, v) in g.edges},
                          {ren[v]: g.labels[v] for v in g.vertices}
                          if g.labels is not None else None))
            offset += g.n
    else:
        seen: set[int] = set()
        parts = []
        for g in operands:
            if g.vertices & seen:
                raise OverlappingOperands(
                    f"operands share vertex ids {sorted(g.vertices & seen)}")
            seen |= g.vertices
            parts.append((g.vertices, set(g.edges), dict(g.labels) if g.labels else None))

    vertices: set[int] = set()
    edges: set[tuple[int, int]] = set()
    labels: Optional[dict[int, str]] = {} if all(p[2] is not None for p in parts) else None
    for verts, es, labs in parts:
        vertices |= verts
        edges |= es
        if labels is not None:
            labels.update(labs)
    for (i, j) in h.edges:
        edges |= set(itertools.product(parts[i - 1][0], parts[j - 1][0]))
    return LabeledGraph(frozenset(vertices), frozenset(edges), labels)


def compose(op: SignatureOp, operands: Sequence[LabeledGraph],
            relabel: bool = True) -> LabeledGraph:
    """Apply a signature operation; the built-ins accept >= 2 operands."""
    if op.kind is OpKind.PRIME:
        return compose_graph(op.graph, operands, relabel=relabel)
    if len(operands) < 2:
        raise ArityMismatch(f"{op.name} expects at least 2 operands")
    if len(operands) == 2:
        return compose_graph(op.op_graph(), operands, relabel=relabel)
    # variadic built-ins: the chain / discrete / clique pattern on all pairs
    n = len(operands)
    if op.kind is OpKind.PARALLEL:
        pattern: list[tuple[int, int]] = []
    elif op.kind is OpKind.SEQUENTIAL:
        pattern = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    else:
        pattern = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    return compose_graph(LabeledGraph.on_range(n, pattern), operands, relabel=relabel)


def eval_term(sig: Signature, t: Term) -> LabeledGraph:
    """Bottom-up evaluation of a term into a concrete labeled graph."""
    if t.is_leaf:
        if t.symbol not in sig.alphabet:
            raise UnknownSymbol(f"symbol {t.symbol!r} not in alphabet")
        return LabeledGraph.single_vertex(t.symbol)
    op = sig.op(t.op)
    return compose(op, [eval_term(sig, c) for c in t.children], relabel=True)


def is_weakly_rigid_op(op: SignatureOp,
                       max_vertices: int = DEFAULT_SEARCH_BOUND) -> bool:
    """seq is weakly rigid; a prime op is iff its automorphisms are not transitive."""
    if op.kind is OpKind.SEQUENTIAL:
        return True
    if op.kind is not OpKind.PRIME:
        raise ValueError("weak rigidity applies to seq and prime operations; "
                         "par and clique are handled at signature level")
    return not is_vertex_transitive(op.graph,
                                    max_vertices=max(max_vertices, op.graph.n))


@dataclass(frozen=True)
class RigidityViolation:
    op_name: str
    reason: str
    witness_orbit: Optional[frozenset[int]] = None

    def __str__(self):
        extra = ""
        if self.witness_orbit is not None:
            extra = " (orbit {" + ", ".join(map(str, sorted(self.witness_orbit))) + "})"
        return f"{self.op_name}: {self.reason}{extra}"


@dataclass(frozen=True)
class WeakRigidityReport:
    signature: Signature
    violations: tuple[RigidityViolation, ...]

    @property
    def accepted(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.accepted:
            return "ACCEPT: signature is weakly rigid"
        lines = ["REJECT: signature is not weakly rigid"]
        lines += [f"  - {v}" for v in self.violations]
        return "\n".join(lines)


def validate_weakly_rigid_signature(sig: Signature) -> WeakRigidityReport:
    """Check finiteness (built in), at most one of par/clique, and per-op rigidity."""
    violations: list[RigidityViolation] = []
    if sig.builtin(OpKind.PARALLEL) is not None and sig.builtin(OpKind.CLIQUE) is not None:
        violations.append(RigidityViolation(
            "par,clique", "signature contains both commutative products"))
    for op in sig.prime_ops:
        aut = automorphism_group(op.graph,
                                 max_vertices=max(DEFAULT_SEARCH_BOUND, op.graph.n))
        if len(aut.orbits) == 1:
            violations.append(RigidityViolation(
                op.name, "automorphisms act transitively on the vertices",
                aut.orbits[0]))
    return WeakRigidityReport(sig, tuple(violations))


@dataclass(frozen=True)
class DistinguishedSet:
    """Proper, non-empty, automorphism-invariant vertex set of an operation."""

    op: SignatureOp
    vertices: frozenset[int]


def select_distinguished(op: SignatureOp,
                         max_vertices: int = DEFAULT_SEARCH_BOUND) -> DistinguishedSet:
    """Deterministic choice: {1} for seq, else the orbit of the smallest vertex.

    Any automorphism-invariant proper non-empty subset would do; a single
    rule keeps recognizers and transductions reproducible.
    """
    if op.kind is OpKind.SEQUENTIAL:
        return DistinguishedSet(op, frozenset([1]))
    if op.kind is not OpKind.PRIME:
        raise NotWeaklyRigid(f"{op.name} has no distinguished vertices")
    aut = automorphism_group(op.graph, max_vertices=max(max_vertices, op.graph.n))
    if len(aut.orbits) == 1:
        raise NotWeaklyRigid(f"operation {op.name} is not weakly rigid")
    return DistinguishedSet(op, aut.orbit_of(min(op.graph.vertices)))


def cp_equations(op: SignatureOp,
                 max_vertices: int = DEFAULT_SEARCH_BOUND) -> list[Permutation]:
    """Argument permutations under which composition by op is invariant.

    One permutation per non-identity automorphism of the operation graph:
    composing op with operands G_1..G_n equals composing it with
    G_{sigma(1)}..G_{sigma(n)}.
    """
    g = op.op_graph()
    aut = automorphism_group(g, max_vertices=max(max_vertices, g.n))
    return sorted((p for p in aut.elements if not p.is_identity()),
                  key=lambda p: p.image)

"""Executable leaf-encoding of decomposition trees inside their graphs.

Every inner tree node gets represented by one of its leaves through four
partial maps kappa_0..kappa_3 from leaves to nodes; restricting the lifted
structure to one representative leaf per node rebuilds the tree.  The
module also carries the second-order predicate library that expresses the
whole construction in the logic of the underlying graph, together with a
matching algorithmic implementation of every predicate, so each side can
be checked against the other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .cms import (And, CmsFormula, Eq, Exists, ExistsSet, Forall, ForallSet,
                  Implies, In, Not, Or, Pred, RelationalSignature, Structure,
                  conj, disj, graph_signature, label_pred, tree_relations)
from .errors import (NotWeaklyRigid, NotWeaklyRigidSignature, UnknownOp,
                     UnknownPredicate)
from .graphs import (LabeledGraph, find_isomorphism, is_clique_set, is_discrete,
                     is_internally_co_disconnected, is_internally_disconnected,
                     is_module)
from .mdec import (MDecNode, MDecPrimeTree, NodeKind, binarize,
                   brute_force_modules, brute_force_prime_modules,
                   chain_prefixes, decompose, reconstruct)
from .signature import (OpKind, Signature, SignatureOp, cp_equations,
                        select_distinguished, validate_weakly_rigid_signature)

PAIR = tuple[int, int]


def _commutative_mode(sig: Signature) -> NodeKind:
    """Which commutative product plays the disconnected role for this run."""
    if sig.builtin(OpKind.CLIQUE) is not None:
        return NodeKind.CLIQUE
    return NodeKind.PAR


@dataclass
class NodeClassification:
    """Partition of tree nodes into the four encoding classes.

    Class 0 holds the leaves; 1 the commutative nodes with all-leaf
    children; 2 the remaining commutative nodes; 3 the sequential and
    prime nodes (the ones with distinguished children).
    """

    tree: MDecPrimeTree
    mode: NodeKind
    classes: dict[MDecNode, int]

    def nodes_in(self, i: int) -> list[MDecNode]:
        return [n for n in self.tree.nodes() if self.classes[n] == i]


def classify_nodes(t: MDecPrimeTree, sig: Signature) -> NodeClassification:
    report = validate_weakly_rigid_signature(sig)
    if not report.accepted:
        raise NotWeaklyRigidSignature(str(report))
    mode = _commutative_mode(sig)
    forbidden = NodeKind.CLIQUE if mode is NodeKind.PAR else NodeKind.PAR
    classes: dict[MDecNode, int] = {}
    for node in t.nodes():
        if node.kind is forbidden:
            raise NotWeaklyRigid(
                f"tree contains a {forbidden.value} node, so the graph is not "
                "generated by this signature")
        if node.kind is NodeKind.PRIME and not sig.has_op(node.op.name):
            raise UnknownOp(f"operation {node.op.name!r} not in signature")
        if node.is_leaf:
            classes[node] = 0
        elif node.kind is mode:
            classes[node] = 1 if all(c.is_leaf for c in node.children) else 2
        else:
            classes[node] = 3
    return NodeClassification(t, mode, classes)


def _distinguished_children(node: MDecNode) -> frozenset[MDecNode]:
    if node.kind is NodeKind.SEQ:
        return frozenset([node.children[0]])
    dist = select_distinguished(node.op).vertices
    return frozenset(node.children[i - 1] for i in dist)


@dataclass
class EncodingTables:
    """The leaf sets nu/mu and the leaf-to-node maps kappa, plus root paths.

    kappa[i] inverts mu[i] fiberwise: kappa[i][v] == y iff v in mu[i][y].
    rho[v] is the node path from the leaf of v up to the root.
    """

    classification: NodeClassification
    nu: dict[MDecNode, frozenset[int]]
    mu: tuple[dict[MDecNode, frozenset[int]], ...]
    kappa: tuple[dict[int, MDecNode], ...]
    rho: dict[int, tuple[MDecNode, ...]]

    @property
    def tree(self) -> MDecPrimeTree:
        return self.classification.tree

    def domain_pairs(self) -> list[PAIR]:
        return [(v, i) for i in range(4) for v in sorted(self.kappa[i])]

    def format_tables(self) -> str:
        lines = []
        for i in range(4):
            entries = ", ".join(
                f"{v}->{{{','.join(map(str, sorted(self.kappa[i][v].module)))}}}"
                for v in sorted(self.kappa[i]))
            lines.append(f"kappa_{i}: {entries if entries else '(empty)'}")
        return "\n".join(lines)


def compute_encoding(t: MDecPrimeTree, cls: NodeClassification) -> EncodingTables:
    """Fill nu/mu by their defining clauses and kappa by walking root paths.

    The fiber condition linking the two is checked before returning; a
    failure would mean the construction itself is broken.
    """
    nu: dict[MDecNode, frozenset[int]] = {}
    mu: tuple[dict[MDecNode, frozenset[int]], ...] = ({}, {}, {}, {})
    dist: dict[MDecNode, frozenset[MDecNode]] = {}

    def fill(node: MDecNode):
        for c in node.children:
            fill(c)
        i = cls.classes[node]
        if i == 0:
            (v,) = node.module
            nu[node] = mu[0][node] = frozenset([v])
        elif i == 1:
            kids = frozenset(v for c in node.children for v in c.module)
            nu[node] = mu[1][node] = kids
        elif i == 2:
            nu[node] = frozenset().union(*(nu[c] for c in node.children))
            inner = [c for c in node.children if not c.is_leaf]
            mu[2][node] = frozenset().union(*(mu[3][c] for c in inner))
        else:
            dist[node] = _distinguished_children(node)
            non_dist = [c for c in node.children if c not in dist[node]]
            nu[node] = frozenset().union(*(nu[c] for c in non_dist))
            mu[3][node] = frozenset().union(*(nu[c] for c in dist[node]))

    fill(t.root)

    parents = t.parents()
    kappa: tuple[dict[int, MDecNode], ...] = ({}, {}, {}, {})
    rho: dict[int, tuple[MDecNode, ...]] = {}
    for v, leaf in t.leaf_of.items():
        path = [leaf]
        while path[-1] in parents:
            path.append(parents[path[-1]])
        rho[v] = tuple(path)
        kappa[0][v] = leaf
        if len(path) > 1:
            parent = path[1]
            if cls.classes[parent] == 1:
                kappa[1][v] = parent
        for child, node in zip(path, path[1:]):
            if cls.classes[node] == 3 and child in dist[node]:
                kappa[3][v] = node
                pos = path.index(node)
                if pos + 1 < len(path) and cls.classes[path[pos + 1]] == 2:
                    kappa[2][v] = path[pos + 1]
                break

    for i in range(4):
        fibers: dict[MDecNode, set[int]] = {}
        for v, node in kappa[i].items():
            fibers.setdefault(node, set()).add(v)
        expected = {node: set(vs) for node, vs in mu[i].items()}
        if fibers != expected:
            raise AssertionError(
                f"kappa_{i} fibers disagree with mu_{i}; encoding is broken")
    for node, s in nu.items():
        if not s:
            raise AssertionError("empty nu set")
    return EncodingTables(cls, nu, mu, kappa, rho)


def encode_graph(g: LabeledGraph, sig: Signature,
                 ) -> tuple[MDecPrimeTree, NodeClassification, EncodingTables]:
    """Decompose, binarize, classify and encode in one step."""
    t = binarize(decompose(g, sig))
    cls = classify_nodes(t, sig)
    return t, cls, compute_encoding(t, cls)


# ---------------------------------------------------- module-theoretic check

def _suffixes(g: LabeledGraph, w: frozenset[int]) -> list[frozenset[int]]:
    if len(w) < 2:
        return []
    sub = g.induced(w)
    return [w - p for p in chain_prefixes(sub, sub.out_adj())]


def is_sequential_set(g: LabeledGraph, x: frozenset[int]) -> bool:
    """True iff the induced subgraph splits as prefix + fully-linked suffix."""
    return bool(_suffixes(g, x))


def _initial_of(g: LabeledGraph, x: frozenset[int], y: frozenset[int]) -> bool:
    """y is the least prefix of x: the complement is a suffix, y not sequential."""
    if not y or not y < x:
        return False
    rest = x - y
    es = g.edges
    if not all((p, q) in es and (q, p) not in es
               for p in y for q in rest):
        return False
    return not is_sequential_set(g, y)


@dataclass(frozen=True)
class KappaMismatch:
    index: int
    vertex: int
    lemma_value: Optional[frozenset[int]]
    path_value: Optional[frozenset[int]]

    def __str__(self):
        def show(m):
            return "undefined" if m is None else "{" + ",".join(map(str, sorted(m))) + "}"
        return (f"kappa_{self.index}({self.vertex}): module characterization "
                f"gives {show(self.lemma_value)}, path walk gives "
                f"{show(self.path_value)}")


@dataclass(frozen=True)
class KappaLemmaReport:
    mismatches: tuple[KappaMismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __str__(self):
        if self.ok:
            return "kappa characterization: no mismatches"
        return "\n".join(["kappa characterization mismatches:"] +
                         [f"  - {m}" for m in self.mismatches])


def check_kappa_lemma(t: MDecPrimeTree, enc: EncodingTables,
                      sig: Optional[Signature] = None) -> KappaLemmaReport:
    """Cross-check the path-based kappa maps against their module-theoretic
    characterization, computed from the graph with the brute-force oracle."""
    g = reconstruct(t)
    mode = enc.classification.mode
    if mode is NodeKind.PAR:
        disc = lambda x: len(x) > 1 and is_internally_disconnected(g, x)
        degenerate = lambda x: is_discrete(g, x)
    else:
        disc = lambda x: len(x) > 1 and is_internally_co_disconnected(g, x)
        degenerate = lambda x: is_clique_set(g, x)

    # independent node family: strong modules plus sequential suffixes
    strongs = brute_force_prime_modules(g) | {g.vertices}
    node_family = set(strongs)
    for w in strongs:
        if is_sequential_set(g, w):
            for z in _suffixes(g, w):
                if is_sequential_set(g, z):
                    node_family.add(z)

    if sig is not None:
        prime_ops = list(sig.prime_ops)
    else:
        seen: dict[str, SignatureOp] = {}
        for n in t.nodes():
            if n.kind is NodeKind.PRIME:
                seen.setdefault(n.op.name, n.op)
        prime_ops = [seen[k] for k in sorted(seen)]

    from .mdec import quotient_graph  # local import to avoid cycles at top

    def children_of(p: frozenset[int]) -> list[frozenset[int]]:
        inside = [m for m in node_family if m < p]
        return sorted((m for m in inside
                       if not any(m < other < p for other in inside)), key=min)

    def dist_children(p: frozenset[int]) -> set[frozenset[int]]:
        kids = children_of(p)
        if is_sequential_set(g, p):
            return {y for y in kids if _initial_of(g, p, y)}
        quotient = quotient_graph(g.induced(p), kids)
        for op in prime_ops:
            if op.graph.n != quotient.n:
                continue
            sigma = find_isomorphism(op.graph, quotient, respect_labels=False,
                                     max_vertices=max(8, quotient.n))
            if sigma is not None:
                dist = select_distinguished(op).vertices
                return {kids[sigma(i) - 1] for i in dist}
        raise NotWeaklyRigid(
            f"connected node on {sorted(p)} matches no signature operation")

    dist_cache: dict[frozenset[int], set[frozenset[int]]] = {}

    def in_dist_child(p: frozenset[int], x: int) -> bool:
        if p not in dist_cache:
            dist_cache[p] = dist_children(p)
        return any(x in y for y in dist_cache[p])

    mismatches: list[KappaMismatch] = []
    for x in sorted(g.vertices):
        chain = sorted((m for m in node_family if x in m), key=len)
        # least disconnected strong module containing x, if degenerate
        lemma1 = None
        for p in chain:
            if p in strongs and disc(p):
                if degenerate(p):
                    lemma1 = p
                break
        # first non-trivial connected node reached from a distinguished child;
        # smaller connected nodes must all hold x in a non-distinguished child
        lemma3 = None
        for q in chain:
            if len(q) < 2 or disc(q):
                continue
            if in_dist_child(q, x):
                lemma3 = q
                break
        lemma2 = None
        if lemma3 is not None:
            above = [m for m in chain if lemma3 < m]
            if above and disc(above[0]):
                lemma2 = above[0]

        path = {1: enc.kappa[1].get(x), 2: enc.kappa[2].get(x),
                3: enc.kappa[3].get(x)}
        for i, lemma_val in ((1, lemma1), (2, lemma2), (3, lemma3)):
            got = path[i].module if path[i] is not None else None
            if lemma_val != got:
                mismatches.append(KappaMismatch(i, x, lemma_val, got))
    return KappaLemmaReport(tuple(mismatches))


# ----------------------------------------------------------- repr structures

@dataclass
class ReprStructure:
    """Leaf-pair structure over the tree signature.

    Domain elements are pairs (vertex, i) with kappa_i defined on the
    vertex; node_of maps each pair to the module of its kappa image.  For
    the restricted variant, reps holds the representative sets X_0..X_3.
    """

    signature: RelationalSignature
    domain: tuple[PAIR, ...]
    relations: dict[str, frozenset[tuple[PAIR, ...]]]
    node_of: dict[PAIR, frozenset[int]]
    reps: Optional[tuple[frozenset[int], ...]] = None

    def equivalent(self, a: PAIR, b: PAIR) -> bool:
        return a[1] == b[1] and self.node_of[a] == self.node_of[b]

    def to_structure(self) -> Structure:
        return Structure(self.signature, self.domain,
                         {k: frozenset(v) for k, v in self.relations.items()})


def _lift_relations(t: MDecPrimeTree, enc: EncodingTables,
                    fibers: dict[MDecNode, list[PAIR]],
                    sig: Optional[Signature]) -> tuple[RelationalSignature,
                                                       dict[str, frozenset]]:
    """Transport the tree relations through the kappa fibers."""
    rsig, rels, _ = tree_relations(t, sig)
    lifted: dict[str, frozenset] = {}
    for name, tuples in rels.items():
        out = set()
        for tup in tuples:
            for combo in itertools.product(*(fibers.get(n, ()) for n in tup)):
                out.add(combo)
        lifted[name] = frozenset(out)
    return rsig, lifted


def build_repr0(t: MDecPrimeTree, enc: EncodingTables,
                sig: Optional[Signature] = None) -> ReprStructure:
    """The unrestricted leaf-pair structure: usually many pairs per node."""
    fibers: dict[MDecNode, list[PAIR]] = {}
    node_of: dict[PAIR, frozenset[int]] = {}
    for i in range(4):
        for v, node in enc.kappa[i].items():
            fibers.setdefault(node, []).append((v, i))
            node_of[(v, i)] = node.module
    rsig, lifted = _lift_relations(t, enc, fibers, sig)
    domain = tuple(sorted(node_of))
    return ReprStructure(rsig, domain, lifted, node_of)


def min_vertex_rule(fiber: frozenset[int]) -> int:
    return min(fiber)


def build_repr(t: MDecPrimeTree, enc: EncodingTables,
               rule: Callable[[frozenset[int]], int] = min_vertex_rule,
               sig: Optional[Signature] = None) -> ReprStructure:
    """Restriction to one representative leaf per node, chosen by the rule."""
    reps: list[set[int]] = [set(), set(), set(), set()]
    fibers: dict[MDecNode, list[PAIR]] = {}
    node_of: dict[PAIR, frozenset[int]] = {}
    for i in range(4):
        inverse: dict[MDecNode, set[int]] = {}
        for v, node in enc.kappa[i].items():
            inverse.setdefault(node, set()).add(v)
        for node, fiber in inverse.items():
            v = rule(frozenset(fiber))
            if v not in fiber:
                raise ValueError("representative rule left the fiber")
            reps[i].add(v)
            fibers.setdefault(node, []).append((v, i))
            node_of[(v, i)] = node.module
    rsig, lifted = _lift_relations(t, enc, fibers, sig)
    domain = tuple(sorted(node_of))
    return ReprStructure(rsig, domain, lifted, node_of,
                         reps=tuple(frozenset(r) for r in reps))


def verify_isomorphism(r: ReprStructure, t: MDecPrimeTree,
                       sig: Optional[Signature] = None) -> bool:
    """Check that pair -> kappa image is a predicate-preserving bijection
    between the structure and the tree."""
    rsig, rels, nodes = tree_relations(t, sig)
    node_modules = {n.module for n in nodes}
    image = [r.node_of[p] for p in r.domain]
    if len(set(image)) != len(image) or set(image) != node_modules:
        return False
    if set(dict(rsig.predicates)) != set(dict(r.signature.predicates)):
        return False
    for name, tuples in rels.items():
        tree_side = {tuple(n.module for n in tup) for tup in tuples}
        repr_side = {tuple(r.node_of[p] for p in tup)
                     for tup in r.relations.get(name, frozenset())}
        if tree_side != repr_side:
            return False
    return True


# --------------------------------------------------------- formula library

class _Fresh:
    """Bound-variable name supply; global uniqueness makes capture impossible."""

    def __init__(self):
        self.k = 0

    def elem(self) -> str:
        self.k += 1
        return f"p{self.k}"

    def set(self) -> str:
        self.k += 1
        return f"P{self.k}"


def _edge(a: str, b: str) -> CmsFormula:
    return Pred("edge", (a, b))


class PredicateLibrary:
    """Second-order predicates of a graph mirroring its decomposition tree.

    Every predicate exists twice: as a formula over the graph's relational
    signature (edge + one label predicate per letter) and as a direct
    decision procedure; the two are cross-checked in the test suite.  The
    node/child predicates quantify over the operations present in the
    signature, so they only see tree nodes labeled by those operations.
    """

    def __init__(self, sig: Signature):
        report = validate_weakly_rigid_signature(sig)
        if not report.accepted:
            raise NotWeaklyRigid(str(report))
        self.sig = sig
        self.mode = _commutative_mode(sig)
        self.graph_signature = graph_signature(sig.alphabet.symbols)
        self._fresh = _Fresh()
        self._cache: dict[tuple, CmsFormula] = {}
        self._ginfo: dict[LabeledGraph, dict] = {}
        self.var_spec: dict[str, tuple[tuple[str, str], ...]] = {}
        self.formulas: dict[str, CmsFormula] = {}
        self._build_catalog()

    # -- shared instantiated formulas; one object per (concept, variables) --

    def _inst(self, concept: str, *vars_: str) -> CmsFormula:
        key = (concept, vars_)
        got = self._cache.get(key)
        if got is None:
            got = getattr(self, "_f_" + concept.replace("-", "_"))(*vars_)
            self._cache[key] = got
        return got

    def _f_nonempty(self, X):
        p = self._fresh.elem()
        return Exists(p, In(p, X))

    def _f_proper(self, X):
        p = self._fresh.elem()
        return Exists(p, Not(In(p, X)))

    def _f_subseteq(self, A, B):
        p = self._fresh.elem()
        return Forall(p, Implies(In(p, A), In(p, B)))

    def _f_seteq(self, A, B):
        p = self._fresh.elem()
        return Forall(p, And((Implies(In(p, A), In(p, B)),
                              Implies(In(p, B), In(p, A)))))

    def _f_propersub(self, A, B):
        p = self._fresh.elem()
        return conj(self._inst("subseteq", A, B),
                    Exists(p, And((In(p, B), Not(In(p, A))))))

    def _f_nontrivial(self, X):
        p, q = self._fresh.elem(), self._fresh.elem()
        return Exists(p, Exists(q, conj(In(p, X), In(q, X), Not(Eq(p, q)))))

    def _f_singleton(self, X, x):
        q = self._fresh.elem()
        return conj(In(x, X), Forall(q, Implies(In(q, X), Eq(q, x))))

    def _f_is_singleton(self, X):
        p = self._fresh.elem()
        return Exists(p, self._inst("singleton", X, p))

    def _f_label(self, sym, X):
        p = self._fresh.elem()
        return Exists(p, conj(self._inst("singleton", X, p),
                              Pred(label_pred(sym), (p,))))

    def _f_module(self, X):
        p, q1, q2 = (self._fresh.elem() for _ in range(3))
        half_in = Implies(Exists(q1, And((In(q1, X), _edge(q1, p)))),
                          Forall(q2, Implies(In(q2, X), _edge(q2, p))))
        q3, q4 = self._fresh.elem(), self._fresh.elem()
        half_out = Implies(Exists(q3, And((In(q3, X), _edge(p, q3)))),
                           Forall(q4, Implies(In(q4, X), _edge(p, q4))))
        return Forall(p, Implies(Not(In(p, X)), And((half_in, half_out))))

    def _f_overlap(self, A, B):
        p1, p2, p3 = (self._fresh.elem() for _ in range(3))
        return conj(Exists(p1, And((In(p1, A), In(p1, B)))),
                    Exists(p2, And((In(p2, A), Not(In(p2, B))))),
                    Exists(p3, And((In(p3, B), Not(In(p3, A))))))

    def _f_strongcore(self, X):
        Q = self._fresh.set()
        return ForallSet(Q, Implies(self._inst("module", Q),
                                    Not(self._inst("overlap", X, Q))))

    def _f_pmodule(self, X):
        return conj(self._inst("module", X), self._inst("nonempty", X),
                    self._inst("proper", X), self._inst("strongcore", X))

    def _f_pmoduleV(self, X):
        # like pmodule but keeps the full vertex set: tree roots qualify
        return conj(self._inst("module", X), self._inst("nonempty", X),
                    self._inst("strongcore", X))

    def _split_formula(self, X, mutual: bool):
        """Exists a half of X with no cross edges (or all mutual cross edges)."""
        P = self._fresh.set()
        p, q = self._fresh.elem(), self._fresh.elem()
        if mutual:
            cross = And((_edge(p, q), _edge(q, p)))
        else:
            cross = And((Not(_edge(p, q)), Not(_edge(q, p))))
        body = conj(
            self._inst("nonempty", P),
            self._inst("subseteq", P, X),
            Exists(q, And((In(q, X), Not(In(q, P))))),
            Forall(p, Implies(In(p, P),
                              Forall(q, Implies(And((In(q, X), Not(In(q, P)))),
                                                cross)))))
        return ExistsSet(P, body)

    def _f_disconnected(self, X):
        return self._split_formula(X, mutual=False)

    def _f_co_disconnected(self, X):
        return self._split_formula(X, mutual=True)

    def _f_connected(self, X):
        return Not(self._inst("disconnected", X))

    def _f_co_connected(self, X):
        return Not(self._inst("co-disconnected", X))

    def _f_discrete(self, X):
        p, q = self._fresh.elem(), self._fresh.elem()
        return Forall(p, Implies(In(p, X), Forall(q, Implies(In(q, X),
                                                             Not(_edge(p, q))))))

    def _f_cliqueset(self, X):
        p, q = self._fresh.elem(), self._fresh.elem()
        return Forall(p, Implies(In(p, X), Forall(
            q, Implies(And((In(q, X), Not(Eq(p, q)))),
                       And((_edge(p, q), _edge(q, p)))))))

    def _f_suffix(self, X, Z):
        p, q = self._fresh.elem(), self._fresh.elem()
        return conj(
            self._inst("nonempty", Z), self._inst("subseteq", Z, X),
            Exists(p, And((In(p, X), Not(In(p, Z))))),
            Forall(p, Implies(And((In(p, X), Not(In(p, Z)))),
                              Forall(q, Implies(In(q, Z),
                                                And((_edge(p, q),
                                                     Not(_edge(q, p)))))))))

    def _f_sequential(self, X):
        S = self._fresh.set()
        return ExistsSet(S, self._inst("suffix", X, S))

    def _f_initial(self, X, Y):
        p, q = self._fresh.elem(), self._fresh.elem()
        return conj(
            self._inst("nonempty", Y), self._inst("subseteq", Y, X),
            Exists(p, And((In(p, X), Not(In(p, Y))))),
            Forall(p, Implies(In(p, Y),
                              Forall(q, Implies(And((In(q, X), Not(In(q, Y)))),
                                                And((_edge(p, q),
                                                     Not(_edge(q, p)))))))),
            Not(self._inst("sequential", Y)))

    def _f_label_seq(self, X):
        P = self._fresh.set()
        return conj(self._inst("sequential", X),
                    disj(self._inst("pmoduleV", X),
                         ExistsSet(P, conj(self._inst("pmoduleV", P),
                                           self._inst("sequential", P),
                                           self._inst("suffix", P, X)))))

    def _f_label_par(self, X):
        return conj(self._inst("disconnected", X), self._inst("pmoduleV", X))

    def _f_label_clique(self, X):
        return conj(self._inst("co-disconnected", X), self._inst("pmoduleV", X))

    def _edge_pattern(self, op: SignatureOp, block_vars: Sequence[str]) -> CmsFormula:
        """Cross edges between blocks follow the operation graph exactly."""
        h = op.graph
        parts = []
        for i in range(1, h.n + 1):
            for j in range(1, h.n + 1):
                if i == j:
                    continue
                p, q = self._fresh.elem(), self._fresh.elem()
                want = (i, j) in h.edges
                cross = _edge(p, q) if want else Not(_edge(p, q))
                parts.append(Forall(p, Implies(
                    In(p, block_vars[i - 1]),
                    Forall(q, Implies(In(q, block_vars[j - 1]), cross)))))
        return conj(*parts)

    def _f_children(self, op_name, X, *blocks):
        op = self.sig.op(op_name)
        n = op.graph.n
        # flat form: prime-module blocks + a partition chain + the edge pattern
        parts = [self._inst("pmoduleV", X)]
        parts += [self._inst("pmodule", b) for b in blocks]
        parts.append(self._partition_chain(X, list(blocks)))
        parts.append(self._edge_pattern(op, blocks))
        return conj(*parts)

    def _partition_chain(self, X, blocks: list[str]) -> CmsFormula:
        if len(blocks) == 2:
            return self._inst("partition2", X, blocks[0], blocks[1])
        rest = self._fresh.set()
        return ExistsSet(rest, And((
            self._inst("partition2", X, blocks[0], rest),
            self._partition_chain(rest, blocks[1:]))))

    def _f_partition2(self, X, A, B):
        p = self._fresh.elem()
        q = self._fresh.elem()
        return conj(
            self._inst("nonempty", A), self._inst("nonempty", B),
            Forall(p, Not(And((In(p, A), In(p, B))))),
            Forall(q, And((Implies(In(q, X), Or((In(q, A), In(q, B)))),
                           Implies(In(q, A), In(q, X)),
                           Implies(In(q, B), In(q, X))))))

    def _children_search(self, op: SignatureOp, X: str,
                         extra: Callable[[list[str]], Optional[CmsFormula]] = None,
                         ) -> CmsFormula:
        """Guarded existential search for the child blocks of an H-node.

        Equivalent to exists X1..Xn children_H(X, X1..Xn) but with subset,
        primality and disjointness guards pushed inward so the brute-force
        checker prunes instead of sweeping full tuple spaces.
        """
        n = op.graph.n
        blocks = [self._fresh.set() for _ in range(n)]
        p = self._fresh.elem()
        cover = Forall(p, Implies(In(p, X), disj(*(In(p, b) for b in blocks))))
        core = conj(cover, self._inst("pmoduleV", X),
                    self._edge_pattern(op, blocks))
        if extra is not None:
            ex = extra(blocks)
            if ex is not None:
                core = conj(core, ex)
        body = core
        for k in range(n - 1, -1, -1):
            guards = [self._inst("subseteq", blocks[k], X),
                      self._inst("pmodule", blocks[k])]
            for earlier in blocks[:k]:
                q = self._fresh.elem()
                guards.append(Forall(q, Not(And((In(q, earlier),
                                                 In(q, blocks[k]))))))
            body = ExistsSet(blocks[k], conj(*guards, body))
        return body

    def _f_label_op(self, op_name, X):
        return self._children_search(self.sig.op(op_name), X)

    def _f_node(self, X):
        parts = [self._inst("is_singleton", X)]
        if self.sig.builtin(OpKind.PARALLEL) is not None:
            parts.append(self._inst("label_par", X))
        if self.sig.builtin(OpKind.CLIQUE) is not None:
            parts.append(self._inst("label_clique", X))
        if self.sig.builtin(OpKind.SEQUENTIAL) is not None:
            parts.append(self._inst("label_seq", X))
        for op in self.sig.prime_ops:
            parts.append(self._inst("label_op", op.name, X))
        return disj(*parts)

    def _f_childstar(self, X, Y):
        return conj(self._inst("node", X), self._inst("node", Y),
                    self._inst("propersub", Y, X))

    def _f_child(self, X, Y):
        K = self._fresh.set()
        between = ExistsSet(K, conj(self._inst("propersub", Y, K),
                                    self._inst("propersub", K, X),
                                    self._inst("node", K)))
        return conj(self._inst("node", X), self._inst("node", Y),
                    self._inst("propersub", Y, X), Not(between))

    def _f_first_child(self, X, Y):
        return conj(self._inst("child", X, Y), self._inst("label_seq", X),
                    self._inst("initial", X, Y))

    def _f_dist_child(self, X, Y):
        branches = [conj(self._inst("label_seq", X), self._inst("initial", X, Y))]
        for op in self.sig.prime_ops:
            dist = select_distinguished(op).vertices

            def pick(blocks, dist=dist):
                return disj(*(self._inst("seteq", Y, blocks[i - 1])
                              for i in sorted(dist)))

            branches.append(self._children_search(op, X, extra=pick))
        return conj(self._inst("child", X, Y), disj(*branches))

    # ------------------------------------------------------------ catalog

    def _build_catalog(self):
        S = "set"
        E = "element"

        def add(name, concept_args, spec):
            self.formulas[name] = self._inst(*concept_args)
            self.var_spec[name] = tuple(spec)

        add("singleton", ("singleton", "X", "x"), [("X", S), ("x", E)])
        for sym in self.sig.alphabet:
            add(f"label_{sym}", ("label", sym, "X"), [("X", S)])
        add("partition2", ("partition2", "X", "X1", "X2"),
            [("X", S), ("X1", S), ("X2", S)])
        add("module", ("module", "X"), [("X", S)])
        add("pmodule", ("pmodule", "X"), [("X", S)])
        add("disconnected", ("disconnected", "X"), [("X", S)])
        add("connected", ("connected", "X"), [("X", S)])
        add("label_par", ("label_par", "X"), [("X", S)])
        add("label_clique", ("label_clique", "X"), [("X", S)])
        add("label_seq", ("label_seq", "X"), [("X", S)])
        add("suffix", ("suffix", "X", "Z"), [("X", S), ("Z", S)])
        add("sequential", ("sequential", "X"), [("X", S)])
        add("initial", ("initial", "X", "Y"), [("X", S), ("Y", S)])
        add("node", ("node", "X"), [("X", S)])
        add("child*", ("childstar", "X", "Y"), [("X", S), ("Y", S)])
        add("child", ("child", "X", "Y"), [("X", S), ("Y", S)])
        add("first-child", ("first_child", "X", "Y"), [("X", S), ("Y", S)])
        add("dist-child", ("dist_child", "X", "Y"), [("X", S), ("Y", S)])
        for op in self.sig.prime_ops:
            n = op.graph.n
            blocks = tuple(f"X{i}" for i in range(1, n + 1))
            add(f"label_{op.name}", ("label_op", op.name, "X"), [("X", S)])
            add(f"children_{op.name}", ("children", op.name, "X") + blocks,
                [("X", S)] + [(b, S) for b in blocks])
            if f"partition{n}" not in self.formulas:
                pf = self._partition_chain("X", list(blocks))
                self.formulas[f"partition{n}"] = pf
                self.var_spec[f"partition{n}"] = tuple(
                    [("X", S)] + [(b, S) for b in blocks])

    def names(self) -> list[str]:
        return sorted(self.formulas)

    def formula(self, name: str) -> CmsFormula:
        if name not in self.formulas:
            raise UnknownPredicate(f"no predicate named {name!r}")
        return self.formulas[name]

    def free_vars(self, name: str) -> tuple[tuple[str, str], ...]:
        if name not in self.var_spec:
            raise UnknownPredicate(f"no predicate named {name!r}")
        return self.var_spec[name]

    # ------------------------------------------------ algorithmic versions

    def _graph_info(self, g: LabeledGraph) -> dict:
        info = self._ginfo.get(g)
        if info is not None:
            return info
        t = binarize(decompose(g, None))
        modules = brute_force_modules(g)
        full = g.vertices

        f_nodes: set[frozenset[int]] = set()
        labels: dict[str, set[frozenset[int]]] = {
            "label_par": set(), "label_clique": set(), "label_seq": set()}
        children_tuples: dict[str, set[tuple]] = {}
        dist_by_node: dict[frozenset[int], set[frozenset[int]]] = {}
        for op in self.sig.prime_ops:
            labels[f"label_{op.name}"] = set()
            children_tuples[op.name] = set()

        has_par = self.sig.builtin(OpKind.PARALLEL) is not None
        has_seq = self.sig.builtin(OpKind.SEQUENTIAL) is not None
        has_clique = self.sig.builtin(OpKind.CLIQUE) is not None
        kind_gate = {NodeKind.PAR: has_par, NodeKind.SEQ: has_seq,
                     NodeKind.CLIQUE: has_clique}
        kind_label = {NodeKind.PAR: "label_par", NodeKind.SEQ: "label_seq",
                      NodeKind.CLIQUE: "label_clique"}

        for node in t.nodes():
            m = node.module
            if node.is_leaf:
                f_nodes.add(m)
                continue
            if node.kind in kind_label:
                labels[kind_label[node.kind]].add(m)
                if kind_gate[node.kind]:
                    f_nodes.add(m)
                continue
            matched = self.sig.match_prime(node.op.graph)
            if matched is None:
                continue
            op, sigma = matched
            f_nodes.add(m)
            labels[f"label_{op.name}"].add(m)
            enum = tuple(node.children[sigma(i) - 1].module
                         for i in range(1, op.graph.n + 1))
            perms = cp_equations(op, max_vertices=max(8, op.graph.n))
            tuples = {(m,) + enum}
            for tau in perms:
                tuples.add((m,) + tuple(enum[tau(i) - 1]
                                        for i in range(1, len(enum) + 1)))
            children_tuples[op.name] |= tuples
            dist = select_distinguished(op).vertices
            dist_by_node[m] = {enum[i - 1] for i in dist}

        # child pairs over the signature-labeled nodes only (containment)
        child_pairs: set[tuple] = set()
        star_pairs: set[tuple] = set()
        for y in f_nodes:
            above = [x for x in f_nodes if y < x]
            for x in above:
                star_pairs.add((x, y))
            if above:
                parent = min(above, key=len)
                child_pairs.add((parent, y))
        first_pairs = {(x, y) for (x, y) in child_pairs
                       if x in labels["label_seq"] and _initial_of(g, x, y)}
        dist_pairs = set(first_pairs)
        for (x, y) in child_pairs:
            if y in dist_by_node.get(x, ()):
                dist_pairs.add((x, y))

        info = {"tree": t, "modules": modules, "f_nodes": f_nodes,
                "labels": labels, "children": children_tuples,
                "child": child_pairs, "child*": star_pairs,
                "first-child": first_pairs, "dist-child": dist_pairs,
                "full": full}
        self._ginfo[g] = info
        return info

    def holds(self, name: str, g: LabeledGraph, bindings: Mapping) -> bool:
        """Direct decision procedure for a predicate; the fast oracle side."""
        if name not in self.var_spec:
            raise UnknownPredicate(f"no predicate named {name!r}")
        b = {k: (frozenset(v) if isinstance(v, (set, frozenset)) else v)
             for k, v in bindings.items()}
        for var, kind in self.var_spec[name]:
            if var not in b:
                raise UnknownPredicate(f"predicate {name!r} needs binding {var!r}")
        X = b.get("X")

        if name == "singleton":
            return X == frozenset([b["x"]])
        if name.startswith("label_") and name[6:] in self.sig.alphabet.symbols:
            sym = name[6:]
            return (len(X) == 1 and g.labels is not None
                    and g.labels[next(iter(X))] == sym)
        if name.startswith("partition"):
            blocks = [b[v] for v, _ in self.var_spec[name][1:]]
            if any(not blk for blk in blocks):
                return False
            union: set[int] = set()
            for blk in blocks:
                if union & blk:
                    return False
                union |= blk
            return union == X
        if name == "module":
            return is_module(g, X)
        if name == "pmodule":
            if not X or X == g.vertices or not is_module(g, X):
                return False
            mods = self._graph_info(g)["modules"]
            return not any(X & m and X - m and m - X for m in mods)
        if name == "disconnected":
            return len(X) > 1 and is_internally_disconnected(g, X)
        if name == "connected":
            return not (len(X) > 1 and is_internally_disconnected(g, X))
        if name == "suffix":
            return self._suffix_holds(g, X, b["Z"])
        if name == "sequential":
            return is_sequential_set(g, X)
        if name == "initial":
            return _initial_of(g, X, b["Y"])
        info = self._graph_info(g)
        if name in ("label_par", "label_clique", "label_seq"):
            return X in info["labels"][name]
        if name.startswith("label_"):
            return X in info["labels"][name]
        if name.startswith("children_"):
            op_name = name[len("children_"):]
            blocks = tuple(b[v] for v, _ in self.var_spec[name][1:])
            return (X,) + blocks in info["children"][op_name]
        if name == "node":
            return X in info["f_nodes"]
        if name in ("child", "child*", "first-child", "dist-child"):
            return (X, b["Y"]) in info[name]
        raise UnknownPredicate(f"no predicate named {name!r}")

    @staticmethod
    def _suffix_holds(g: LabeledGraph, x: frozenset[int], z: frozenset[int]) -> bool:
        if not z or not z < x:
            return False
        rest = x - z
        es = g.edges
        return all((p, q) in es and (q, p) not in es for p in rest for q in z)

    # ------------------------------------------------------------- schema

    def schema(self) -> "TransductionSchema":
        return TransductionSchema(self)


def ms_predicate_library(sig: Signature) -> PredicateLibrary:
    """All second-order predicates of the construction, as formulas."""
    return PredicateLibrary(sig)


def eval_set_predicate(name: str, g: LabeledGraph, bindings: Mapping,
                       sig: Signature) -> bool:
    """Algorithmic evaluation of a library predicate on vertex-set bindings."""
    return PredicateLibrary(sig).holds(name, g, bindings)


class _ThetaMap(Mapping):
    """Lazy map (tree predicate, index vector) -> formula."""

    def __init__(self, schema: "TransductionSchema"):
        self._schema = schema
        self._cache: dict[tuple, CmsFormula] = {}

    def __getitem__(self, key):
        name, ivec = key
        ivec = tuple(ivec)
        if (name, ivec) not in self._cache:
            self._cache[(name, ivec)] = self._schema._build_theta(name, ivec)
        return self._cache[(name, ivec)]

    def __iter__(self):
        for name, arity in self._schema.tree_signature.predicates:
            for ivec in itertools.product(range(4), repeat=arity):
                yield (name, ivec)

    def __len__(self):
        return sum(4 ** arity for _, arity in
                   self._schema.tree_signature.predicates)


class TransductionSchema:
    """The defining formulas of the graph-to-tree transduction.

    Three copies of the leaf set plus the original one (copy_bound 3) and
    four set parameters standing for the representative sets; phi accepts
    exactly the correct parameter assignments, psi_i places (x, i) in the
    output domain, and theta interprets every tree predicate.
    """

    copy_bound = 3
    parameter_count = 4
    params = ("X0", "X1", "X2", "X3")

    def __init__(self, library: PredicateLibrary):
        self.library = library
        self.signature = library.sig
        self.mode = library.mode
        self.graph_signature = library.graph_signature
        self.tree_signature = self._tree_signature()
        lib = library
        self._disc = ("co-disconnected" if self.mode is NodeKind.CLIQUE
                      else "disconnected")
        self._degenerate = ("cliqueset" if self.mode is NodeKind.CLIQUE
                            else "discrete")
        self.kappa_formulas = tuple(self._build_kappa(i) for i in range(4))
        self.psi = tuple(In("x", p) for p in self.params)
        self.phi = self._build_phi()
        self.theta_family = _ThetaMap(self)

    def _tree_signature(self) -> RelationalSignature:
        preds = [("child", 2), ("first-child", 2), ("label_par", 1),
                 ("label_clique", 1), ("label_seq", 1)]
        preds += [(label_pred(s), 1) for s in self.signature.alphabet]
        for op in self.signature.prime_ops:
            preds += [(f"label_{op.name}", 1),
                      (f"children_{op.name}", op.graph.n + 1),
                      (f"dist-child_{op.name}", 2)]
        return RelationalSignature(tuple(preds))

    def _build_kappa(self, i: int, x: str = "x", M: str = "M") -> CmsFormula:
        """Formula stating M = kappa_i(x), over the graph signature."""
        lib = self.library
        if i == 0:
            return lib._inst("singleton", M, x)
        if i == 1:
            Q = lib._fresh.set()
            minimal = ForallSet(Q, Implies(
                conj(lib._inst("pmoduleV", Q), lib._inst(self._disc, Q),
                     In(x, Q)),
                lib._inst("subseteq", M, Q)))
            return conj(In(x, M), lib._inst("pmoduleV", M),
                        lib._inst(self._disc, M),
                        lib._inst(self._degenerate, M), minimal)
        if i == 3:
            Y = lib._fresh.set()
            Q = lib._fresh.set()
            Z = lib._fresh.set()
            in_dist = ExistsSet(Y, conj(lib._inst("dist_child", M, Y), In(x, Y)))
            below_not_dist = ForallSet(Q, Implies(
                conj(lib._inst("node", Q), Not(lib._inst(self._disc, Q)),
                     lib._inst("nontrivial", Q), In(x, Q),
                     lib._inst("propersub", Q, M)),
                Not(ExistsSet(Z, conj(lib._inst("dist_child", Q, Z), In(x, Z))))))
            return conj(lib._inst("node", M), Not(lib._inst(self._disc, M)),
                        In(x, M), in_dist, below_not_dist)
        K = lib._fresh.set()
        return ExistsSet(K, conj(self._build_kappa(3, x, K),
                                 lib._inst("child", M, K),
                                 lib._inst(self._disc, M)))

    def kappa_formula(self, i: int) -> CmsFormula:
        """M = kappa_i(x) with free element variable x and free set variable M."""
        return self.kappa_formulas[i]

    def _kappa_at(self, i: int, x: str, M: str) -> CmsFormula:
        key = ("schema-kappa", i, x, M)
        got = self.library._cache.get(key)
        if got is None:
            got = self._build_kappa(i, x, M)
            self.library._cache[key] = got
        return got

    def _build_phi(self) -> CmsFormula:
        lib = self.library
        parts = []
        for i, Xi in enumerate(self.params):
            p, q = lib._fresh.elem(), lib._fresh.elem()
            M1 = lib._fresh.set()
            in_domain = Forall(p, Implies(
                In(p, Xi), ExistsSet(M1, self._kappa_at(i, p, M1))))
            M2 = lib._fresh.set()
            injective = Forall(p, Forall(q, Implies(
                conj(In(p, Xi), In(q, Xi), Not(Eq(p, q))),
                Not(ExistsSet(M2, conj(self._kappa_at(i, p, M2),
                                       self._kappa_at(i, q, M2)))))))
            M3, M4 = lib._fresh.set(), lib._fresh.set()
            covering = Forall(p, Implies(
                ExistsSet(M3, self._kappa_at(i, p, M3)),
                Exists(q, conj(In(q, Xi),
                               ExistsSet(M4, conj(self._kappa_at(i, p, M4),
                                                  self._kappa_at(i, q, M4)))))))
            parts += [in_domain, injective, covering]
        return conj(*parts)

    def _build_theta(self, name: str, ivec: tuple[int, ...]) -> CmsFormula:
        lib = self.library
        arity = self.tree_signature.arity(name)
        if len(ivec) != arity or any(not 0 <= i <= 3 for i in ivec):
            raise ValueError(f"index vector {ivec} does not fit {name!r}")
        xs = tuple(f"x{k}" for k in range(1, arity + 1))
        false = Not(Eq(xs[0], xs[0]))
        true = Eq(xs[0], xs[0])
        comm_label = ("label_clique" if self.mode is NodeKind.CLIQUE
                      else "label_par")
        if name.startswith("label_") and name[6:] in self.signature.alphabet.symbols:
            return Pred(name, xs) if ivec[0] == 0 else false
        if name == comm_label:
            return true if ivec[0] in (1, 2) else false
        if name in ("label_par", "label_clique"):
            return false  # the inactive commutative product labels nothing
        if name == "label_seq":
            if ivec[0] != 3:
                return false
            M = lib._fresh.set()
            return ExistsSet(M, conj(self._kappa_at(3, xs[0], M),
                                     lib._inst("label_seq", M)))
        if name.startswith("label_"):
            if ivec[0] != 3:
                return false
            op_name = name[6:]
            M = lib._fresh.set()
            return ExistsSet(M, conj(self._kappa_at(3, xs[0], M),
                                     lib._inst("label_op", op_name, M)))
        if name in ("child", "first-child") or name.startswith("dist-child_"):
            M, N = lib._fresh.set(), lib._fresh.set()
            if name == "child":
                rel = lib._inst("child", M, N)
            elif name == "first-child":
                rel = lib._inst("first_child", M, N)
            else:
                op_name = name[len("dist-child_"):]
                rel = conj(lib._inst("label_op", op_name, M),
                           lib._inst("dist_child", M, N))
            return ExistsSet(M, conj(
                self._kappa_at(ivec[0], xs[0], M),
                ExistsSet(N, conj(self._kappa_at(ivec[1], xs[1], N), rel))))
        if name.startswith("children_"):
            op_name = name[len("children_"):]
            op = self.signature.op(op_name)
            sets = [lib._fresh.set() for _ in range(arity)]
            body = lib._inst("children", op_name, *sets)
            out = conj(*(self._kappa_at(ivec[k], xs[k], sets[k])
                         for k in range(arity)), body)
            for s in reversed(sets):
                out = ExistsSet(s, out)
            return out
        raise UnknownPredicate(f"no tree predicate named {name!r}")

    def theta(self, name: str, ivec: Sequence[int]) -> CmsFormula:
        return self.theta_family[(name, tuple(ivec))]


def transduction_schema(sig: Signature) -> TransductionSchema:
    """Assemble phi, psi_0..psi_3 and the theta family for a signature."""
    return ms_predicate_library(sig).schema()

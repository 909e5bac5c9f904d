"""Counting monadic second-order logic over finite relational structures.

Formulas are plain syntax trees; model checking is brute-force Tarskian
semantics (set quantifiers range over all subsets of the domain) with a
deterministic work budget and memoization of quantified subformulas.
Structure encoders turn labeled graphs and decomposition trees into
relational structures.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (ArityMismatch, BudgetExceeded, FormulaSyntaxError,
                     UnboundVariable, UnknownPredicate)
from .graphs import LabeledGraph
from .mdec import MDecNode, MDecTree, NodeKind
from .signature import Signature, SignatureOp, cp_equations, select_distinguished
from .errors import NotWeaklyRigid

DEFAULT_BUDGET = 10 ** 8

ELEMENT = "element"
SET = "set"


@dataclass(frozen=True)
class RelationalSignature:
    predicates: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.predicates]
        if len(set(names)) != len(names):
            raise ValueError("duplicate predicate names")
        if any(a < 1 for _, a in self.predicates):
            raise ValueError("predicate arities must be >= 1")

    def arity(self, name: str) -> int:
        for n, a in self.predicates:
            if n == name:
                return a
        raise UnknownPredicate(f"predicate {name!r} not in signature")

    def has(self, name: str) -> bool:
        return any(n == name for n, _ in self.predicates)


@dataclass(frozen=True)
class Structure:
    """Finite domain with one relation of matching arity per predicate."""

    signature: RelationalSignature
    domain: tuple
    relations: Mapping[str, frozenset[tuple]]

    def __post_init__(self):
        dom = set(self.domain)
        if len(dom) != len(self.domain):
            raise ValueError("domain elements must be distinct")
        for name, tuples in self.relations.items():
            arity = self.signature.arity(name)
            for tup in tuples:
                if len(tup) != arity or any(e not in dom for e in tup):
                    raise ValueError(f"bad tuple {tup} for predicate {name!r}")


# ---------------------------------------------------------------- formulas

# dispatch tags, ordered roughly by evaluation frequency
_T_IN, _T_EQ, _T_PRED, _T_NOT, _T_AND, _T_OR, _T_IMPLIES = range(7)
_T_EXISTS, _T_FORALL, _T_EXISTS_SET, _T_FORALL_SET, _T_EXISTS_MOD = range(7, 12)
_QUANT_TAGS = frozenset((_T_EXISTS, _T_FORALL, _T_EXISTS_SET, _T_FORALL_SET,
                         _T_EXISTS_MOD))


class CmsFormula:
    tag = -1

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def kinds(self, out: dict[str, str]):
        """Accumulate variable kinds, complaining about mixed usage."""
        raise NotImplementedError

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class In(CmsFormula):
    elem: str
    sett: str
    tag = _T_IN

    def free_vars(self):
        return frozenset((self.elem, self.sett))

    def kinds(self, out):
        _note_kind(out, self.elem, ELEMENT)
        _note_kind(out, self.sett, SET)


@dataclass(frozen=True)
class Eq(CmsFormula):
    left: str
    right: str
    tag = _T_EQ

    def free_vars(self):
        return frozenset((self.left, self.right))

    def kinds(self, out):
        _note_kind(out, self.left, ELEMENT)
        _note_kind(out, self.right, ELEMENT)


@dataclass(frozen=True)
class Pred(CmsFormula):
    name: str
    args: tuple[str, ...]
    tag = _T_PRED

    def free_vars(self):
        return frozenset(self.args)

    def kinds(self, out):
        for a in self.args:
            _note_kind(out, a, ELEMENT)


@dataclass(frozen=True)
class Not(CmsFormula):
    body: CmsFormula
    tag = _T_NOT

    def free_vars(self):
        return self.body.free_vars()

    def kinds(self, out):
        self.body.kinds(out)


@dataclass(frozen=True)
class And(CmsFormula):
    parts: tuple[CmsFormula, ...]
    tag = _T_AND

    def free_vars(self):
        return frozenset().union(*(p.free_vars() for p in self.parts))

    def kinds(self, out):
        for p in self.parts:
            p.kinds(out)


@dataclass(frozen=True)
class Or(CmsFormula):
    parts: tuple[CmsFormula, ...]
    tag = _T_OR

    def free_vars(self):
        return frozenset().union(*(p.free_vars() for p in self.parts))

    def kinds(self, out):
        for p in self.parts:
            p.kinds(out)


@dataclass(frozen=True)
class Implies(CmsFormula):
    left: CmsFormula
    right: CmsFormula
    tag = _T_IMPLIES

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def kinds(self, out):
        self.left.kinds(out)
        self.right.kinds(out)


class _Quantifier(CmsFormula):
    var: str
    body: CmsFormula
    _kind = ELEMENT

    def free_vars(self):
        return self.body.free_vars() - {self.var}

    def kinds(self, out):
        inner: dict[str, str] = {}
        self.body.kinds(inner)
        if self.var in inner and inner[self.var] != self._kind:
            raise UnboundVariable(
                f"variable {self.var!r} used as {inner[self.var]} under a "
                f"{self._kind} quantifier")
        inner.pop(self.var, None)
        for name, kind in inner.items():
            _note_kind(out, name, kind)


@dataclass(frozen=True)
class Exists(_Quantifier):
    var: str
    body: CmsFormula
    tag = _T_EXISTS


@dataclass(frozen=True)
class Forall(_Quantifier):
    var: str
    body: CmsFormula
    tag = _T_FORALL


@dataclass(frozen=True)
class ExistsSet(_Quantifier):
    var: str
    body: CmsFormula
    tag = _T_EXISTS_SET
    _kind = SET


@dataclass(frozen=True)
class ForallSet(_Quantifier):
    var: str
    body: CmsFormula
    tag = _T_FORALL_SET
    _kind = SET


@dataclass(frozen=True)
class ExistsMod(_Quantifier):
    """Holds iff the number of witnesses is congruent to 0 modulo q."""

    q: int
    var: str
    body: CmsFormula
    tag = _T_EXISTS_MOD

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("counting modulus must be >= 2")


def _note_kind(out: dict[str, str], name: str, kind: str):
    prev = out.setdefault(name, kind)
    if prev != kind:
        raise UnboundVariable(f"variable {name!r} used both as {prev} and {kind}")


def conj(*parts: CmsFormula) -> CmsFormula:
    flat: list[CmsFormula] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else (p,))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: CmsFormula) -> CmsFormula:
    flat: list[CmsFormula] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Or) else (p,))
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def variable_kinds(f: CmsFormula) -> dict[str, str]:
    """Kinds of the free variables (element vs set), by usage."""
    out: dict[str, str] = {}
    f.kinds(out)
    return out


def to_text(f: CmsFormula) -> str:
    if isinstance(f, In):
        return f"(in {f.elem} {f.sett})"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Pred):
        return "(" + " ".join((f.name,) + f.args) + ")"
    if isinstance(f, Not):
        return f"(not {to_text(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(to_text(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(to_text(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_text(f.left)} {to_text(f.right)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_text(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {to_text(f.body)})"
    if isinstance(f, ExistsSet):
        return f"(existsset {f.var} {to_text(f.body)})"
    if isinstance(f, ForallSet):
        return f"(forallset {f.var} {to_text(f.body)})"
    if isinstance(f, ExistsMod):
        return f"(existsmod {f.q} {f.var} {to_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ------------------------------------------------------------------ parser

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_KEYWORDS = {"exists", "forall", "existsset", "forallset", "existsmod",
             "and", "or", "not", "implies", "in", "="}


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, int, int]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0]
            for m in _TOKEN_RE.finditer(body):
                self.items.append((m.group(), lineno, m.start() + 1))
        self.pos = 0
        last = self.items[-1] if self.items else ("", 1, 1)
        self.eof = ("<eof>", last[1], last[2] + len(last[0]))

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else self.eof

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok


def _fail(tok, msg):
    raise FormulaSyntaxError(tok[1], tok[2], msg)


def parse_formula(text: str, sig: RelationalSignature,
                  free_vars: Optional[Mapping[str, str]] = None) -> CmsFormula:
    """Parse the parenthesized prefix grammar against a relational signature.

    Variables must be bound by a quantifier or declared in free_vars
    (mapping name -> "element" | "set").
    """
    toks = _Tokens(text)
    scope: dict[str, str] = dict(free_vars or {})

    def expect(text_):
        tok = toks.next()
        if tok[0] != text_:
            _fail(tok, f"expected {text_!r}, found {tok[0]!r}")
        return tok

    def var_token():
        tok = toks.next()
        if tok[0] in ("(", ")", "<eof>") or tok[0] in _KEYWORDS:
            _fail(tok, "expected a variable name")
        return tok

    def use(tok, kind):
        name = tok[0]
        if name not in scope:
            raise UnboundVariable(f"{tok[1]}:{tok[2]}: variable {name!r} is not bound")
        if scope[name] != kind:
            raise UnboundVariable(
                f"{tok[1]}:{tok[2]}: variable {name!r} is a {scope[name]} "
                f"variable, used as {kind}")
        return name

    def quantified(kind, build):
        tok = var_token()
        name = tok[0]
        saved = scope.get(name)
        scope[name] = kind
        body = formula()
        if saved is None:
            del scope[name]
        else:
            scope[name] = saved
        return build(name, body)

    def formula() -> CmsFormula:
        open_tok = toks.next()
        if open_tok[0] != "(":
            _fail(open_tok, "expected '('")
        head = toks.next()
        kw = head[0]
        if kw == "exists":
            node = quantified(ELEMENT, Exists)
        elif kw == "forall":
            node = quantified(ELEMENT, Forall)
        elif kw == "existsset":
            node = quantified(SET, ExistsSet)
        elif kw == "forallset":
            node = quantified(SET, ForallSet)
        elif kw == "existsmod":
            qtok = toks.next()
            if not qtok[0].isdigit() or int(qtok[0]) < 2:
                _fail(qtok, "counting modulus must be an integer >= 2")
            q = int(qtok[0])
            node = quantified(ELEMENT, lambda v, b: ExistsMod(q, v, b))
        elif kw == "not":
            node = Not(formula())
        elif kw == "implies":
            node = Implies(formula(), formula())
        elif kw in ("and", "or"):
            parts = [formula()]
            while toks.peek()[0] == "(":
                parts.append(formula())
            if len(parts) < 2:
                _fail(toks.peek(), f"{kw} needs at least 2 operands")
            node = And(tuple(parts)) if kw == "and" else Or(tuple(parts))
        elif kw == "in":
            node = In(use(var_token(), ELEMENT), use(var_token(), SET))
        elif kw == "=":
            node = Eq(use(var_token(), ELEMENT), use(var_token(), ELEMENT))
        elif kw in ("(", ")", "<eof>"):
            _fail(head, "expected an operator or predicate name")
        else:
            if not sig.has(kw):
                raise UnknownPredicate(f"{head[1]}:{head[2]}: unknown predicate {kw!r}")
            arg_toks = []
            while toks.peek()[0] not in (")", "<eof>"):
                arg_toks.append(var_token())
            if len(arg_toks) != sig.arity(kw):
                raise ArityMismatch(
                    f"{head[1]}:{head[2]}: predicate {kw!r} expects "
                    f"{sig.arity(kw)} arguments, got {len(arg_toks)}")
            node = Pred(kw, tuple(use(tok, ELEMENT) for tok in arg_toks))
        expect(")")
        return node

    result = formula()
    trailing = toks.peek()
    if trailing[0] != "<eof>":
        _fail(trailing, "unexpected trailing input")
    return result


# ----------------------------------------------------------- model checking

_MISS = object()

SetValue = Union[set, frozenset]


class ModelChecker:
    """Brute-force evaluator over one structure.

    Work is counted per visited formula node (memo hits included) against a
    deterministic budget; quantified subformulas are memoized per
    assignment of their free variables, so repeated queries against the
    same checker share tables.
    """

    def __init__(self, structure: Structure, budget: int = DEFAULT_BUDGET):
        self.structure = structure
        self.domain = tuple(structure.domain)
        self.n = len(self.domain)
        self.index = {e: i for i, e in enumerate(self.domain)}
        self.rels: dict[str, set] = {name: set() for name, _ in
                                     structure.signature.predicates}
        for name, tuples in structure.relations.items():
            self.rels[name] = {tuple(self.index[e] for e in tup) for tup in tuples}
        self.budget = budget
        self.work = 0
        self._memo: dict = {}
        self._fv: dict[int, tuple[str, ...]] = {}
        self._top: dict[int, tuple[tuple[str, ...], dict[str, str]]] = {}

    def reset_budget(self, budget: Optional[int] = None):
        self.work = 0
        if budget is not None:
            self.budget = budget

    def to_mask(self, value: Iterable) -> int:
        mask = 0
        for e in value:
            mask |= 1 << self.index[e]
        return mask

    def from_mask(self, mask: int) -> frozenset:
        return frozenset(self.domain[i] for i in range(self.n) if mask >> i & 1)

    def check(self, formula: CmsFormula, env: Optional[Mapping] = None) -> bool:
        cached = self._top.get(id(formula))
        if cached is None:
            cached = (self._fvars(formula), variable_kinds(formula))
            self._top[id(formula)] = cached
        free, kinds = cached
        ienv: dict[str, int] = {}
        env = env or {}
        for name in free:
            if name not in env:
                raise UnboundVariable(f"no value for free variable {name!r}")
            value = env[name]
            if kinds.get(name) == SET:
                if not isinstance(value, (set, frozenset)):
                    raise UnboundVariable(f"variable {name!r} needs a set value")
                ienv[name] = self.to_mask(value)
            else:
                if value not in self.index:
                    raise UnboundVariable(f"value of {name!r} is outside the domain")
                ienv[name] = self.index[value]
        return self._eval(formula, ienv)

    def check_prepared(self, formula: CmsFormula, ienv: Mapping[str, int]) -> bool:
        """Like check, with the environment already in internal form
        (element indices and set bitmasks over the domain order)."""
        return self._eval(formula, dict(ienv))

    def _fvars(self, node: CmsFormula) -> tuple[str, ...]:
        key = id(node)
        got = self._fv.get(key)
        if got is None:
            tag = node.tag
            if tag in (_T_IN, _T_EQ, _T_PRED):
                got = tuple(sorted(node.free_vars()))
            elif tag == _T_NOT:
                got = self._fvars(node.body)
            elif tag in (_T_AND, _T_OR):
                acc: set[str] = set()
                for p in node.parts:
                    acc.update(self._fvars(p))
                got = tuple(sorted(acc))
            elif tag == _T_IMPLIES:
                got = tuple(sorted(set(self._fvars(node.left))
                                   | set(self._fvars(node.right))))
            else:
                got = tuple(v for v in self._fvars(node.body) if v != node.var)
            self._fv[key] = got
        return got

    def _eval(self, node: CmsFormula, env: dict[str, int]) -> bool:
        # the hot loop: tag dispatch, short-circuit connectives, memoized
        # quantifiers; every visit costs one unit of budget
        self.work += 1
        if self.work > self.budget:
            raise BudgetExceeded(f"work budget of {self.budget} exhausted")
        tag = node.tag
        if tag == _T_IN:
            return env[node.sett] >> env[node.elem] & 1 == 1
        if tag == _T_EQ:
            return env[node.left] == env[node.right]
        if tag == _T_PRED:
            return tuple(env[a] for a in node.args) in self.rels[node.name]
        if tag == _T_NOT:
            return not self._eval(node.body, env)
        if tag == _T_AND:
            return all(self._eval(p, env) for p in node.parts)
        if tag == _T_OR:
            return any(self._eval(p, env) for p in node.parts)
        if tag == _T_IMPLIES:
            return not self._eval(node.left, env) or self._eval(node.right, env)

        key = (id(node),) + tuple(env[v] for v in self._fvars(node))
        hit = self._memo.get(key, _MISS)
        if hit is not _MISS:
            return hit

        var = node.var
        saved = env.get(var, _MISS)
        try:
            if tag == _T_EXISTS:
                result = False
                for i in range(self.n):
                    env[var] = i
                    if self._eval(node.body, env):
                        result = True
                        break
            elif tag == _T_FORALL:
                result = True
                for i in range(self.n):
                    env[var] = i
                    if not self._eval(node.body, env):
                        result = False
                        break
            elif tag == _T_EXISTS_SET:
                result = False
                for mask in range(1 << self.n):
                    env[var] = mask
                    if self._eval(node.body, env):
                        result = True
                        break
            elif tag == _T_FORALL_SET:
                result = True
                for mask in range(1 << self.n):
                    env[var] = mask
                    if not self._eval(node.body, env):
                        result = False
                        break
            elif tag == _T_EXISTS_MOD:
                count = 0
                for i in range(self.n):
                    env[var] = i
                    if self._eval(node.body, env):
                        count += 1
                result = count % node.q == 0
            else:
                raise TypeError(f"not a formula node: {node!r}")
        finally:
            if saved is _MISS:
                env.pop(var, None)
            else:
                env[var] = saved
        self._memo[key] = result
        return result


def model_check(s: Structure, f: CmsFormula, env: Optional[Mapping] = None,
                budget: int = DEFAULT_BUDGET) -> bool:
    """One-shot satisfaction check with a fresh checker."""
    return ModelChecker(s, budget=budget).check(f, env)


# ------------------------------------------------------------------ encoders

def label_pred(symbol: str) -> str:
    return f"label_{symbol}"


def graph_signature(symbols: Sequence[str]) -> RelationalSignature:
    return RelationalSignature((("edge", 2),) +
                               tuple((label_pred(s), 1) for s in symbols))


def graph_structure(g: LabeledGraph, alphabet: Optional[Sequence[str]] = None) -> Structure:
    """Vertices as domain, with the edge relation and one label predicate
    per alphabet symbol."""
    if alphabet is None:
        if g.labels is None:
            raise ValueError("an unlabeled graph needs an explicit alphabet")
        alphabet = sorted(set(g.labels.values()))
    sig = graph_signature(alphabet)
    rels: dict[str, frozenset] = {"edge": frozenset(g.edges)}
    for sym in alphabet:
        rels[label_pred(sym)] = frozenset(
            (v,) for v in g.vertices if g.labels and g.labels[v] == sym)
    return Structure(sig, tuple(g.sorted_vertices()), rels)


def _admissible_enumerations(node: MDecNode) -> list[tuple[MDecNode, ...]]:
    """All argument orders under which a prime node is a composition by its op."""
    perms = cp_equations(node.op, max_vertices=max(8, node.op.graph.n))
    seen = {node.children}
    out = [node.children]
    for sigma in perms:
        tup = tuple(node.children[sigma(i) - 1] for i in range(1, len(node.children) + 1))
        if tup not in seen:
            seen.add(tup)
            out.append(tup)
    return out


def tree_relations(t: MDecTree, sig: Optional[Signature] = None,
                   ) -> tuple[RelationalSignature, dict[str, set[tuple]], list[MDecNode]]:
    """Decomposition-tree predicates with nodes as the carrier.

    Returns the relational signature, the relations keyed by node objects,
    and the node list in preorder.  Prime predicates cover the signature's
    operations when one is given, else the operations appearing in the tree.
    """
    nodes = t.nodes()
    symbols: list[str] = sorted({n.symbol for n in nodes
                                 if n.is_leaf and n.symbol is not None})
    if sig is not None:
        symbols = list(sig.alphabet.symbols)
        prime_ops: list[SignatureOp] = list(sig.prime_ops)
        tree_ops = {n.op.name for n in nodes if n.kind is NodeKind.PRIME}
        missing = tree_ops - {op.name for op in prime_ops}
        if missing:
            raise UnknownPredicate(
                f"tree uses operations {sorted(missing)} not in the signature")
    else:
        seen: dict[str, SignatureOp] = {}
        for n in nodes:
            if n.kind is NodeKind.PRIME:
                seen.setdefault(n.op.name, n.op)
        prime_ops = [seen[k] for k in sorted(seen)]

    preds: list[tuple[str, int]] = [("child", 2), ("first-child", 2),
                                    ("label_par", 1), ("label_clique", 1),
                                    ("label_seq", 1)]
    preds += [(label_pred(s), 1) for s in symbols]
    rels: dict[str, set[tuple]] = {name: set() for name, _ in preds}

    dist_ops: dict[str, frozenset[int]] = {}
    for op in prime_ops:
        n = op.graph.n
        preds += [(f"label_{op.name}", 1), (f"children_{op.name}", n + 1)]
        rels[f"label_{op.name}"] = set()
        rels[f"children_{op.name}"] = set()
        try:
            dist_ops[op.name] = select_distinguished(op).vertices
            preds.append((f"dist-child_{op.name}", 2))
            rels[f"dist-child_{op.name}"] = set()
        except NotWeaklyRigid:
            pass  # no distinguished children for transitive operations

    kind_label = {NodeKind.PAR: "label_par", NodeKind.CLIQUE: "label_clique",
                  NodeKind.SEQ: "label_seq"}
    for node in nodes:
        if node.is_leaf:
            if node.symbol is not None:
                rels[label_pred(node.symbol)].add((node,))
            continue
        for c in node.children:
            rels["child"].add((node, c))
        if node.kind is NodeKind.SEQ:
            rels["label_seq"].add((node,))
            rels["first-child"].add((node, node.children[0]))
        elif node.kind in kind_label:
            rels[kind_label[node.kind]].add((node,))
        else:
            rels[f"label_{node.op.name}"].add((node,))
            for enum in _admissible_enumerations(node):
                rels[f"children_{node.op.name}"].add((node,) + enum)
            dist = dist_ops.get(node.op.name)
            if dist is not None:
                for i in dist:
                    rels[f"dist-child_{node.op.name}"].add(
                        (node, node.children[i - 1]))
    return RelationalSignature(tuple(preds)), rels, nodes


def tree_structure(t: MDecTree, sig: Optional[Signature] = None) -> Structure:
    """Relational structure of a tree; domain is 0..m-1 in preorder."""
    rsig, rels, nodes = tree_relations(t, sig)
    idx = {node: i for i, node in enumerate(nodes)}
    mapped = {name: frozenset(tuple(idx[n] for n in tup) for tup in tuples)
              for name, tuples in rels.items()}
    return Structure(rsig, tuple(range(len(nodes))), mapped)

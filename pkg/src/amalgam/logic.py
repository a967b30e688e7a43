"""First-order formulas over finite structures.

AST, a text parser, a Tarskian model checker, syntactic classification
(universal / existential / inductive), and the diagram-to-sentence step
that existentially closes a set of atomic facts.

Grammar (text form): variables [a-z][a-zA-Z0-9_]*; element parameters
c<digits> (bound to universe elements at evaluation time); quantifiers
"forall v1 v2 ." and "exists v1 ."; connectives !, &, |, -> with
precedence ! > & > | > -> and parentheses; atoms "name(t1,...,tn)" and
"t = u"; the keywords "true" and "false" denote the empty conjunction
and the empty disjunction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import DiagramLiteral, FinStructure, Signature, reduct
from .errors import (
    ArityMismatch,
    FormulaSyntaxError,
    NotSubsignature,
    UnboundVariable,
    UnknownSymbol,
)

# --------------------------------------------------------------------------
# Terms


class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    """A declared constant symbol."""

    name: str


@dataclass(frozen=True)
class Param(Term):
    """An element parameter c<index>: a universe element used as a name."""

    index: int


@dataclass(frozen=True)
class Func(Term):
    name: str
    args: tuple[Term, ...]


# --------------------------------------------------------------------------
# Formulas


class Formula:
    pass


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    """n-ary conjunction; And(()) is the true sentence."""

    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    """n-ary disjunction; Or(()) is the false sentence."""

    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


TRUE = And(())
FALSE = Or(())


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


# --------------------------------------------------------------------------
# Parser

_KEYWORDS = {"forall", "exists", "true", "false"}
_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<punct>[()=,.!&|])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)
_VAR = re.compile(r"[a-z][a-zA-Z0-9_]*$")
_PARAM = re.compile(r"c([0-9]+)$")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", pos)
            if m.lastgroup == "arrow":
                self.toks.append(("->", "->", m.start("arrow")))
            elif m.lastgroup == "punct":
                tok = m.group("punct")
                self.toks.append((tok, tok, m.start("punct")))
            else:
                self.toks.append(("ident", m.group("ident"), m.start("ident")))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.ts = _Tokens(text)
        self.sig = sig

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.ts.peek()
        if tok[0] != "eof":
            raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2])
        return f

    def formula(self) -> Formula:
        kind, value, _ = self.ts.peek()
        if kind == "ident" and value in ("forall", "exists"):
            return self.quantified()
        return self.implication()

    def quantified(self) -> Formula:
        _, kw, pos = self.ts.next()
        names: list[str] = []
        while True:
            kind, value, p = self.ts.peek()
            if kind == "ident" and value not in _KEYWORDS:
                if not _VAR.match(value) or _PARAM.match(value):
                    raise FormulaSyntaxError(f"{value!r} is not a valid variable name", p)
                names.append(value)
                self.ts.next()
            else:
                break
        if not names:
            raise FormulaSyntaxError(f"{kw} needs at least one variable", pos)
        self.ts.expect(".")
        body = self.formula()
        ctor = ForAll if kw == "forall" else Exists
        for name in reversed(names):
            body = ctor(name, body)
        return body

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.ts.peek()[0] == "->":
            self.ts.next()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.ts.peek()[0] == "|":
            self.ts.next()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.ts.peek()[0] == "&":
            self.ts.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        kind, value, _ = self.ts.peek()
        if kind == "!":
            self.ts.next()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, value, pos = self.ts.peek()
        if kind == "(":
            self.ts.next()
            f = self.formula()
            self.ts.expect(")")
            return f
        if kind == "ident" and value == "true":
            self.ts.next()
            return TRUE
        if kind == "ident" and value == "false":
            self.ts.next()
            return FALSE
        if kind == "ident" and value in ("forall", "exists"):
            raise FormulaSyntaxError("quantifier must be parenthesized here", pos)
        return self.atom()

    def atom(self) -> Formula:
        kind, value, pos = self.ts.peek()
        if kind != "ident":
            raise FormulaSyntaxError(f"expected an atom, found {value!r}", pos)
        if value in self.sig.relations:
            self.ts.next()
            args = self.arg_list()
            if len(args) != self.sig.relations[value]:
                raise ArityMismatch(
                    f"{value} expects {self.sig.relations[value]} arguments, got {len(args)}"
                )
            return Rel(value, args)
        left = self.term()
        self.ts.expect("=")
        right = self.term()
        return Eq(left, right)

    def arg_list(self) -> tuple[Term, ...]:
        self.ts.expect("(")
        args = [self.term()]
        while self.ts.peek()[0] == ",":
            self.ts.next()
            args.append(self.term())
        self.ts.expect(")")
        return tuple(args)

    def term(self) -> Term:
        kind, value, pos = self.ts.next()
        if kind != "ident":
            raise FormulaSyntaxError(f"expected a term, found {value!r}", pos)
        if value in _KEYWORDS:
            raise FormulaSyntaxError(f"{value!r} cannot be used as a term", pos)
        m = _PARAM.match(value)
        if m:
            return Param(int(m.group(1)))
        if value in self.sig.functions:
            args = self.arg_list()
            if len(args) != self.sig.functions[value]:
                raise ArityMismatch(
                    f"{value} expects {self.sig.functions[value]} arguments, got {len(args)}"
                )
            return Func(value, args)
        if value in self.sig.constants:
            return Const(value)
        if value in self.sig.relations:
            raise FormulaSyntaxError(f"relation {value} used as a term", pos)
        if not _VAR.match(value):
            raise UnknownSymbol(f"{value} is not declared and not a valid variable")
        if self.ts.peek()[0] == "(":
            raise UnknownSymbol(f"{value} is applied to arguments but not declared")
        return Var(value)


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse formula text against sig; free variables are allowed."""
    return _Parser(text, sig).parse()


def parse_sentence(text: str, sig: Signature) -> Formula:
    """Parse and require closedness."""
    f = parse_formula(text, sig)
    fv = free_vars(f)
    if fv:
        raise UnboundVariable(f"sentence has free variables {sorted(fv)}")
    return f


def free_vars(f: Formula) -> frozenset[str]:
    def term_vars(t: Term) -> frozenset[str]:
        if isinstance(t, Var):
            return frozenset((t.name,))
        if isinstance(t, Func):
            return frozenset().union(*(term_vars(a) for a in t.args)) if t.args else frozenset()
        return frozenset()

    if isinstance(f, Rel):
        return frozenset().union(*(term_vars(a) for a in f.args)) if f.args else frozenset()
    if isinstance(f, Eq):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Implies):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (ForAll, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def validate(f: Formula, sig: Signature) -> None:
    """Check every symbol of f is declared in sig with the right arity."""

    def check_term(t: Term) -> None:
        if isinstance(t, (Var, Param)):
            return
        if isinstance(t, Const):
            if t.name not in sig.constants:
                raise UnknownSymbol(f"constant {t.name} not declared")
            return
        if isinstance(t, Func):
            if t.name not in sig.functions:
                raise UnknownSymbol(f"function {t.name} not declared")
            if len(t.args) != sig.functions[t.name]:
                raise ArityMismatch(f"{t.name} applied to {len(t.args)} arguments")
            for a in t.args:
                check_term(a)
            return
        raise TypeError(f"not a term: {t!r}")

    if isinstance(f, Rel):
        if f.name not in sig.relations:
            raise UnknownSymbol(f"relation {f.name} not declared")
        if len(f.args) != sig.relations[f.name]:
            raise ArityMismatch(f"{f.name} applied to {len(f.args)} arguments")
        for a in f.args:
            check_term(a)
    elif isinstance(f, Eq):
        check_term(f.left)
        check_term(f.right)
    elif isinstance(f, Not):
        validate(f.body, sig)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            validate(p, sig)
    elif isinstance(f, Implies):
        validate(f.left, sig)
        validate(f.right, sig)
    elif isinstance(f, (ForAll, Exists)):
        validate(f.body, sig)
    else:
        raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# Pretty printer (exact inverse of the parser on ASTs)

_LEVEL = {"implies": 1, "or": 2, "and": 3, "unary": 4}


def pretty(f: Formula) -> str:
    return _pp(f, 0)


def _pp_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Param):
        return f"c{t.index}"
    if isinstance(t, Func):
        return f"{t.name}({','.join(_pp_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def _pp(f: Formula, level: int) -> str:
    if isinstance(f, (ForAll, Exists)):
        kw = "forall" if isinstance(f, ForAll) else "exists"
        names = [f.var]
        body = f.body
        while isinstance(body, type(f)):
            names.append(body.var)
            body = body.body
        text = f"{kw} {' '.join(names)}. {_pp(body, 0)}"
        return f"({text})" if level > 0 else text
    if isinstance(f, Implies):
        text = f"{_pp(f.left, _LEVEL['implies'] + 1)} -> {_pp(f.right, 0)}"
        return f"({text})" if level > _LEVEL["implies"] else text
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        text = " | ".join(_pp(p, _LEVEL["or"] + 1) for p in f.parts)
        return f"({text})" if level > _LEVEL["or"] else text
    if isinstance(f, And):
        if not f.parts:
            return "true"
        text = " & ".join(_pp(p, _LEVEL["and"] + 1) for p in f.parts)
        return f"({text})" if level > _LEVEL["and"] else text
    if isinstance(f, Not):
        inner = f.body
        if isinstance(inner, Rel):
            return f"!{_pp(inner, _LEVEL['unary'] + 1)}"
        return f"!({_pp(inner, 0)})"
    if isinstance(f, Rel):
        return f"{f.name}({','.join(_pp_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{_pp_term(f.left)} = {_pp_term(f.right)}"
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# Evaluation

def _eval_term(m: FinStructure, t: Term, env: Mapping[str, int], params: Mapping[int, int] | None) -> int:
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(f"variable {t.name} not bound")
        return env[t.name]
    if isinstance(t, Const):
        return m.constants[t.name]
    if isinstance(t, Param):
        if params is None:
            if t.index >= m.size:
                raise UnboundVariable(f"parameter c{t.index} outside the universe")
            return t.index
        if t.index not in params:
            raise UnboundVariable(f"parameter c{t.index} not bound")
        return params[t.index]
    if isinstance(t, Func):
        return m.functions[t.name][tuple(_eval_term(m, a, env, params) for a in t.args)]
    raise TypeError(f"not a term: {t!r}")


def evaluate(
    m: FinStructure,
    f: Formula,
    env: Mapping[str, int] | None = None,
    params: Mapping[int, int] | None = None,
) -> bool:
    """Standard Tarskian truth; quantifiers range over the full universe.

    env binds free variables; params binds element parameters c<k> (the
    default binds c<k> to element k).
    """
    env = dict(env or {})
    return _eval(m, f, env, params)


def _eval(m, f, env, params) -> bool:
    if isinstance(f, Rel):
        return tuple(_eval_term(m, a, env, params) for a in f.args) in m.relations[f.name]
    if isinstance(f, Eq):
        return _eval_term(m, f.left, env, params) == _eval_term(m, f.right, env, params)
    if isinstance(f, Not):
        return not _eval(m, f.body, env, params)
    if isinstance(f, And):
        return all(_eval(m, p, env, params) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(m, p, env, params) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval(m, f.left, env, params)) or _eval(m, f.right, env, params)
    if isinstance(f, ForAll):
        old = env.get(f.var)
        for v in m.universe:
            env[f.var] = v
            if not _eval(m, f.body, env, params):
                _restore(env, f.var, old)
                return False
        _restore(env, f.var, old)
        return True
    if isinstance(f, Exists):
        old = env.get(f.var)
        for v in m.universe:
            env[f.var] = v
            if _eval(m, f.body, env, params):
                _restore(env, f.var, old)
                return True
        _restore(env, f.var, old)
        return False
    raise TypeError(f"not a formula: {f!r}")


def _restore(env, var, old):
    if old is None:
        env.pop(var, None)
    else:
        env[var] = old


# --------------------------------------------------------------------------
# Theories


@dataclass(frozen=True)
class Theory:
    name: str
    sig: Signature
    sentences: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        for s in self.sentences:
            validate(s, self.sig)
            fv = free_vars(s)
            if fv:
                raise UnboundVariable(f"theory sentence has free variables {sorted(fv)}")

    @staticmethod
    def from_strings(name: str, sig: Signature, texts: Iterable[str]) -> "Theory":
        return Theory(name, sig, tuple(parse_sentence(t, sig) for t in texts))


def theory_union(t1: Theory, t2: Theory, name: str | None = None) -> Theory:
    from .core import sig_union

    sentences = list(t1.sentences)
    for s in t2.sentences:
        if s not in sentences:
            sentences.append(s)
    return Theory(name or f"{t1.name}+{t2.name}", sig_union(t1.sig, t2.sig), tuple(sentences))


def models_theory(m: FinStructure, t: Theory) -> bool:
    """True iff every sentence of t holds in the t-reduct of m."""
    if not t.sig.is_subsignature(m.sig):
        raise NotSubsignature(f"theory signature {t.sig!r} not contained in {m.sig!r}")
    mm = m if m.sig == t.sig else reduct(m, t.sig)
    return all(evaluate(mm, s) for s in t.sentences)


# --------------------------------------------------------------------------
# Syntactic classification

UNIVERSAL = "universal"
EXISTENTIAL = "existential"
INDUCTIVE = "inductive"
OTHER = "other"


def nnf(f: Formula) -> Formula:
    """Negation normal form; implications are rewritten away."""
    if isinstance(f, (Rel, Eq)):
        return f
    if isinstance(f, And):
        return And(tuple(nnf(p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(nnf(p) for p in f.parts))
    if isinstance(f, Implies):
        return Or((nnf(Not(f.left)), nnf(f.right)))
    if isinstance(f, ForAll):
        return ForAll(f.var, nnf(f.body))
    if isinstance(f, Exists):
        return Exists(f.var, nnf(f.body))
    if isinstance(f, Not):
        g = f.body
        if isinstance(g, (Rel, Eq)):
            return f
        if isinstance(g, Not):
            return nnf(g.body)
        if isinstance(g, And):
            return Or(tuple(nnf(Not(p)) for p in g.parts))
        if isinstance(g, Or):
            return And(tuple(nnf(Not(p)) for p in g.parts))
        if isinstance(g, Implies):
            return And((nnf(g.left), nnf(Not(g.right))))
        if isinstance(g, ForAll):
            return Exists(g.var, nnf(Not(g.body)))
        if isinstance(g, Exists):
            return ForAll(g.var, nnf(Not(g.body)))
    raise TypeError(f"not a formula: {f!r}")


def _scan(f: Formula, under_exists: bool) -> tuple[bool, bool, bool]:
    """(has_forall, has_exists, forall_under_exists) for an NNF formula."""
    if isinstance(f, (Rel, Eq)) or (isinstance(f, Not) and isinstance(f.body, (Rel, Eq))):
        return (False, False, False)
    if isinstance(f, (And, Or)):
        hf = he = bad = False
        for p in f.parts:
            a, b, c = _scan(p, under_exists)
            hf, he, bad = hf or a, he or b, bad or c
        return (hf, he, bad)
    if isinstance(f, ForAll):
        a, b, c = _scan(f.body, under_exists)
        return (True, b, c or under_exists)
    if isinstance(f, Exists):
        a, b, c = _scan(f.body, True)
        return (a, True, c)
    raise TypeError(f"unexpected node in NNF: {f!r}")


def classify(f: Formula) -> str:
    """Syntactic class from the NNF shape.

    universal: no existential node; existential: no universal node;
    inductive: no universal node inside an existential scope (the formula
    prenexes to forall*exists*); other: anything else.  The check is
    purely syntactic: a sentence merely equivalent to a universal one
    classifies by its written shape.
    """
    hf, he, bad = _scan(nnf(f), False)
    if not he:
        return UNIVERSAL
    if not hf:
        return EXISTENTIAL
    if not bad:
        return INDUCTIVE
    return OTHER


def is_inductive(f: Formula) -> bool:
    return classify(f) != OTHER


# --------------------------------------------------------------------------
# Diagram literals as formulas

def literal_formula(lit: DiagramLiteral, rename: Mapping[int, Term]) -> Formula:
    """One diagram literal as a formula, with elements mapped through rename."""
    if lit.kind == "rel":
        atom: Formula = Rel(lit.symbol, tuple(rename[x] for x in lit.args))
    elif lit.kind == "fun":
        atom = Eq(Func(lit.symbol, tuple(rename[x] for x in lit.args)), rename[lit.value])
    elif lit.kind == "const":
        atom = Eq(Const(lit.symbol), rename[lit.value])
    else:
        atom = Eq(rename[lit.args[0]], rename[lit.args[1]])
    return atom if lit.positive else Not(atom)


def existentialize(lits: Iterable[DiagramLiteral], keep: Iterable[int]) -> Formula:
    """Existentially close the conjunction of lits over the non-kept elements.

    Elements in keep stay as parameters c<k>; every other element becomes a
    fresh existential variable x1, x2, ... in ascending element order.  The
    result always classifies as existential; the empty set gives "true".
    """
    lits = sorted(set(lits))
    keep = set(keep)
    mentioned: set[int] = set()
    for lit in lits:
        mentioned.update(lit.args)
        if lit.kind in ("fun", "const"):
            mentioned.add(lit.value)
    rename: dict[int, Term] = {e: Param(e) for e in mentioned & keep}
    fresh = sorted(mentioned - keep)
    names = [f"x{i}" for i in range(1, len(fresh) + 1)]
    rename.update({e: Var(n) for e, n in zip(fresh, names)})
    body = conj([literal_formula(lit, rename) for lit in lits]) if lits else TRUE
    for name in reversed(names):
        body = Exists(name, body)
    return body

"""Signatures and finite structures.

Universes are initial segments of the naturals: a structure of size n lives
on {0, ..., n-1}.  All values are immutable after construction and safe to
share; canonicalization is a pure function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    NotBijective,
    NotSubsignature,
    RangeError,
    SymbolClash,
)

Tuple = tuple


def _check_symbol(name: str) -> None:
    if not isinstance(name, str) or not name:
        raise SymbolClash(f"bad symbol name {name!r}")
    if name == "=":
        raise SymbolClash("equality is built into the logic, not declarable")


@dataclass(frozen=True, eq=False)
class Signature:
    """Relation/function/constant symbols with arities.

    Names must be pairwise distinct across the three kinds and arities
    positive; equality is not declarable.
    """

    relations: dict[str, int] = field(default_factory=dict)
    functions: dict[str, int] = field(default_factory=dict)
    constants: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        rels = dict(self.relations)
        funcs = dict(self.functions)
        consts = frozenset(self.constants)
        for name, arity in itertools.chain(rels.items(), funcs.items()):
            _check_symbol(name)
            if not isinstance(arity, int) or arity < 1:
                raise SymbolClash(f"arity of {name} must be a positive integer")
        for name in consts:
            _check_symbol(name)
        seen = set()
        for name in itertools.chain(rels, funcs, consts):
            if name in seen:
                raise SymbolClash(f"symbol {name} declared more than once")
            seen.add(name)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "constants", consts)
        key = (
            tuple(sorted(rels.items())),
            tuple(sorted(funcs.items())),
            tuple(sorted(consts)),
        )
        object.__setattr__(self, "_key", key)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{n}/{a}" for n, a in sorted(self.relations.items())]
        parts += [f"{n}/{a}(fn)" for n, a in sorted(self.functions.items())]
        parts += sorted(self.constants)
        return "Signature{" + ", ".join(parts) + "}"

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(self.relations) | frozenset(self.functions) | self.constants

    @property
    def is_relational(self) -> bool:
        return not self.functions and not self.constants

    def is_subsignature(self, other: "Signature") -> bool:
        return (
            all(other.relations.get(n) == a for n, a in self.relations.items())
            and all(other.functions.get(n) == a for n, a in self.functions.items())
            and self.constants <= other.constants
        )


EMPTY_SIGNATURE = Signature()


def _kind_arity(sig: Signature, name: str):
    if name in sig.relations:
        return ("rel", sig.relations[name])
    if name in sig.functions:
        return ("fun", sig.functions[name])
    if name in sig.constants:
        return ("const", 0)
    return None


def sig_intersect(s1: Signature, s2: Signature) -> Signature:
    """Shared symbols of two signatures; clash if a name changes kind or arity."""
    for name in s1.symbols & s2.symbols:
        if _kind_arity(s1, name) != _kind_arity(s2, name):
            raise SymbolClash(f"symbol {name} declared differently in the two signatures")
    return Signature(
        relations={n: a for n, a in s1.relations.items() if s2.relations.get(n) == a},
        functions={n: a for n, a in s1.functions.items() if s2.functions.get(n) == a},
        constants=s1.constants & s2.constants,
    )


def sig_union(s1: Signature, s2: Signature) -> Signature:
    """Union of declarations; clash if a shared name changes kind or arity."""
    for name in s1.symbols & s2.symbols:
        if _kind_arity(s1, name) != _kind_arity(s2, name):
            raise SymbolClash(f"symbol {name} declared differently in the two signatures")
    return Signature(
        relations={**s1.relations, **s2.relations},
        functions={**s1.functions, **s2.functions},
        constants=s1.constants | s2.constants,
    )


def sig_minus(s1: Signature, s2: Signature) -> Signature:
    """Symbols of s1 not declared in s2 (kind/arity must agree on overlap)."""
    for name in s1.symbols & s2.symbols:
        if _kind_arity(s1, name) != _kind_arity(s2, name):
            raise SymbolClash(f"symbol {name} declared differently in the two signatures")
    return Signature(
        relations={n: a for n, a in s1.relations.items() if n not in s2.relations},
        functions={n: a for n, a in s1.functions.items() if n not in s2.functions},
        constants=s1.constants - s2.constants,
    )


@dataclass(frozen=True, eq=False)
class FinStructure:
    """A finite structure: total interpretations over the universe 0..size-1.

    Every declared symbol gets exactly one interpretation; no undeclared
    symbol may be interpreted.  Structures order by a fixed total key:
    (signature, size, relations, functions, constants), where each relation
    block compares by (tuple count, sorted tuples) so that sparser
    interpretations sort first.
    """

    sig: Signature
    size: int
    relations: dict[str, frozenset[tuple[int, ...]]] = field(default_factory=dict)
    functions: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)
    constants: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise RangeError(f"structure size must be >= 1, got {self.size}")
        n = self.size
        rng = range(n)

        rels: dict[str, frozenset[tuple[int, ...]]] = {}
        for name, arity in self.sig.relations.items():
            if name not in self.relations:
                raise RangeError(f"relation {name} has no interpretation")
            tuples = frozenset(tuple(t) for t in self.relations[name])
            for t in tuples:
                if len(t) != arity:
                    raise RangeError(f"tuple {t} has wrong arity for {name}/{arity}")
                if any(x not in rng for x in t):
                    raise RangeError(f"tuple {t} of {name} leaves the universe")
            rels[name] = tuples
        for name in self.relations:
            if name not in self.sig.relations:
                raise SymbolClash(f"relation {name} interpreted but not declared")

        funcs: dict[str, dict[tuple[int, ...], int]] = {}
        for name, arity in self.sig.functions.items():
            if name not in self.functions:
                raise RangeError(f"function {name} has no interpretation")
            table = {tuple(k): v for k, v in self.functions[name].items()}
            for args, out in table.items():
                if len(args) != arity:
                    raise RangeError(f"input {args} has wrong arity for {name}/{arity}")
                if any(x not in rng for x in args) or out not in rng:
                    raise RangeError(f"entry {args} -> {out} of {name} leaves the universe")
            if len(table) != n ** arity:
                raise RangeError(f"function {name} is not total")
            funcs[name] = table
        for name in self.functions:
            if name not in self.sig.functions:
                raise SymbolClash(f"function {name} interpreted but not declared")

        consts: dict[str, int] = {}
        for name in self.sig.constants:
            if name not in self.constants:
                raise RangeError(f"constant {name} has no interpretation")
            v = self.constants[name]
            if v not in rng:
                raise RangeError(f"constant {name} = {v} leaves the universe")
            consts[name] = v
        for name in self.constants:
            if name not in self.sig.constants:
                raise SymbolClash(f"constant {name} interpreted but not declared")

        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "constants", consts)
        object.__setattr__(self, "_key", self._make_key())
        object.__setattr__(self, "_canon", None)

    def _make_key(self):
        rel_part = tuple(
            (name, len(self.relations[name]), tuple(sorted(self.relations[name])))
            for name in sorted(self.sig.relations)
        )
        fun_part = tuple(
            (name, tuple(v for _, v in sorted(self.functions[name].items())))
            for name in sorted(self.sig.functions)
        )
        const_part = tuple((name, self.constants[name]) for name in sorted(self.sig.constants))
        return (self.sig._key, self.size, rel_part, fun_part, const_part)

    @property
    def order_key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, FinStructure) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other: "FinStructure"):
        return self._key < other._key

    def __repr__(self):
        return f"FinStructure(size={self.size}, sig={self.sig!r})"

    @property
    def universe(self) -> range:
        return range(self.size)

    def rel_holds(self, name: str, args: tuple[int, ...]) -> bool:
        return args in self.relations[name]

    def fn_value(self, name: str, args: tuple[int, ...]) -> int:
        return self.functions[name][args]


def reduct(m: FinStructure, s0: Signature) -> FinStructure:
    """Forget the interpretations of symbols outside s0; same universe."""
    if not s0.is_subsignature(m.sig):
        raise NotSubsignature(f"{s0!r} is not contained in {m.sig!r}")
    return FinStructure(
        sig=s0,
        size=m.size,
        relations={n: m.relations[n] for n in s0.relations},
        functions={n: m.functions[n] for n in s0.functions},
        constants={n: m.constants[n] for n in s0.constants},
    )


def expand(
    m: FinStructure,
    extra: Signature,
    relations: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
    functions: Mapping[str, Mapping[tuple[int, ...], int]] | None = None,
    constants: Mapping[str, int] | None = None,
) -> FinStructure:
    """Add interpretations for the new symbols of `extra`; inverse of reduct."""
    if extra.symbols & m.sig.symbols:
        raise SymbolClash(f"expansion symbols {sorted(extra.symbols & m.sig.symbols)} already declared")
    return FinStructure(
        sig=sig_union(m.sig, extra),
        size=m.size,
        relations={**m.relations, **{n: frozenset(map(tuple, (relations or {})[n])) for n in extra.relations}},
        functions={**m.functions, **{n: dict((functions or {})[n]) for n in extra.functions}},
        constants={**m.constants, **{n: (constants or {})[n] for n in extra.constants}},
    )


def transport(
    m: FinStructure,
    s_delta: Signature,
    source: FinStructure,
    bij: tuple[int, ...],
) -> FinStructure:
    """Carry source's s_delta interpretation onto m's universe along bij.

    bij maps source's universe onto m's universe; afterwards bij is an
    s_delta-isomorphism from reduct(source, s_delta) to the s_delta part
    of the result.
    """
    if not s_delta.is_subsignature(source.sig):
        raise NotSubsignature(f"{s_delta!r} not contained in the source signature")
    bij = tuple(bij)
    if (
        len(bij) != source.size
        or m.size != source.size
        or sorted(bij) != list(range(m.size))
    ):
        raise NotBijective(f"{bij} is not a bijection of a size-{source.size} universe onto a size-{m.size} one")
    return expand(
        m,
        s_delta,
        relations={
            n: {tuple(bij[x] for x in t) for t in source.relations[n]}
            for n in s_delta.relations
        },
        functions={
            n: {
                tuple(bij[x] for x in args): bij[out]
                for args, out in source.functions[n].items()
            }
            for n in s_delta.functions
        },
        constants={n: bij[source.constants[n]] for n in s_delta.constants},
    )


@dataclass(frozen=True, order=True)
class DiagramLiteral:
    """One positive or negative atomic fact about named universe elements.

    kind is one of "rel" (relation atom), "fun" (function equation
    f(args) = value), "eq" (equality between two elements, args = (a, b)),
    "const" (constant symbol equals element, value holds the element).
    Field order makes the natural sort deterministic: relation atoms,
    then function equations, then constant equations, then (in)equalities.
    """

    rank: int
    symbol: str
    args: tuple[int, ...]
    value: int
    positive: bool

    _RANKS = {"rel": 0, "fun": 1, "const": 2, "eq": 3}

    @property
    def kind(self) -> str:
        return {v: k for k, v in self._RANKS.items()}[self.rank]

    @staticmethod
    def rel(symbol: str, args: tuple[int, ...], positive: bool) -> "DiagramLiteral":
        return DiagramLiteral(0, symbol, tuple(args), -1, positive)

    @staticmethod
    def fun(symbol: str, args: tuple[int, ...], value: int, positive: bool) -> "DiagramLiteral":
        return DiagramLiteral(1, symbol, tuple(args), value, positive)

    @staticmethod
    def const(symbol: str, value: int, positive: bool) -> "DiagramLiteral":
        return DiagramLiteral(2, symbol, (), value, positive)

    @staticmethod
    def eq(a: int, b: int, positive: bool) -> "DiagramLiteral":
        return DiagramLiteral(3, "", (min(a, b), max(a, b)), -1, positive)


def atomic_diagram(m: FinStructure, s: Signature, params: Iterable[int]) -> frozenset[DiagramLiteral]:
    """All positive and negative s-atomic facts over the given elements.

    Function and constant atoms whose value falls outside params appear
    only through their negative literals; distinct params contribute one
    inequality literal per unordered pair.
    """
    if not s.is_subsignature(m.sig):
        raise NotSubsignature(f"{s!r} not contained in {m.sig!r}")
    ps = sorted(set(params))
    for p in ps:
        if p not in m.universe:
            raise RangeError(f"parameter {p} outside the universe")
    lits: set[DiagramLiteral] = set()
    for name in s.relations:
        arity = s.relations[name]
        for t in itertools.product(ps, repeat=arity):
            lits.add(DiagramLiteral.rel(name, t, t in m.relations[name]))
    for name in s.functions:
        arity = s.functions[name]
        for args in itertools.product(ps, repeat=arity):
            out = m.functions[name][args]
            for v in ps:
                lits.add(DiagramLiteral.fun(name, args, v, out == v))
    for name in s.constants:
        cv = m.constants[name]
        for v in ps:
            lits.add(DiagramLiteral.const(name, v, cv == v))
    for a, b in itertools.combinations(ps, 2):
        lits.add(DiagramLiteral.eq(a, b, False))
    return frozenset(lits)


def permute(m: FinStructure, perm: tuple[int, ...]) -> FinStructure:
    """Relabel m along perm (perm[i] is the new name of element i)."""
    perm = tuple(perm)
    if sorted(perm) != list(range(m.size)):
        raise NotBijective(f"{perm} is not a permutation of 0..{m.size - 1}")
    return FinStructure(
        sig=m.sig,
        size=m.size,
        relations={
            n: frozenset(tuple(perm[x] for x in t) for t in ts)
            for n, ts in m.relations.items()
        },
        functions={
            n: {tuple(perm[x] for x in args): perm[out] for args, out in tab.items()}
            for n, tab in m.functions.items()
        },
        constants={n: perm[v] for n, v in m.constants.items()},
    )


def _permuted_rel_block(tuples, perm, arity: int):
    if arity == 1:
        return tuple(sorted((perm[t[0]],) for t in tuples))
    if arity == 2:
        return tuple(sorted((perm[a], perm[b]) for a, b in tuples))
    return tuple(sorted(tuple(perm[x] for x in t) for t in tuples))


def _permuted_key(m: FinStructure, perm: tuple[int, ...]):
    """Order key of permute(m, perm), computed without building it."""
    rel_part = tuple(
        (name, len(m.relations[name]),
         _permuted_rel_block(m.relations[name], perm, m.sig.relations[name]))
        for name in sorted(m.sig.relations)
    )
    fun_part = tuple(
        (name, tuple(v for _, v in sorted(
            (tuple(perm[x] for x in args), perm[out])
            for args, out in m.functions[name].items())))
        for name in sorted(m.sig.functions)
    )
    const_part = tuple((name, perm[m.constants[name]]) for name in sorted(m.sig.constants))
    return (m.sig._key, m.size, rel_part, fun_part, const_part)


def canonical_form(m: FinStructure) -> tuple[FinStructure, tuple[int, ...]]:
    """The minimal isomorphic relabeling of m, plus the witnessing permutation.

    Two structures are isomorphic iff their canonical forms are equal.  The
    result is cached on the structure.
    """
    cached = m._canon
    if cached is not None:
        return cached
    best_key = m.order_key
    best_perm = tuple(range(m.size))
    for perm in itertools.permutations(range(m.size)):
        key = _permuted_key(m, perm)
        if key < best_key:
            best_key = key
            best_perm = perm
    best = m if best_perm == tuple(range(m.size)) else permute(m, best_perm)
    result = (best, best_perm)
    object.__setattr__(m, "_canon", result)
    object.__setattr__(best, "_canon", (best, tuple(range(best.size))))
    return result


def are_isomorphic(m1: FinStructure, m2: FinStructure) -> bool:
    if m1.sig != m2.sig or m1.size != m2.size:
        return False
    return canonical_form(m1)[0] == canonical_form(m2)[0]

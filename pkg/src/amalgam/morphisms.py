"""Embeddings between finite structures.

A Morphism is a total map between universes together with the signature it
is checked against.  Embeddings preserve AND reflect relations, commute
with functions, and preserve constants.  Composition is diagrammatic
throughout the package: compose(f, g) applies f first, then g, matching
the use of "alpha o iota" for alpha: C -> A followed by iota: A -> D.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .core import FinStructure, Signature, sig_intersect
from .errors import DomainMismatch, NotSubsignature, RangeError

Map = tuple


@dataclass(frozen=True)
class Morphism:
    dom: FinStructure
    cod: FinStructure
    map: tuple[int, ...]
    over: Signature

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if len(self.map) != self.dom.size:
            raise RangeError(f"map has {len(self.map)} entries for a size-{self.dom.size} domain")
        if any(v not in self.cod.universe for v in self.map):
            raise RangeError("map leaves the codomain universe")

    def __call__(self, x: int) -> int:
        return self.map[x]

    @property
    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    @property
    def is_bijective(self) -> bool:
        return self.is_injective and self.dom.size == self.cod.size

    def image(self) -> frozenset[int]:
        return frozenset(self.map)

    def inverse(self) -> "Morphism":
        from .errors import NotBijective

        if not self.is_bijective:
            raise NotBijective("only bijective morphisms can be inverted")
        inv = [0] * self.cod.size
        for x, y in enumerate(self.map):
            inv[y] = x
        return Morphism(self.cod, self.dom, tuple(inv), self.over)


def identity(m: FinStructure, over: Signature | None = None) -> Morphism:
    return Morphism(m, m, tuple(range(m.size)), m.sig if over is None else over)


def verify_embedding(h: Morphism) -> bool:
    """Check all embedding conditions of h with respect to h.over."""
    over = h.over
    if not (over.is_subsignature(h.dom.sig) and over.is_subsignature(h.cod.sig)):
        raise NotSubsignature("the checked signature must be contained in both endpoint signatures")
    if not h.is_injective:
        return False
    for name, arity in over.relations.items():
        dom_rel = h.dom.relations[name]
        cod_rel = h.cod.relations[name]
        for t in itertools.product(h.dom.universe, repeat=arity):
            if (t in dom_rel) != (tuple(h.map[x] for x in t) in cod_rel):
                return False
    for name, arity in over.functions.items():
        dom_fn = h.dom.functions[name]
        cod_fn = h.cod.functions[name]
        for args in itertools.product(h.dom.universe, repeat=arity):
            if h.map[dom_fn[args]] != cod_fn[tuple(h.map[x] for x in args)]:
                return False
    for name in over.constants:
        if h.map[h.dom.constants[name]] != h.cod.constants[name]:
            return False
    return True


def _extension_ok(dom: FinStructure, cod: FinStructure, over: Signature,
                  partial: list[int], used: list[bool], e: int, v: int) -> bool:
    """Consistency of assigning e -> v given partial on 0..e-1.

    Checks relation atoms both ways, function applications whose support
    became fully assigned, and constants, all restricted to the assigned
    prefix.  Injectivity is enforced by the caller through `used`.
    """
    assigned = range(e + 1)

    def img(x: int) -> int:
        return v if x == e else partial[x]

    for name in over.constants:
        cd = dom.constants[name]
        if cd <= e and img(cd) != cod.constants[name]:
            return False
    for name, arity in over.relations.items():
        dom_rel = dom.relations[name]
        cod_rel = cod.relations[name]
        for t in itertools.product(assigned, repeat=arity):
            if e not in t:
                continue
            if (t in dom_rel) != (tuple(img(x) for x in t) in cod_rel):
                return False
    for name, arity in over.functions.items():
        dom_fn = dom.functions[name]
        cod_fn = cod.functions[name]
        for args in itertools.product(assigned, repeat=arity):
            out = dom_fn[args]
            if out > e:
                continue
            if e not in args and e != out:
                continue
            if img(out) != cod_fn[tuple(img(x) for x in args)]:
                return False
    return True


def enumerate_embeddings(
    dom: FinStructure,
    cod: FinStructure,
    over: Signature | None = None,
    limit: int | None = None,
) -> list[Morphism]:
    """All embeddings dom -> cod over the given signature.

    Backtracking over partial injective maps in domain-element order with
    candidate values ascending, so the output comes out in lexicographic
    order of the map arrays and can be truncated at `limit` while staying
    deterministic.
    """
    if over is None:
        over = sig_intersect(dom.sig, cod.sig)
    if not (over.is_subsignature(dom.sig) and over.is_subsignature(cod.sig)):
        raise NotSubsignature("the checked signature must be contained in both endpoint signatures")
    if limit is not None and limit <= 0:
        return []
    out: list[Morphism] = []
    n, m = dom.size, cod.size
    if n > m:
        return []
    partial = [-1] * n
    used = [False] * m

    def rec(e: int) -> bool:
        if e == n:
            out.append(Morphism(dom, cod, tuple(partial), over))
            return limit is not None and len(out) >= limit
        for v in range(m):
            if used[v]:
                continue
            if not _extension_ok(dom, cod, over, partial, used, e, v):
                continue
            partial[e] = v
            used[v] = True
            stop = rec(e + 1)
            partial[e] = -1
            used[v] = False
            if stop:
                return True
        return False

    rec(0)
    return out


def compose(f: Morphism, g: Morphism) -> Morphism:
    """Diagrammatic composite: apply f, then g."""
    if f.cod != g.dom:
        raise DomainMismatch("compose(f, g) needs f.cod = g.dom")
    return Morphism(f.dom, g.cod, tuple(g.map[v] for v in f.map), sig_intersect(f.over, g.over))


def squares_commute(p: Morphism, q: Morphism, r: Morphism, s: Morphism) -> bool:
    """Pointwise equality of the composites p;q and r;s."""
    left = compose(p, q)
    right = compose(r, s)
    if left.dom != right.dom or left.cod != right.cod:
        raise DomainMismatch("the two composites must share endpoints")
    return left.map == right.map


def automorphisms(m: FinStructure) -> list[Morphism]:
    """All isomorphisms of m onto itself, in lexicographic map order."""
    return enumerate_embeddings(m, m, m.sig)


def iter_isomorphisms(m1: FinStructure, m2: FinStructure) -> Iterator[Morphism]:
    if m1.size != m2.size:
        return
    for h in enumerate_embeddings(m1, m2, sig_intersect(m1.sig, m2.sig)):
        yield h

"""Existential completeness as a bounded-verdict procedure.

A structure is existentially complete in a class when every existential
fact with parameters from it that holds in an extension inside the class
already holds in it.  For finite structures every existential sentence
true in an extension D follows from the existential closure of some
tuple's atomic diagram, so checking diagram sentences for all tuples of
size up to |D| is complete; Verified is therefore only issued when the
bounds cover the whole class, and is always a statement about the bounded
class, never the unbounded notion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classes import ModelClass, contains, enumerate_models, iterate
from .core import FinStructure, atomic_diagram, reduct
from .errors import MembershipError, NotSubsignature
from .logic import Formula, Theory, evaluate, existentialize, models_theory
from .morphisms import Morphism, enumerate_embeddings, identity
from .verdicts import NoneUpTo

VERIFIED = "verified"
REFUTED = "refuted"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class EcCounterexample:
    """A machine-checkable refutation: an embedding into a class member and
    a diagram-derived existential sentence true there but false at home.

    pullback maps the image elements back to the home structure, giving
    the parameter binding under which the sentence is evaluated at home.
    """

    structure: FinStructure
    embedding: Morphism
    literals: frozenset
    sentence: Formula
    pullback: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class EcVerdict:
    status: str
    max_d: int
    max_tuple: int
    counterexample: EcCounterexample | None = None

    def __bool__(self):
        return self.status == VERIFIED


def _realizes(d: FinStructure, e: FinStructure, tau: dict[int, int], params: list[int]) -> bool:
    """Is tau a partial isomorphism from d|params into e (atom truth
    preserved both ways, function values outside params avoided)?"""
    sig = e.sig
    tau_values = set(tau.values())
    for name, arity in sig.relations.items():
        rd = d.relations[name]
        re_ = e.relations[name]
        for t in itertools.product(params, repeat=arity):
            if ((t in rd)) != (tuple(tau[x] for x in t) in re_):
                return False
    for name, arity in sig.functions.items():
        fd = d.functions[name]
        fe = e.functions[name]
        for args in itertools.product(params, repeat=arity):
            out_d = fd[args]
            out_e = fe[tuple(tau[x] for x in args)]
            if out_d in tau:
                if out_e != tau[out_d]:
                    return False
            elif out_e in tau_values:
                return False
    for name in sig.constants:
        cd = d.constants[name]
        ce = e.constants[name]
        if cd in tau:
            if ce != tau[cd]:
                return False
        elif ce in tau_values:
            return False
    return True


def _diagram_pulls_back(d: FinStructure, e: FinStructure, fixed: dict[int, int], params: list[int]) -> bool:
    """Can the atomic configuration of params in d be realized in e with the
    image elements held fixed?"""
    extras = [p for p in params if p not in fixed]
    taken = set(fixed.values())
    candidates = [v for v in e.universe if v not in taken]

    def rec(i: int, tau: dict[int, int], used: set[int]) -> bool:
        if i == len(extras):
            return _realizes(d, e, tau, params)
        for v in candidates:
            if v in used:
                continue
            tau[extras[i]] = v
            used.add(v)
            if rec(i + 1, tau, used):
                tau.pop(extras[i])
                used.discard(v)
                return True
            tau.pop(extras[i])
            used.discard(v)
        return False

    return rec(0, dict(fixed), set())


_EC_CACHE: dict = {}


def is_ec(e: FinStructure, k0: ModelClass, max_d: int, max_tuple: int) -> EcVerdict:
    """Existential completeness of e in k0, decided up to the bounds.

    Verified only when max_d and max_tuple both cover the class's own size
    bound, which makes the diagram check complete for the bounded class;
    Refuted on the first counterexample in canonical order; Unknown when
    the bounds bind first.
    """
    if not contains(k0, e):
        raise MembershipError("the structure must belong to the class it is tested in")
    key = (e, k0, max_d, max_tuple)
    hit = _EC_CACHE.get(key)
    if hit is not None:
        return hit
    sig = k0.signature
    for d in iterate(k0, max_d):
        for emb in enumerate_embeddings(e, d, sig):
            fixed = {emb.map[x]: x for x in e.universe}
            image = sorted(fixed)
            cap = min(max_tuple, d.size)
            for k in range(cap + 1):
                for subset in itertools.combinations(range(d.size), k):
                    params = sorted(set(image) | set(subset))
                    if _diagram_pulls_back(d, e, fixed, params):
                        continue
                    lits = atomic_diagram(d, sig, params)
                    sentence = existentialize(lits, keep=set(image))
                    counter = EcCounterexample(
                        structure=d,
                        embedding=emb,
                        literals=lits,
                        sentence=sentence,
                        pullback=tuple(sorted(fixed.items())),
                    )
                    verdict = EcVerdict(REFUTED, max_d, max_tuple, counter)
                    _EC_CACHE[key] = verdict
                    return verdict
    complete = max_d >= k0.bound and max_tuple >= k0.bound
    verdict = EcVerdict(VERIFIED if complete else UNKNOWN, max_d, max_tuple)
    _EC_CACHE[key] = verdict
    return verdict


def recheck_counterexample(e: FinStructure, c: EcCounterexample) -> bool:
    """A Refuted verdict re-verifies: the sentence holds in the extension
    under the identity parameter binding and fails at home under the
    pullback binding."""
    in_d = evaluate(c.structure, c.sentence)
    in_e = evaluate(e, c.sentence, params=dict(c.pullback))
    return in_d and not in_e


def ec_closure(
    e: FinStructure,
    t: Theory,
    k0: ModelClass,
    max_size: int,
    max_tuple: int,
) -> tuple[FinStructure, Morphism] | NoneUpTo:
    """Smallest model of t above e whose base reduct is existentially
    complete in k0 (smallest size, then canonical order), with the
    embedding over t's full signature."""
    l0 = k0.signature
    if not models_theory(e, t):
        raise MembershipError("the structure must model the theory it is closed under")
    if not contains(k0, reduct(e, l0)):
        raise MembershipError("the structure's base reduct must belong to the base class")
    unknown_seen = False
    if e.size <= max_size:
        own = is_ec(reduct(e, l0), k0, k0.bound, max_tuple)
        if own.status == VERIFIED:
            return e, identity(e, t.sig)
        if own.status == UNKNOWN:
            unknown_seen = True
    for n in range(e.size, max_size + 1):
        for b in enumerate_models(t, n):
            embs = enumerate_embeddings(e, b, t.sig, limit=1)
            if not embs:
                continue
            rb = reduct(b, l0)
            if not contains(k0, rb):
                continue
            v = is_ec(rb, k0, k0.bound, max_tuple)
            if v.status == VERIFIED:
                return b, embs[0]
            if v.status == UNKNOWN:
                unknown_seen = True
    return NoneUpTo(max_size, phase="ec-closure", unknown_encountered=unknown_seen)


@dataclass(frozen=True)
class EcCompatVerdict:
    """Bounded verdict for e.c.-compatibility of a theory with a base class.

    Verified always means "verified for the bounded class at these bounds";
    the genuine notion quantifies over all models.
    """

    status: str
    model_bound: int
    ec_max_size: int
    ec_max_tuple: int
    failing_model: FinStructure | None = None
    phase: str = ""
    bounded: bool = True

    def __bool__(self):
        return self.status == VERIFIED


def check_ec_compatibility(
    t1: Theory,
    k0: ModelClass,
    model_bound: int,
    ec_max_size: int,
    ec_max_tuple: int,
) -> EcCompatVerdict:
    """Both compatibility conditions for every model of t1 up to model_bound:
    the base reduct belongs to k0, and the model extends to one with an
    existentially complete base reduct."""
    l0 = k0.signature
    if not l0.is_subsignature(t1.sig):
        raise NotSubsignature("the base language must be contained in the theory's language")
    unknown_seen = False
    for n in range(1, model_bound + 1):
        for m in enumerate_models(t1, n):
            rm = reduct(m, l0)
            if not contains(k0, rm):
                if k0.kind == "bounded" and rm.size > k0.bound:
                    return EcCompatVerdict(
                        UNKNOWN, model_bound, ec_max_size, ec_max_tuple, m, "reduct"
                    )
                return EcCompatVerdict(
                    REFUTED, model_bound, ec_max_size, ec_max_tuple, m, "reduct"
                )
            res = ec_closure(m, t1, k0, ec_max_size, ec_max_tuple)
            if isinstance(res, NoneUpTo):
                if res.unknown_encountered:
                    unknown_seen = True
                    continue
                return EcCompatVerdict(
                    REFUTED, model_bound, ec_max_size, ec_max_tuple, m, "closure"
                )
    status = UNKNOWN if unknown_seen else VERIFIED
    return EcCompatVerdict(status, model_bound, ec_max_size, ec_max_tuple)

"""Bounded model classes: explicit lists or Mod(T) up to a size bound.

Enumeration produces exactly one canonical representative per isomorphism
class, generated by depth-first assignment of relation atoms, function
table entries and constants.  Partial assignments are pruned with the
universal sentences of the theory (universal sentences are falsified by
substructures, so pruning on a partial assignment is sound for them);
non-universal sentences are checked on completed structures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import FinStructure, Signature, canonical_form
from .errors import SignatureMismatch
from .logic import (
    UNIVERSAL,
    And,
    Const,
    Eq,
    Exists,
    ForAll,
    Formula,
    Func,
    Implies,
    Not,
    Or,
    Param,
    Rel,
    Term,
    Theory,
    Var,
    classify,
    models_theory,
    nnf,
)

# Three-valued evaluation against a partial interpretation ------------------


class _Partial:
    """A partially decided structure: None entries mean undecided."""

    def __init__(self, sig: Signature, size: int):
        self.sig = sig
        self.size = size
        self.rels: dict[str, dict[tuple[int, ...], bool]] = {
            name: {} for name in sig.relations
        }
        self.funcs: dict[str, dict[tuple[int, ...], int]] = {
            name: {} for name in sig.functions
        }
        self.consts: dict[str, int] = {}


def _eval3_term(t: Term, env: dict[str, int], p: _Partial):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Param):
        return t.index if t.index < p.size else None
    if isinstance(t, Const):
        return p.consts.get(t.name)
    if isinstance(t, Func):
        args = []
        for a in t.args:
            v = _eval3_term(a, env, p)
            if v is None:
                return None
            args.append(v)
        return p.funcs[t.name].get(tuple(args))
    raise TypeError(f"not a term: {t!r}")


def _eval3(f: Formula, env: dict[str, int], p: _Partial):
    """Kleene evaluation: True/False only when every completion agrees."""
    if isinstance(f, Rel):
        args = []
        for a in f.args:
            v = _eval3_term(a, env, p)
            if v is None:
                return None
            args.append(v)
        return p.rels[f.name].get(tuple(args))
    if isinstance(f, Eq):
        left = _eval3_term(f.left, env, p)
        right = _eval3_term(f.right, env, p)
        if left is None or right is None:
            return None
        return left == right
    if isinstance(f, Not):
        v = _eval3(f.body, env, p)
        return None if v is None else not v
    if isinstance(f, (And, Or)):
        stop = isinstance(f, Or)
        unknown = False
        for part in f.parts:
            v = _eval3(part, env, p)
            if v is stop:
                return stop
            if v is None:
                unknown = True
        return None if unknown else not stop
    if isinstance(f, Implies):
        return _eval3(Or((Not(f.left), f.right)), env, p)
    if isinstance(f, (ForAll, Exists)):
        stop = isinstance(f, Exists)
        unknown = False
        old = env.get(f.var)
        for v in range(p.size):
            env[f.var] = v
            r = _eval3(f.body, env, p)
            if r is stop:
                _env_restore(env, f.var, old)
                return stop
            if r is None:
                unknown = True
        _env_restore(env, f.var, old)
        return None if unknown else not stop
    raise TypeError(f"not a formula: {f!r}")


def _env_restore(env, var, old):
    if old is None:
        env.pop(var, None)
    else:
        env[var] = old


class _Pruner:
    """Ground instances of the universal sentences, indexed by relation atom.

    Instances whose matrix mentions function or constant terms are kept in
    a separate bucket that is re-checked whenever a function entry or a
    constant is decided.
    """

    def __init__(self, theory: Theory, size: int):
        self.size = size
        self.by_atom: dict[tuple[str, tuple[int, ...]], list[int]] = {}
        self.instances: list[tuple[Formula, dict[str, int]]] = []
        self.dynamic: list[int] = []
        self.static: list[int] = []
        for sentence in theory.sentences:
            if classify(sentence) != UNIVERSAL:
                continue
            matrix, vars_ = self._strip(nnf(sentence))
            for combo in itertools.product(range(size), repeat=len(vars_)):
                env = dict(zip(vars_, combo))
                idx = len(self.instances)
                self.instances.append((matrix, env))
                atoms = self._rel_atoms(matrix, env)
                if atoms is None:
                    self.dynamic.append(idx)
                elif not atoms:
                    self.static.append(idx)
                else:
                    for atom in atoms:
                        self.by_atom.setdefault(atom, []).append(idx)
    @staticmethod
    def _strip(f: Formula) -> tuple[Formula, list[str]]:
        names: list[str] = []
        while isinstance(f, ForAll):
            names.append(f.var)
            f = f.body
        return f, names

    def _rel_atoms(self, f: Formula, env) -> set | None:
        """Relation atoms the ground instance depends on, or None if it
        also depends on function/constant values."""
        out: set = set()

        def walk_term(t: Term) -> bool:
            if isinstance(t, (Func, Const)):
                return False
            return True

        def walk(g: Formula) -> bool:
            if isinstance(g, Rel):
                if not all(walk_term(a) for a in g.args):
                    return False
                args = tuple(env[a.name] if isinstance(a, Var) else a.index for a in g.args)
                out.add((g.name, args))
                return True
            if isinstance(g, Eq):
                return walk_term(g.left) and walk_term(g.right)
            if isinstance(g, Not):
                return walk(g.body)
            if isinstance(g, (And, Or)):
                return all(walk(x) for x in g.parts)
            if isinstance(g, (ForAll, Exists)):
                return False
            raise TypeError(f"unexpected node: {g!r}")

        return out if walk(f) else None

    def check(self, ids, partial: _Partial) -> bool:
        """False as soon as an instance is definitely violated."""
        for idx in ids:
            matrix, env = self.instances[idx]
            if _eval3(matrix, dict(env), partial) is False:
                return False
        return True

    def check_atom(self, name: str, args: tuple[int, ...], partial: _Partial) -> bool:
        return self.check(self.by_atom.get((name, args), ()), partial)

    def check_dynamic(self, partial: _Partial) -> bool:
        return self.check(self.dynamic, partial)

    def check_static(self, partial: _Partial) -> bool:
        return self.check(self.static, partial)


def _labeled_models(theory: Theory, n: int, prune: bool):
    """Depth-first generation of all labeled models of size n."""
    sig = theory.sig
    rel_atoms = [
        (name, t)
        for name in sorted(sig.relations)
        for t in itertools.product(range(n), repeat=sig.relations[name])
    ]
    fn_entries = [
        (name, args)
        for name in sorted(sig.functions)
        for args in itertools.product(range(n), repeat=sig.functions[name])
    ]
    const_names = sorted(sig.constants)
    partial = _Partial(sig, n)
    pruner = _Pruner(theory, n) if prune else None
    results: list[FinStructure] = []
    # With pruning on, every universal sentence has been fully re-checked by
    # the time an assignment completes; only the remaining sentences need a
    # final pass.  Without pruning, everything is checked here.
    residual = Theory(
        theory.name,
        sig,
        tuple(s for s in theory.sentences if not prune or classify(s) != UNIVERSAL),
    )

    def finish():
        m = FinStructure(
            sig=sig,
            size=n,
            relations={
                name: frozenset(t for t, v in partial.rels[name].items() if v)
                for name in sig.relations
            },
            functions={name: dict(partial.funcs[name]) for name in sig.functions},
            constants=dict(partial.consts),
        )
        if models_theory(m, residual):
            results.append(m)

    def assign_consts(i: int):
        if i == len(const_names):
            finish()
            return
        name = const_names[i]
        for v in range(n):
            partial.consts[name] = v
            if pruner is None or pruner.check_dynamic(partial):
                assign_consts(i + 1)
            del partial.consts[name]

    def assign_fns(i: int):
        if i == len(fn_entries):
            assign_consts(0)
            return
        name, args = fn_entries[i]
        for v in range(n):
            partial.funcs[name][args] = v
            if pruner is None or pruner.check_dynamic(partial):
                assign_fns(i + 1)
            del partial.funcs[name][args]

    def assign_rels(i: int):
        if i == len(rel_atoms):
            assign_fns(0)
            return
        name, t = rel_atoms[i]
        for v in (False, True):
            partial.rels[name][t] = v
            if pruner is None or (
                pruner.check_atom(name, t, partial) and pruner.check_dynamic(partial)
            ):
                assign_rels(i + 1)
            del partial.rels[name][t]

    if pruner is not None and not pruner.check_static(partial):
        return results
    assign_rels(0)
    return results


_ENUM_CACHE: dict[tuple[Theory, int, bool], tuple[FinStructure, ...]] = {}


def enumerate_models(t: Theory, n: int, prune: bool = True) -> tuple[FinStructure, ...]:
    """All models of t of size exactly n, one canonical representative per
    isomorphism class, in canonical order."""
    if n < 1:
        raise ValueError("model size must be >= 1")
    key = (t, n, prune)
    hit = _ENUM_CACHE.get(key)
    if hit is not None:
        return hit
    seen: set[FinStructure] = set()
    for labeled in _labeled_models(t, n, prune):
        seen.add(canonical_form(labeled)[0])
    result = tuple(sorted(seen, key=lambda m: m.order_key))
    _ENUM_CACHE[key] = result
    return result


@dataclass(frozen=True, eq=False)
class ModelClass:
    """Either an explicit finite list or Mod(theory) up to max_size.

    Explicit structures are stored in canonical form, deduplicated up to
    isomorphism, sorted canonically.
    """

    kind: str
    structures: tuple[FinStructure, ...] | None = None
    theory: Theory | None = None
    max_size: int | None = None

    def __post_init__(self):
        if self.kind == "explicit":
            canon = sorted(
                {canonical_form(m)[0] for m in (self.structures or ())},
                key=lambda m: m.order_key,
            )
            if not canon:
                raise ValueError("an explicit class needs at least one structure")
            sig = canon[0].sig
            if any(m.sig != sig for m in canon):
                raise SignatureMismatch("explicit class members must share a signature")
            object.__setattr__(self, "structures", tuple(canon))
        elif self.kind == "bounded":
            if self.theory is None or self.max_size is None or self.max_size < 1:
                raise ValueError("a bounded class needs a theory and a positive size bound")
        else:
            raise ValueError(f"unknown class kind {self.kind!r}")

    def __eq__(self, other):
        return isinstance(other, ModelClass) and self._id() == other._id()

    def __hash__(self):
        return hash(self._id())

    def _id(self):
        if self.kind == "explicit":
            return ("explicit", self.structures)
        return ("bounded", self.theory, self.max_size)

    @staticmethod
    def explicit(structures) -> "ModelClass":
        return ModelClass("explicit", structures=tuple(structures))

    @staticmethod
    def bounded(theory: Theory, max_size: int) -> "ModelClass":
        return ModelClass("bounded", theory=theory, max_size=max_size)

    @property
    def signature(self) -> Signature:
        if self.kind == "explicit":
            return self.structures[0].sig
        return self.theory.sig

    @property
    def bound(self) -> int:
        """The class's own size bound: no member is larger."""
        if self.kind == "explicit":
            return max(m.size for m in self.structures)
        return self.max_size


def contains(k: ModelClass, m: FinStructure) -> bool:
    """Membership; explicit classes compare canonical forms."""
    if m.sig != k.signature:
        raise SignatureMismatch(f"{m.sig!r} does not match the class signature {k.signature!r}")
    if k.kind == "explicit":
        return canonical_form(m)[0] in k.structures
    return m.size <= k.max_size and models_theory(m, k.theory)


def iterate(k: ModelClass, max_size: int) -> tuple[FinStructure, ...]:
    """All members of size <= max_size in canonical order (capped by the
    class's own bound)."""
    cap = min(max_size, k.bound)
    if k.kind == "explicit":
        return tuple(m for m in k.structures if m.size <= cap)
    out: list[FinStructure] = []
    for n in range(1, cap + 1):
        out.extend(enumerate_models(k.theory, n))
    return tuple(out)

"""Stock signatures, theories and structure builders used throughout.

These are ordinary library values: posets, linear orders, simple graphs,
bare sets, and posets carrying a unary order-preserving function.
"""

from __future__ import annotations

from .core import EMPTY_SIGNATURE, FinStructure, Signature
from .logic import Theory

POSET_SIG = Signature(relations={"leq": 2})
GRAPH_SIG = Signature(relations={"edge": 2})

POSET_AXIOMS = (
    "forall x. leq(x,x)",
    "forall x y. (leq(x,y) & leq(y,x)) -> x = y",
    "forall x y z. (leq(x,y) & leq(y,z)) -> leq(x,z)",
)


def poset_theory() -> Theory:
    return Theory.from_strings("posets", POSET_SIG, POSET_AXIOMS)


def linear_order_theory() -> Theory:
    return Theory.from_strings(
        "linear-orders", POSET_SIG, POSET_AXIOMS + ("forall x y. leq(x,y) | leq(y,x)",)
    )


def graph_theory() -> Theory:
    return Theory.from_strings(
        "graphs",
        GRAPH_SIG,
        ("forall x. !edge(x,x)", "forall x y. edge(x,y) -> edge(y,x)"),
    )


def pure_set_theory() -> Theory:
    return Theory("sets", EMPTY_SIGNATURE, ())


def unary_predicate_theory() -> Theory:
    return Theory("sets-with-p", Signature(relations={"p": 1}), ())


def loopfree_function_theory() -> Theory:
    """One unary function with no fixed points and no 3-cycles; at sizes
    up to 3 its functional graphs are exactly the 2-colorable ones."""
    sig = Signature(functions={"f": 1})
    return Theory.from_strings(
        "loopfree-fn", sig, ("forall x. !(f(x) = x)", "forall x. !(f(f(f(x))) = x)")
    )


def endomorphism_axiom(rel: str, fn: str, arity: int) -> str:
    """The sentence stating that fn preserves rel."""
    xs = [f"x{i}" for i in range(1, arity + 1)]
    fxs = [f"{fn}({x})" for x in xs]
    return f"forall {' '.join(xs)}. {rel}({','.join(xs)}) -> {rel}({','.join(fxs)})"


def poset_with_endo_theory(fn: str = "f") -> Theory:
    """Posets with one unary function asserted to preserve the order."""
    sig = Signature(relations={"leq": 2}, functions={fn: 1})
    return Theory.from_strings(
        f"posets-with-{fn}", sig, POSET_AXIOMS + (endomorphism_axiom("leq", fn, 2),)
    )


# Structure builders --------------------------------------------------------


def poset_from_pairs(n: int, strict_pairs) -> FinStructure:
    """Poset on 0..n-1 given its strict comparabilities (reflexivity added)."""
    rel = {(i, i) for i in range(n)} | {tuple(p) for p in strict_pairs}
    return FinStructure(POSET_SIG, n, relations={"leq": rel})


def chain_poset(n: int) -> FinStructure:
    return poset_from_pairs(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def antichain_poset(n: int) -> FinStructure:
    return poset_from_pairs(n, [])


def with_unary(m: FinStructure, name: str, outputs) -> FinStructure:
    """Expand m with one unary function given by an output list."""
    from .core import expand

    return expand(
        m,
        Signature(functions={name: 1}),
        functions={name: {(i,): o for i, o in enumerate(outputs)}},
    )

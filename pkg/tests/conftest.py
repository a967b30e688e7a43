import pytest

from amalgam.core import FinStructure, Signature
from amalgam.theories import antichain_poset, chain_poset, poset_theory


@pytest.fixture(scope="session")
def posets():
    return poset_theory()


@pytest.fixture(scope="session")
def chain1():
    return chain_poset(1)


@pytest.fixture(scope="session")
def chain2():
    return chain_poset(2)


@pytest.fixture(scope="session")
def chain3():
    return chain_poset(3)


@pytest.fixture(scope="session")
def antichain2():
    return antichain_poset(2)


def all_binary_structures(n, sig=None):
    """Every structure with one binary relation on n points."""
    import itertools

    sig = sig or Signature(relations={"leq": 2})
    pairs = list(itertools.product(range(n), repeat=2))
    for bits in itertools.product((False, True), repeat=len(pairs)):
        rel = {p for p, b in zip(pairs, bits) if b}
        yield FinStructure(sig, n, relations={"leq": rel})

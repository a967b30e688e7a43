"""Shared verdict values and search bounds.

Every existence claim in this package is decided only up to explicit
bounds; a NoneUpTo answer means "nothing within the bounds", never a
refutation of the unbounded claim.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Bounds:
    """Search bounds shared by the chain, e.c. and witness machinery.

    size_budget defaults to |E| + |F| + 4 at the start of a chain run when
    left unset; max_rounds caps the number of zig-zag rounds.
    """

    max_model_size: int = 4
    max_amalgam_size: int = 4
    max_tuple: int = 4
    max_rounds: int = 8
    size_budget: int | None = None
    quintuple_bound: int = 2

    def as_dict(self) -> dict:
        return {
            "maxModelSize": self.max_model_size,
            "maxAmalgamSize": self.max_amalgam_size,
            "maxTuple": self.max_tuple,
            "maxRounds": self.max_rounds,
            "sizeBudget": self.size_budget,
            "quintupleBound": self.quintuple_bound,
        }


@dataclass(frozen=True)
class NoneUpTo:
    """No object of the requested shape exists within the stated bounds."""

    bound: int
    phase: str = ""
    unknown_encountered: bool = False

    def __bool__(self):
        return False


@dataclass(frozen=True)
class NotYet:
    """A chain has not stabilized at the inspected stage."""

    reason: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Inapplicable:
    """A constructive amalgam's applicability conditions fail."""

    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class ClosureFailure:
    """Closing a pushout broke a required property of the designated relation."""

    reason: str
    pairs: tuple = ()

    def __bool__(self):
        return False


HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

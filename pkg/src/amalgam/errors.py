"""Exception types shared across the package."""


class AmalgamError(Exception):
    """Base class for all errors raised by this package."""


class SymbolClash(AmalgamError):
    """A symbol name is declared twice with incompatible kind or arity."""


class NotSubsignature(AmalgamError):
    """A signature was required to be contained in another one and is not."""


class RangeError(AmalgamError):
    """An interpretation mentions an element outside the universe."""


class NotBijective(AmalgamError):
    """A map required to be a bijection is not one."""


class FormulaSyntaxError(AmalgamError):
    """Unparseable formula text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbol(AmalgamError):
    """A formula or check mentions a symbol the signature does not declare."""


class ArityMismatch(AmalgamError):
    """A symbol is applied to the wrong number of arguments."""


class UnboundVariable(AmalgamError):
    """A variable or element parameter has no binding."""


class SignatureMismatch(AmalgamError):
    """Two values that must share a signature do not."""


class DomainMismatch(AmalgamError):
    """Morphisms cannot be composed or compared: endpoints disagree."""


class MembershipError(AmalgamError):
    """A structure was required to belong to a model class and does not."""


class NotRelational(AmalgamError):
    """An operation needs a purely relational signature."""


class InvalidQuintuple(AmalgamError):
    """The maps of an amalgamation span are not verified embeddings."""


class InvalidCertificate(AmalgamError):
    """An amalgam certificate fails re-verification."""


class InvalidWitness(AmalgamError):
    """A subcompatible-amalgamation witness fails re-verification."""


class WellDefinednessFailure(AmalgamError):
    """Two defining clauses of a glued function disagree on a shared point."""


class InducedRelationConflict(AmalgamError):
    """The two sides of a witness induce different shared-language facts."""


class InapplicableError(AmalgamError):
    """The preconditions of a constructive amalgam are not met."""


class HypothesisFailure(AmalgamError):
    """A theorem driver was invoked with a refuted hypothesis."""

    def __init__(self, hypothesis: str, detail: str = ""):
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)
        self.hypothesis = hypothesis


class VerificationFailure(AmalgamError):
    """Internal bug guard: a result failed its own re-verification."""


class AssertionFailure(AmalgamError):
    """Internal bug guard: a property the theory guarantees did not hold."""


class InputError(AmalgamError):
    """A file or CLI argument could not be interpreted."""

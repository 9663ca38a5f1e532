"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: input problems exit 2, resource caps exit 3,
and searches that come back empty-handed exit 1.
"""


class CofinalError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(CofinalError, ValueError):
    """A precondition or data invariant does not hold."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NotProperSubset(InvalidInput):
    pass


class OutOfDomain(InvalidInput):
    pass


class UnknownRule(InvalidInput):
    pass


class CapExceeded(CofinalError):
    """A configured search-space or enumeration limit was hit."""


class WindowExhausted(CapExceeded):
    """The label window has no room left for the requested construction."""


class WitnessDisagreement(CofinalError):
    """Two witnesses in H give different colors to the same lower set."""

    def __init__(self, x, y1, y2, c1, c2):
        self.x, self.y1, self.y2 = x, y1, y2
        self.colors = (c1, c2)
        super().__init__(f"witnesses {y1} and {y2} above {x} disagree: {c1} vs {c2}")


class ConstructionStuck(CofinalError):
    """A bounded lemma search returned nothing; carries the partial log."""

    def __init__(self, message, log=None, step=None):
        self.log = list(log or [])
        self.step = step
        super().__init__(message)


class VerificationFailure(CofinalError):
    """A certificate failed independent re-verification."""


class ConstraintConflict(CofinalError):
    """Two different colors were requested for the same pair."""

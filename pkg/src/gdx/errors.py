"""Exception hierarchy.

Schema problems (``GameError`` and subclasses) and numerical failures
(``NumericalError`` and subclasses) are kept apart so the CLI can map them
to distinct exit codes.
"""


class GdxError(Exception):
    pass


class GameError(GdxError, ValueError):
    """Invalid game, profile or payoff-space shape."""


class GameFileError(GameError):
    """A game file violates the schema."""


class WalkError(GdxError, ValueError):
    """A profile sequence is not a walk in the preference graph."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"{type(self).__name__} at transition {index}")


class NonAdjacent(WalkError):
    pass


class MissingArc(WalkError):
    pass


class WrongDirection(WalkError):
    pass


class NotSimpleCycle(GdxError, ValueError):
    pass


class ZeroWeightArc(GdxError, ValueError):
    def __init__(self, index: int | None = None):
        self.index = index
        where = "" if index is None else f" at walk position {index}"
        super().__init__(f"arc has zero weight{where}")


class AmbiguousArgmax(GdxError, ValueError):
    pass


class SectionError(GdxError, ValueError):
    """Point is not in the return section of a walk."""


class Deviated(GdxError):
    """A simulated trajectory left the walk it was supposed to follow."""

    def __init__(self, step: int, reason: str = ""):
        self.step = step
        self.reason = reason
        super().__init__(f"trajectory deviated from walk at arc {step}" + (f": {reason}" if reason else ""))


class NumericalError(GdxError, ArithmeticError):
    pass


class StepUnderflow(NumericalError):
    pass


class EigenError(NumericalError):
    pass


class TheoremViolation(NumericalError):
    """A certified sink cycle failed the spectral test; indicates a bug or a degenerate game."""


class RetriesExhausted(GdxError, RuntimeError):
    pass

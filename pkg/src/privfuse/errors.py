"""Exception hierarchy shared by all privfuse modules."""


class PrivfuseError(Exception):
    """Base class for every error raised by this package."""


# -- source elements ---------------------------------------------------------

class InvalidSource(PrivfuseError, ValueError):
    pass


class TotalWeightExceedsOne(InvalidSource):
    pass


class NegativeWeight(InvalidSource):
    pass


class DuplicateLabel(InvalidSource):
    pass


class NotAnOrdering(PrivfuseError, ValueError):
    pass


class LengthMismatch(PrivfuseError, ValueError):
    pass


# -- majorization ------------------------------------------------------------

class NotMajorized(PrivfuseError, ValueError):
    pass


class NotSubstochastic(PrivfuseError, ValueError):
    pass


class NoPerfectMatching(PrivfuseError, ValueError):
    pass


# -- lattice -----------------------------------------------------------------

class NotCommonOrdering(PrivfuseError, ValueError):
    pass


class InconsistentSet(PrivfuseError, ValueError):
    """A join was requested on a set that admits no common ordering."""

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


# -- protocols and machines --------------------------------------------------

class CastingError(PrivfuseError, ValueError):
    pass


class UnknownSubject(PrivfuseError, LookupError):
    pass


class UnknownTag(PrivfuseError, LookupError):
    pass


class DanglingTag(UnknownTag):
    pass


class MalformedStep(PrivfuseError, ValueError):
    pass


class InvalidMachine(PrivfuseError, ValueError):
    pass


class NotDeterministic(PrivfuseError, ValueError):
    pass


# -- scenario files ----------------------------------------------------------

class ScenarioError(PrivfuseError):
    """Anything wrong with a scenario document; maps to exit status 2."""


class ParseError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column


class UnresolvedReference(ScenarioError):
    pass


class InvariantViolation(ScenarioError):
    pass

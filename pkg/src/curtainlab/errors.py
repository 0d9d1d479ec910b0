"""Exception hierarchy shared by every module."""


class CurtainLabError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InputError(CurtainLabError):
    exit_code = 2


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownGenerator(InputError):
    pass


class BudgetExceeded(CurtainLabError):
    exit_code = 3


class HorizonExceeded(CurtainLabError):
    """A query touched vertices outside the exactness radius of a window."""

    exit_code = 2

    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)


class WindowNotCheckable(InputError):
    pass


class DegenerateWall(CurtainLabError):
    pass


class NoMedian(CurtainLabError):
    pass


class NotConvex(InputError):
    pass


class NotGeodesic(InputError):
    pass


class IntervalTooWide(InputError):
    pass


class TooClose(InputError):
    pass


class PartialAction(CurtainLabError):
    """An automorphism was asked for the image of a vertex it cannot reach."""

    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)


class FlipPreconditionFailed(CurtainLabError):
    pass


class ChainBroken(CurtainLabError):
    pass


class NoGrowth(CurtainLabError):
    pass


class SeparationNotAchieved(CurtainLabError):
    exit_code = 3

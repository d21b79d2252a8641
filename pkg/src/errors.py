# src/errors.py
# Version: 1.0.0
# Description: Exception hierarchy shared by the graph, solver, estimator and CLI layers
# Changelog:
# 1.0.0 - Initial implementation


class KirchhoffError(Exception):
    """Base class for every error raised by the centrality toolkit"""


# Graph construction / validation

class NonPositiveWeightError(KirchhoffError, ValueError):
    pass


class SelfLoopError(KirchhoffError, ValueError):
    pass


class EmptyGraphError(KirchhoffError, ValueError):
    pass


class ThetaOutOfRangeError(KirchhoffError, ValueError):
    pass


class UnknownEdgeError(KirchhoffError, LookupError):
    pass


class DisconnectedError(KirchhoffError, ValueError):
    pass


class SameVertexError(KirchhoffError, ValueError):
    pass


# Linear algebra

class DimensionCapError(KirchhoffError):
    pass


class EmptyRetainSetError(KirchhoffError, ValueError):
    pass


class EpsilonOutOfRangeError(KirchhoffError, ValueError):
    pass


class NoConvergenceError(KirchhoffError):
    pass


class BadSpectrumBoundError(KirchhoffError):
    pass


class DimensionMismatchError(KirchhoffError, ValueError):
    pass


class WeightsOutOfRangeError(KirchhoffError, ValueError):
    pass


class SpectrumViolationError(KirchhoffError):
    pass


# Estimators

class CoverageViolationError(KirchhoffError, ValueError):
    pass


class DenominatorUnderflowError(KirchhoffError):
    pass


# Statistics

class EmptyInputError(KirchhoffError, ValueError):
    pass


class ZeroMeanError(KirchhoffError, ValueError):
    pass


# Input parsing

class ParseError(KirchhoffError, ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class DuplicateNodeIdError(ParseError):
    pass

"""Exception hierarchy shared by every module."""


class RegmemError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParams(RegmemError, ValueError):
    pass


# simulation engine
class SimulationError(RegmemError):
    pass


class NoEnabledAction(SimulationError):
    pass


class ActorUnavailable(SimulationError):
    pass


class NonTermination(SimulationError):
    pass


class FailedServerInFingerprint(SimulationError):
    pass


# history checking
class MalformedHistory(RegmemError, ValueError):
    pass


class SearchBudgetExceeded(RegmemError):
    pass


# coding
class SingularSystem(RegmemError, ArithmeticError):
    pass


class InconsistentSymbols(RegmemError, ArithmeticError):
    pass


class FieldTooLarge(RegmemError):
    pass


# protocol contract and adversary
class AssumptionViolation(RegmemError):
    def __init__(self, clause: str, detail: str) -> None:
        super().__init__(f"assumption {clause} violated: {detail}")
        self.clause = clause
        self.detail = detail


class HypothesisViolation(RegmemError):
    pass


class NoFlip(RegmemError):
    pass


class SearchFailed(RegmemError):
    pass

"""Exception hierarchy shared by all modules."""


class MatchboundError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MatchboundError, ValueError):
    """An argument lies outside the domain of the function."""


class ConfigError(MatchboundError, ValueError):
    """Parameters violate a divisibility or range constraint."""


class InfeasibleDecision(MatchboundError):
    """Applying a decision would push some vertex above a matched portion of 1."""


class UnknownEdge(MatchboundError):
    """A decision puts load on an edge that the triggering event did not reveal."""


class EmptySet(MatchboundError, ValueError):
    pass


class BadInitialization(MatchboundError):
    pass


class NonInvertible(MatchboundError):
    """The closed-form potential is not strictly increasing on the grid."""


class SingularDenominator(MatchboundError):
    pass


class NotBipartite(MatchboundError):
    pass


class BudgetExceeded(MatchboundError):
    pass


class StructureViolation(MatchboundError):
    """A structural claim about a generated instance failed.

    ``claim`` is one of ``"bipartite"``, ``"perfect-matching"``,
    ``"divisibility"`` or ``"feasibility"``.
    """

    def __init__(self, claim: str, message: str):
        super().__init__(f"{claim}: {message}")
        self.claim = claim

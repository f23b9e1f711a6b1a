"""Exception hierarchy shared by all modules.

The CLI maps every ``BlaschkeError`` to exit code 3 and prints the class
name, so the names below are part of the public surface.
"""


class BlaschkeError(Exception):
    """Base class for numeric or model failures."""


# map_core
class PoleDerivative(BlaschkeError):
    pass


class DegenerateParameter(BlaschkeError):
    pass


class SolverDivergence(BlaschkeError):
    pass


# circle dynamics
class LowerPeriod(BlaschkeError):
    pass


class RegionMismatch(BlaschkeError):
    pass


class Inconclusive(BlaschkeError):
    pass


class NoSignChange(BlaschkeError):
    pass


# rotation sets
class BudgetExceeded(BlaschkeError):
    pass


class NotInvariant(BlaschkeError):
    pass


class IntegralityViolation(BlaschkeError):
    pass


class UniquenessViolation(BlaschkeError):
    pass


class NotInLambda(BlaschkeError):
    pass


class NoSectorCycle(BlaschkeError):
    pass


class VerificationFailure(BlaschkeError):
    pass


class SymbolOutOfRange(BlaschkeError):
    pass


class LengthTooShort(BlaschkeError):
    pass


# rays
class NoRepellingCycle(BlaschkeError):
    pass


class NotAdjacent(BlaschkeError):
    pass


class RayBudget(BlaschkeError):
    pass


class BasinUndefined(BlaschkeError):
    pass

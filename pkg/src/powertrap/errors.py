"""Exception hierarchy shared by all modules."""


class PowerTrapError(Exception):
    """Base class. ``module`` records where the error was raised."""

    module = "powertrap"


class NonSymmetric(PowerTrapError):
    module = "linalg"


class NonFinite(PowerTrapError):
    module = "linalg"


class RankDeficient(PowerTrapError):
    module = "linalg"


class DimError(PowerTrapError):
    module = "linalg"


class NotPSD(PowerTrapError):
    module = "linalg"


class BadWeights(PowerTrapError):
    module = "covariance"


class NotConcentrating(PowerTrapError):
    module = "covariance"


class NoScaling(PowerTrapError):
    module = "covariance"


class NotInjective(PowerTrapError):
    module = "covariance"


class ModelMismatch(PowerTrapError):
    module = "invariant"


class DegenerateTest(PowerTrapError):
    module = "invariant"


class AllZero(PowerTrapError):
    module = "quadform"


class IntegrationFailure(PowerTrapError):
    module = "quadform"


class EInSpanX(PowerTrapError):
    module = "limits"


class TrivialRegion(PowerTrapError):
    module = "limits"


class IllConditioned(PowerTrapError):
    module = "montecarlo"


class ParseError(PowerTrapError):
    module = "io"


class ShapeError(PowerTrapError):
    module = "io"


class ConditionUnverifiable(PowerTrapError):
    module = "diagnostics"

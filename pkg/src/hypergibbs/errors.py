"""Exception types shared across modules."""


class HyperGibbsError(Exception):
    """Base class for library errors."""


class Degenerate(HyperGibbsError, ValueError):
    """Affinely dependent simplex."""


class GeneralPositionViolation(HyperGibbsError, ValueError):
    """Four or more points on an empty circle."""


class PointNotInConfiguration(HyperGibbsError, KeyError):
    pass


class TooFewPoints(HyperGibbsError, ValueError):
    pass


class TemplateDoesNotFitCell(HyperGibbsError, ValueError):
    pass


class NotAHyperedge(HyperGibbsError, ValueError):
    pass


class StructureMismatch(HyperGibbsError, ValueError):
    pass


class GeometryDegenerate(HyperGibbsError, ValueError):
    pass


class NotConfined(HyperGibbsError, RuntimeError):
    """Range confinement is missing or a horizon escaped the certified region."""


class NegativePartDivergent(HyperGibbsError, OverflowError):
    pass


class IllegalMove(HyperGibbsError, ValueError):
    pass


class TailNotConverged(HyperGibbsError, RuntimeError):
    pass


class ChainNotMixed(HyperGibbsError, RuntimeError):
    pass


class NoFeasibleStart(HyperGibbsError, RuntimeError):
    pass


class UnsupportedDimension(HyperGibbsError, ValueError):
    pass


class UnsupportedModel(HyperGibbsError, ValueError):
    pass


class DivergentSum(HyperGibbsError, OverflowError):
    pass


class ConfigError(HyperGibbsError, ValueError):
    """Malformed run configuration."""

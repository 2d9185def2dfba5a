"""Exception types shared across the package."""


class DiracGeomError(Exception):
    """Base class for all errors raised by diracgeom."""


class TimelikeViolation(DiracGeomError):
    """j_a j^a came out negative beyond tolerance (corrupted input)."""


class DegenerateDensity(DiracGeomError):
    """Invariant density is at or below the degeneracy threshold."""


class NonUnimodular(DiracGeomError):
    """A 2x2 spin matrix does not have unit determinant."""


class SingularTetrad(DiracGeomError):
    pass


class SingularMetric(DiracGeomError):
    pass


class GridTooSmall(DiracGeomError):
    """An axis being differentiated has fewer than five nodes."""


class IllConditioned(DiracGeomError):
    pass


class BranchAmbiguity(DiracGeomError):
    pass


class DomainError(DiracGeomError):
    """Evaluation requested outside mr > 1."""


class NoSignChange(DiracGeomError):
    """Matching function does not change sign over the energy bracket."""


class StiffIntegration(DiracGeomError):
    """Adaptive step control could not meet the error target."""


class BlowUp(DiracGeomError):
    """Field amplitude grew past the caustic threshold during evolution."""

    def __init__(self, msg, t=None, step=None):
        super().__init__(msg)
        self.t = t
        self.step = step


class FixedPointDivergence(DiracGeomError):
    pass


class ConfigError(DiracGeomError):
    """Bad or missing configuration (maps to CLI exit code 2)."""

"""Exception types shared across the package."""


class CalderonLabError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedSupport(CalderonLabError):
    """Field has significant mass outside the support set required by an operator."""


class TooFine(CalderonLabError):
    """Requested shift scale t is below the resolvable grid scale."""


class EllipticityViolation(CalderonLabError):
    """Conductivity or Beltrami coefficient violates its ellipticity bound."""


class SolverFailure(CalderonLabError):
    """A linear system was not solved to the required tolerance."""


class DegreeTooHigh(CalderonLabError):
    """Requested boundary-harmonic degree is not resolvable on the mesh."""


class ShapeMismatch(CalderonLabError):
    """Operands have incompatible truncation degree or pairing convention."""


class DegenerateLayers(CalderonLabError):
    """Radial layer description is empty, non-increasing or otherwise unusable."""


class SupportViolation(CalderonLabError):
    """Difference of coefficients is not supported in the stated subdomain."""


class NoConvergence(CalderonLabError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ZeroFrequency(CalderonLabError):
    """The spectral parameter k must be nonzero for this operation."""


class ZeroOnGrid(CalderonLabError):
    """A field that must not vanish has a (near-)zero on the grid."""


class BadExponents(CalderonLabError):
    """Lebesgue exponents violate the admissibility relations of the estimate."""


class BadOrdering(CalderonLabError):
    """Radii list violates the required R_n < R_{n+1}^2 ordering."""

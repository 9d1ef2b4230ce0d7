"""Exception hierarchy shared across the package."""


class CosshellError(Exception):
    """Base class for all package errors."""


class ConfigError(CosshellError):
    """Invalid run configuration (maps to CLI exit code 2)."""


class DegenerateMetric(CosshellError):
    """First fundamental form fell below the configured determinant floor."""


class OutOfDomain(CosshellError):
    """Evaluation point lies outside the closed chart domain."""


class StepUnderflow(CosshellError):
    """Finite-difference step shrank below 1e-10 of the domain extent."""


class NotSPD(CosshellError):
    """Matrix handed to the SPD square root is not positive definite."""


class SingularF(CosshellError):
    """Polar decomposition input has non-positive determinant."""


class GridTooCoarse(CosshellError):
    """Discretization grid is below the 8x8 minimum."""


class NoConvergence(CosshellError):
    """Iterative solver exhausted its iteration budget."""


class VariantMismatchWarning(UserWarning):
    """Conditional model evaluated while symmetry-constraint residuals are large."""

"""Exception and warning types shared across the package."""


class PSDViolation(ValueError):
    """Coefficient matrix has an eigenvalue below the PSD tolerance."""


class NegativeEntries(ValueError):
    """Coefficient matrix has negative entries where nonnegativity is required."""


class UnsupportedExponent(ValueError):
    """Spectral exponent outside the cutoff-agnostic window for the control sequence."""


class PoleError(UnsupportedExponent):
    """Dephasing coefficient diverges at the requested exponent."""


class StepTooCoarse(ValueError):
    """Integration or sampling step does not resolve the fastest dephasing rate."""


class GridTooCoarse(ValueError):
    """Frequency grid does not resolve the filter function support."""


class CutoffRegimeWarning(UserWarning):
    """Evaluation leaves the regime where the infrared cutoff is irrelevant."""


class SingularInformation(UserWarning):
    """Fisher information matrix is singular; a pseudo-inverse was used."""

"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid run configuration, recipe name, or basis bound."""


class DomainError(ValueError):
    """Physical argument outside its allowed range."""


class TruncationError(RuntimeError):
    """Population reached the Fock-space ceiling; the truncated basis is too small."""


class StrongCouplingError(RuntimeError):
    """Dressed-level assignment is ambiguous; perturbation theory has broken down."""


class DegeneratePulseError(ValueError):
    """Requested pulse references a pair with zero Rabi rate."""


class UnidentifiableError(ValueError):
    """Readout mixture weight cannot be inferred from the data."""


class FitError(RuntimeError):
    """Nonlinear fit failed to converge or the data are degenerate."""

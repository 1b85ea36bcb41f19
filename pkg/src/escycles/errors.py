"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration (CLI exit code 2)."""


class BasisMismatch(ValueError):
    """Arithmetic attempted between objects tagged with different bases."""


class NumericalGuardError(ArithmeticError):
    """A numerical safety check tripped (CLI exit code 3)."""


class ZeroJumpAmplitude(NumericalGuardError):
    """The collapse operator annihilates the state, so no jump can be applied."""


class TraceDrift(NumericalGuardError):
    """Density-matrix trace left its tolerance band during integration."""

"""Exception types shared across the package."""


class ErgomeanError(Exception):
    """Base class for all package errors."""


class SpaceMismatchError(ErgomeanError):
    """Operands live in incompatible spaces (dimension or representation)."""


class NonFiniteError(ErgomeanError):
    """A NaN or infinity tried to escape a public operation."""


class UseDykstraError(ErgomeanError):
    """Exact projection requested on an intersection; use dykstra_project."""


class NotInSetError(ErgomeanError):
    """A point claimed to lie in a set does not."""


class DomainError(ErgomeanError):
    """A mapping was applied to a point outside its domain."""


class InvalidAddressError(ErgomeanError):
    """A semigroup element address does not match the action's structure."""


class DivergingOrbitError(ErgomeanError):
    """Orbit or averaging sequence exceeded the blow-up threshold."""


class NotAttractiveError(ErgomeanError):
    """Pipeline precondition failed: the candidate is not attractive."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(ErgomeanError):
    """Bad experiment configuration; carries a JSON pointer to the culprit."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer

    def __str__(self):
        base = super().__str__()
        return f"{self.pointer}: {base}" if self.pointer else base

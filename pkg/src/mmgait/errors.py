"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage problems exit 2, data
integrity problems exit 3, numerical failures exit 4.
"""


class MmgaitError(Exception):
    """Base class for package errors."""


class ConfigError(MmgaitError):
    """Malformed configuration or invalid parameter combination."""


class ContractError(MmgaitError):
    """An operation was called with inputs violating its contract."""


class EmptyRosterError(ContractError):
    """A subject roster of size zero was requested."""


class DurationError(ContractError):
    """Walk duration too short to cover the minimum number of gait cycles."""

    def __init__(self, duration: float, minimum: float):
        self.duration = duration
        self.minimum = minimum
        super().__init__(
            f"duration {duration:.3f}s too short; need >= {minimum:.3f}s (two gait cycles)"
        )


class CfarWindowError(ConfigError):
    """CFAR training+guard window does not fit in the profile."""


class NoTargetError(MmgaitError):
    """Tracker received zero detections in every frame."""


class SizeError(ContractError):
    """Input array too small for the requested transform."""


class IntegrityError(MmgaitError):
    """A dataset file referenced by a manifest is missing."""


class CorruptionError(IntegrityError):
    """A dataset file exists but does not match its manifest checksum."""


class SplitError(MmgaitError):
    """Manifest does not cover the days/domains a split requires."""


class OrchestrationError(MmgaitError):
    """Training stages invoked out of order (e.g. stage 2 without stage 1)."""


class NumericalError(MmgaitError):
    """Training produced a non-finite loss."""

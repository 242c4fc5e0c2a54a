"""Exception types shared across the package."""


class ThermopinnError(Exception):
    """Base class for all package-specific errors."""


class ArchitectureError(ThermopinnError):
    """Invalid layer layout, or parameters that do not match one."""


class NumericalOverflowError(ThermopinnError):
    """A non-finite value appeared during network evaluation."""

    def __init__(self, layer: int, message: str = ""):
        self.layer = layer
        super().__init__(message or f"non-finite values produced by layer {layer}")


class ConfigurationError(ThermopinnError):
    """Invalid or incomplete run configuration."""


class CheckpointError(ThermopinnError):
    """Checkpoint file is unreadable, truncated, or incompatible."""

"""Exception types for the depth-map GAN."""


class DepthGanError(Exception):
    """Base class for depthgan errors."""


class FileFormatError(DepthGanError):
    """A .hwke/.hwkd/manifest file is malformed."""


class ConfigError(DepthGanError):
    """A model or training configuration is invalid."""


class TrainingError(DepthGanError):
    """Training hit a non-recoverable state (NaN/Inf loss)."""

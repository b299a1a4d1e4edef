"""Exception types shared across the package."""


class CceadError(Exception):
    """Base class for all package errors."""


class DimensionError(CceadError):
    """Tensor shapes are incompatible with the requested operation."""


class ContractError(CceadError):
    """An operation was called outside its contract (e.g. non-scalar loss)."""


class NonFiniteError(CceadError):
    """A tensor contains NaN or Inf where finite values are required."""


class EncodingError(CceadError):
    """Text cannot be encoded under the active vocabulary/config."""


class VocabBuildError(CceadError):
    """Vocabulary construction failed (e.g. empty corpus)."""


class PairingError(CceadError):
    """Noisy/clean corpora are misaligned."""


class ConfigError(CceadError):
    """Invalid configuration value or file."""


class EstimationError(CceadError):
    """Noise-model estimation had no usable input."""


class CheckpointError(CceadError):
    """Checkpoint file is missing, malformed, or incompatible."""

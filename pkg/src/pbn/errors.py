"""Exception hierarchy shared by all pbn modules."""


class PbnError(Exception):
    """Base class for all library errors."""


class DomainError(PbnError):
    """A value lies outside the support of the relevant density."""


class ParameterError(PbnError):
    """A natural parameter is outside its admissible range."""


class RangeError(PbnError):
    """A target value lies outside the image of a monotone function."""


class ModeError(PbnError):
    """A sampling mode was requested that the layer cannot honor."""


class SamplingFailure(PbnError):
    """No saddle point exists for the requested feature value.

    Carries the final Newton residual (and, when raised by a network
    operation, the index of the failing layer) for diagnostics.
    """

    def __init__(self, message, residual=None, layer_index=None):
        super().__init__(message)
        self.residual = residual
        self.layer_index = layer_index


class SolverFailure(PbnError):
    """An inner linear or nonlinear solve broke down."""

    def __init__(self, message, layer_index=None):
        super().__init__(message)
        self.layer_index = layer_index


class DimensionError(PbnError):
    """Shapes of two operands do not agree."""


class ConfigError(PbnError):
    """A configuration value is invalid or inconsistent."""


class FormatError(PbnError):
    """A serialized container is malformed.  Carries the byte offset."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TooShort(PbnError):
    """An input waveform is shorter than one analysis frame."""


class TooFewSamples(PbnError):
    """A class has too few events to build the requested folds."""


class AlignmentError(PbnError):
    """Two score tables do not cover the same events."""


class CacheMiss(PbnError):
    """A sweep was asked to re-score events whose components were never cached."""


class EmptyBatch(PbnError):
    """A training batch contains no samples."""


class AllFailed(PbnError):
    """Every candidate in a batch or class set failed."""


class ClassificationError(PbnError):
    """No class produced a finite score for an event."""


class TrainingDiverged(PbnError):
    """Training hit a non-finite loss and no recovery checkpoint exists."""

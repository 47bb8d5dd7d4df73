"""Exception and warning types shared across the simulator."""


class SimError(Exception):
    """Base class for all pnnsim errors."""


class InvalidInputError(SimError, ValueError):
    """Non-finite or otherwise malformed value passed to a model."""


class InvalidParamsError(SimError, ValueError):
    """Parameter record violates its invariants."""


class ChannelMismatchError(SimError, ValueError):
    """Operation combined optical signals with incompatible wavelengths."""


class ActuatorLimitError(SimError, ValueError):
    """Requested drive exceeds a device's configured actuation range."""


class NetlistError(SimError, ValueError):
    """Netlist is structurally invalid (bad topology, dangling reference)."""


class ConfigError(SimError, ValueError):
    """Experiment or run configuration is invalid."""


class ConvergenceError(SimError, RuntimeError):
    """An iterative solve failed to converge.

    Carries the residual and, for transient steps, the simulation time at
    which the failure occurred.
    """

    def __init__(self, message, residual=None, time=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.time = time
        self.iterations = iterations


class CalibrationError(SimError, RuntimeError):
    """Weight-bank calibration could not be completed."""


class CalibrationRangeError(CalibrationError):
    """Sweep range does not contain the feature being searched for."""


class CalibrationQualityError(CalibrationError):
    """Calibration data fails a quality check (e.g. non-monotone segment)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class WeightRangeError(SimError, ValueError):
    """Requested weight lies outside the calibrated [-1, +1] domain."""


class ModelExtrapolationWarning(UserWarning):
    """A behavioral model was evaluated outside its fitted validity window."""

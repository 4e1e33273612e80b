class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigurationError(SimulationError):
    """An invalid world, run configuration or config file.

    Args:
        message: Human readable description
        run_index: Index of the batch run that failed, if any
    """

    def __init__(self, message, run_index=None):
        self.run_index = run_index
        if run_index is not None:
            message = f"run {run_index}: {message}"
        super().__init__(message)


class ConfigFileError(ConfigurationError):
    """Config text that failed to parse or validate.

    `errors` holds (line, message) pairs; line is None when the problem
    is not tied to one line (e.g. a missing section).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"line {line}: {msg}" if line else msg for line, msg in self.errors]
        super().__init__("; ".join(lines))


class StructuralError(SimulationError):
    """A result set that does not have the shape an emitter requires."""

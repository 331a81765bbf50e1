"""Exception hierarchy. The CLI maps each class to an exit code."""


class ProtofairError(Exception):
    exit_code = 1


class ConfigError(ProtofairError, ValueError):
    exit_code = 1


class DataError(ProtofairError, ValueError):
    exit_code = 2


class NumericalError(ProtofairError, FloatingPointError):
    exit_code = 3

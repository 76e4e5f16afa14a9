class SchrodsimError(Exception):
    pass


class DimensionError(SchrodsimError, ValueError):
    pass


class ParameterError(SchrodsimError, ValueError):
    pass


class PreconditionError(SchrodsimError, ValueError):
    pass


class DegenerateStateError(SchrodsimError, ZeroDivisionError):
    pass


class NumericalError(SchrodsimError, ArithmeticError):
    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class EvolutionOverflowError(SchrodsimError, OverflowError):
    pass


class ResourceError(SchrodsimError, MemoryError):
    pass


class ConfigError(ParameterError):
    def __init__(self, key: str, reason: str) -> None:
        super().__init__(f"{key}: {reason}")
        self.key = key

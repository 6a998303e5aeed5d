import functools
import logging

logger = logging.getLogger(__name__)


class PricingEngineError(Exception):
    exit_code = 1


class ConfigurationError(PricingEngineError, ValueError):
    exit_code = 2


class StoreMismatchError(ConfigurationError):
    ...


class NumericalRejectionError(PricingEngineError):
    exit_code = 3


class NonParabolicError(NumericalRejectionError):
    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class UnstableSchemeError(NumericalRejectionError):
    def __init__(self, message: str, admissible_n_tau: int | None = None):
        super().__init__(message)
        self.admissible_n_tau = admissible_n_tau


class NumericalCorruptionError(NumericalRejectionError):
    ...


class DataError(PricingEngineError):
    exit_code = 4


class NoSolutionError(DataError):
    ...


class DegenerateModelError(DataError):
    ...


def handle_cli_errors(func):
    """Map engine errors raised by a CLI command onto exit codes"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            result = func(*args, **kwargs)
        except PricingEngineError as e:
            logger.error(f"[{func.__name__}] {e.__class__.__name__}: {e}")
            return e.exit_code
        return 0 if result is None else int(result)

    return wrapper

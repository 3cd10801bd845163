import sys
from typing import Callable

from multiband_bcs.exceptions import BcsError, ConfigurationError, NumericalError
from multiband_bcs.schemas.base import StatusResponseModel


handlers: dict[type[BcsError], Callable[[BcsError], int]] = {}


def exception_handler(exc_class: type[BcsError]):
    def decorator(func: Callable[[BcsError], int]):
        handlers[exc_class] = func
        return func

    return decorator


def _report(exc: BcsError) -> None:
    print(StatusResponseModel(status="Error", message=exc.eng, ru=exc.ru).model_dump_json(), file=sys.stderr)


@exception_handler(ConfigurationError)
def configuration_error_handler(exc: ConfigurationError) -> int:
    _report(exc)
    return 1


@exception_handler(NumericalError)
def numerical_error_handler(exc: NumericalError) -> int:
    _report(exc)
    return 2


def handle(exc: BcsError) -> int:
    """Exit status from the handler registered for the closest class in the exception's MRO"""
    for cls in type(exc).__mro__:
        if cls in handlers:
            return handlers[cls](exc)
    _report(exc)
    return 1

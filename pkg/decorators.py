from collections.abc import Callable
from functools import wraps
from typing import Any

import numpy as np


def configure_experiment_decorator(
    func: Callable[..., dict[str, Any]],
) -> Callable[..., dict[str, Any]]:
    """Let a defaults function be overridden with ``(key, value)`` pairs."""

    @wraps(func)
    def wrapper(*args: tuple[str, Any]) -> dict[str, Any]:
        return func(**dict(args))

    return wrapper


def complex_arrays_decorator[R](func: Callable[..., R]) -> Callable[..., R]:
    """Coerce list, tuple and ndarray arguments to complex128 arrays."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> R:
        new_list = list(map(as_complex_array, args))
        new_dict = {key: as_complex_array(value) for key, value in kwargs.items()}
        return func(*new_list, **new_dict)

    return wrapper


def as_complex_array(value: object) -> object:
    if isinstance(value, np.ndarray | list | tuple):
        return np.array(value, dtype=np.complex128)
    return value

import logging
from collections.abc import Callable

PACKAGE_LOGGER = "schrodsim"


def get_logger(
    formatter: Callable[[str, str], str], level: int = logging.INFO
) -> Callable[[str, str], None]:
    """Closure logging ``formatter(first, second)`` on the package logger."""
    package_logger = logging.getLogger(PACKAGE_LOGGER)

    def log(first: str, second: str) -> None:
        package_logger.log(level, "%s", formatter(first, second))

    return log


def colon_delimit(first: str, second: str) -> str:
    return f"{first}: {second}"


def dash_delimit(first: str, second: str) -> str:
    return f"{first} - {second}"


def log_parameters(*args: object, **kwargs: object) -> None:
    """Record run parameters: positional ones numbered, keywords sorted by name."""
    package_logger = logging.getLogger(PACKAGE_LOGGER)
    for i, arg in enumerate(args, start=1):
        package_logger.info("%d. %s", i, arg)

    for key, value in sorted(kwargs.items()):
        package_logger.info("* %s: %s", key, value)

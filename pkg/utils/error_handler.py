"""Error handling utilities for the Urysohn toolkit."""
import logging
import sys
from fractions import Fraction
from functools import wraps
from typing import Any, Callable, Dict, Optional, Type, TypeVar

# Type variable for generic function typing
T = TypeVar('T')


class MetricToolkitError(Exception):
    """Base exception class for all toolkit errors.

    ``status_code`` is also the exit status the CLI reports for the error.
    ``details`` carries the witness (labels, values, intervals) so callers
    and the CLI can render it without parsing the message.
    """

    def __init__(self, message: str, status_code: int = 1, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.status_code = status_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(MetricToolkitError):
    """Raised when there's a configuration error."""
    pass


class FormatError(MetricToolkitError):
    """Raised when a text input does not follow its file format."""

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        details: Dict[str, Any] = {}
        if line is not None:
            details['line'] = line
        if source is not None:
            details['source'] = source
        super().__init__(message, details=details)


def handle_error(
    exception_type: Type[Exception] = Exception,
    message: Optional[str] = None,
    status_code: int = 1,
    log_error: bool = True,
    reraise: bool = True
) -> Callable:
    """
    A decorator to turn foreign exceptions into toolkit errors.

    Toolkit errors pass through untouched.

    Args:
        exception_type: The type of exception to catch
        message: Custom error message (defaults to exception message)
        status_code: Exit status to associate with the error
        log_error: Whether to log the error
        reraise: Whether to re-raise the exception after handling
    """
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            try:
                return func(*args, **kwargs)
            except MetricToolkitError:
                raise
            except exception_type as e:
                error_msg = message or str(e)
                error_details = {
                    'function': func.__name__,
                    'error_type': e.__class__.__name__,
                }

                if log_error:
                    logging.getLogger(func.__module__).error(
                        "Error in %s: %s",
                        func.__name__,
                        error_msg,
                        exc_info=True
                    )

                if reraise:
                    raise MetricToolkitError(
                        message=error_msg,
                        status_code=getattr(e, 'status_code', status_code),
                        details=error_details
                    ) from e
                return None
        return wrapper
    return decorator


def log_exception(logger: logging.Logger) -> Callable:
    """Decorator to log exceptions with traceback."""
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            try:
                return func(*args, **kwargs)
            except MetricToolkitError as e:
                logger.debug("%s in %s: %s", type(e).__name__, func.__name__, e.message)
                raise
            except Exception as e:
                logger.exception(f"Exception in {func.__name__}: {str(e)}")
                raise
        return wrapper
    return decorator


def _format_detail(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_detail(v) for v in value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def render_error(error: Exception) -> str:
    """Render an error as the one-line diagnostic written to stderr."""
    if not isinstance(error, MetricToolkitError):
        error = MetricToolkitError(str(error), details={'type': type(error).__name__})

    text = f"{type(error).__name__}: {error.message}"
    if error.details:
        witness = " ".join(
            f"{key}={_format_detail(value)}" for key, value in error.details.items()
            if key != 'partial'
        )
        if witness:
            text += f" [{witness}]"
    return text


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Set up logging configuration for command-line runs."""
    handlers: list = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )

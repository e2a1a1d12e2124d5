import os
import logging
from pathlib import Path
from typing import Tuple
from dotenv import load_dotenv

from utils.error_handler import ConfigurationError

logger = logging.getLogger(__name__)


def load_environment() -> None:
    """Load environment variables from .env file."""
    env_path = Path(__file__).parent / '.env'
    if not env_path.exists():
        logger.debug("No .env file found. Using system environment variables.")
        return
    try:
        load_dotenv(env_path)
    except Exception as e:
        logger.warning(f"Failed to load .env file: {e}. Using system environment variables.")


def _int_setting(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}", details={'variable': name})


def _suffix_setting(name: str, default: str) -> Tuple[str, str]:
    raw = os.getenv(name, default)
    parts = [part.strip() for part in raw.split(",")]
    if len(parts) != 2 or not all(parts) or parts[0] == parts[1]:
        raise ConfigurationError(
            f"{name} must be two distinct non-empty suffixes separated by a comma, got {raw!r}",
            details={'variable': name}
        )
    return parts[0], parts[1]


# Load environment variables
load_environment()

# File Paths
BASE_DIR: Path = Path(__file__).parent.absolute()
LOG_DIR: Path = Path(os.getenv("URYSOHN_LOG_DIR", str(BASE_DIR / "logs")))

# Logging Configuration
LOG_LEVEL: str = os.getenv("URYSOHN_LOG_LEVEL", "INFO").upper()
LOG_TO_FILE: bool = os.getenv("URYSOHN_LOG_TO_FILE", "0").lower() in ("1", "true", "yes")

# Construction budgets
POINT_BUDGET: int = _int_setting("URYSOHN_POINT_BUDGET", 10000)
SEARCH_NODE_LIMIT: int = _int_setting("URYSOHN_SEARCH_NODE_LIMIT", 20000)
DEFAULT_ROUNDS: int = _int_setting("URYSOHN_DEFAULT_ROUNDS", 64)

# Generator defaults
DEFAULT_GRID_Q: int = _int_setting("URYSOHN_GRID_Q", 1)
DEFAULT_GRID_MAX: int = _int_setting("URYSOHN_GRID_MAX", 3)
DEFAULT_SEED: int = _int_setting("URYSOHN_SEED", 0)

# Amalgamation naming
AMALGAM_SUFFIXES: Tuple[str, str] = _suffix_setting("URYSOHN_AMALGAM_SUFFIXES", ".1,.2")


def validate_config() -> None:
    """Validate that all numeric settings are in range."""
    positive = {
        'URYSOHN_POINT_BUDGET': POINT_BUDGET,
        'URYSOHN_SEARCH_NODE_LIMIT': SEARCH_NODE_LIMIT,
        'URYSOHN_DEFAULT_ROUNDS': DEFAULT_ROUNDS,
        'URYSOHN_GRID_Q': DEFAULT_GRID_Q,
        'URYSOHN_GRID_MAX': DEFAULT_GRID_MAX,
    }
    bad = [name for name, value in positive.items() if value < 1]
    if bad:
        raise ConfigurationError(f"Settings must be positive: {', '.join(bad)}", details={'variables': bad})
    if not 0 <= DEFAULT_SEED < 2 ** 64:
        raise ConfigurationError("URYSOHN_SEED must fit in 64 unsigned bits", details={'variable': 'URYSOHN_SEED'})
    if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ConfigurationError(f"Unknown log level {LOG_LEVEL!r}", details={'variable': 'URYSOHN_LOG_LEVEL'})


# Validate configuration
if __name__ == "__main__":
    try:
        validate_config()
        logger.info("Configuration is valid")
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        raise

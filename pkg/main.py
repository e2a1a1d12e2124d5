"""
Urysohn toolkit - command-line entry point.

Configures logging from the environment and hands over to the click group
in :mod:`cli`.
"""
import logging
import sys

import config
from utils.error_handler import ConfigurationError, render_error, setup_logging

logger = logging.getLogger(__name__)


def main() -> int:
    """Main entry point for the application."""
    setup_logging(config.LOG_LEVEL)
    try:
        config.validate_config()
    except ConfigurationError as e:
        print(render_error(e), file=sys.stderr)
        return 1

    # Import here so logging is configured before module loggers are created
    from cli import cli
    try:
        cli.main(prog_name="urysohn-toolkit")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

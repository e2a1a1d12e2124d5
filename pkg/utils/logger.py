import logging
from datetime import datetime

import config


def setup_logger(name):
    """
    Configure and return a module logger.

    Console output is left to the root configuration (see
    ``utils.error_handler.setup_logging``); a timestamped file handler is
    attached only when file logging is enabled in the configuration.

    Args:
        name (str): Name of the logger (usually __name__)

    Returns:
        logging.Logger: Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, config.LOG_LEVEL, logging.INFO))

    if config.LOG_TO_FILE and not logger.handlers:  # Avoid adding handlers multiple times
        config.LOG_DIR.mkdir(parents=True, exist_ok=True)
        log_file = config.LOG_DIR / f"{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        ))
        logger.addHandler(file_handler)

    return logger

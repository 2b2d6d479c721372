import logging
import sys
from pathlib import Path
from typing import Optional, Union

LOGGER_NAME = "robust_unmt"


def setup_logger(name: str = LOGGER_NAME, level: Union[int, str] = logging.INFO,
                 log_file: Optional[Union[str, Path]] = None) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler)
               for h in logger.handlers):
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if log_file is not None:
        log_path = Path(log_file).resolve()
        known = {getattr(h, "baseFilename", None) for h in logger.handlers}
        if str(log_path) not in known:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path)
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

    return logger


def get_logger(component: str) -> logging.Logger:
    """Child of the package logger; configured once by setup_logger."""
    return logging.getLogger(f"{LOGGER_NAME}.{component}")

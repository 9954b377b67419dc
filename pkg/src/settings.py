from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import cached_property
from pathlib import Path
import logging.config
from typing import Dict, Any


class Settings(BaseSettings):
    # APP CONFIG
    APP_NAME: str = "gbu-lab"
    DEBUG: bool = False
    NUMBER_OF_WORKERS: int = 2

    # OUTPUTS
    OUTPUT_DIR: str = "runs"
    LOG_FILE: str = "gbu-lab.log"

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8")

    @cached_property
    def output_path(self) -> Path:
        return Path(self.OUTPUT_DIR)


settings: Settings = Settings()


def build_logging_config(debug: bool, log_file: str) -> Dict[str, Any]:
    """
    Builds the dictConfig payload used by the command line entry point.

    Args:
        debug (bool): Emit DEBUG records (per-snapshot solver progress) when True.
        log_file (str): Path of the appended log file.

    Returns:
        Dict[str, Any]: A logging.config.dictConfig compatible dictionary.
    """
    level = "DEBUG" if debug else "INFO"
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {"format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s"},
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "formatter": "standard",
                "level": level,
            },
            "file": {
                "class": "logging.FileHandler",
                "formatter": "standard",
                "filename": log_file,
                "mode": "a",
                "level": level,
            },
        },
        "root": {
            "handlers": ["console", "file"],
            "level": level,
        },
    }


LOGGING_CONFIG = build_logging_config(settings.DEBUG, settings.LOG_FILE)


def setup_logging() -> None:
    logging.config.dictConfig(LOGGING_CONFIG)

# src/utils/logger.py
# Version: 1.1.0
# Description: Custom logger configuration
# Changelog:
# 1.1.0 - Version filter so the shared format never lacks its field; idempotent setup
# 1.0.0 - Initial implementation

import os
import logging
from logging.handlers import RotatingFileHandler

from src import __version__

LOG_FORMAT = '%(asctime)s - v%(version)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class VersionFilter(logging.Filter):
    """Stamps every record with the package version"""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, 'version'):
            record.version = __version__
        return True


class CustomLogger:
    VERSION = "1.1.0"

    def __init__(self, name: str, config: dict):
        """Initialize custom logger"""
        self.name = name
        self.config = config
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        """Setup and configure logger"""
        logger = logging.getLogger(self.name)
        logger.setLevel(str(self.config.get('level', 'INFO')).upper())

        # Drop handlers from an earlier setup of the same logger
        for handler in list(logger.handlers):
            if getattr(handler, '_kcent_handler', False):
                logger.removeHandler(handler)
                handler.close()

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        version_filter = VersionFilter()

        console_handler = logging.StreamHandler()
        self._attach(logger, console_handler, formatter, version_filter)

        log_file = self.config.get('file_path', 'logs/kcent.log')
        if log_file:
            directory = os.path.dirname(log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=int(self.config.get('max_size', 10485760)),
                backupCount=int(self.config.get('backup_count', 5))
            )
            self._attach(logger, file_handler, formatter, version_filter)

        return logger

    @staticmethod
    def _attach(logger: logging.Logger, handler: logging.Handler,
                formatter: logging.Formatter, version_filter: logging.Filter) -> None:
        handler.setFormatter(formatter)
        handler.addFilter(version_filter)
        handler._kcent_handler = True
        logger.addHandler(handler)

    def get_logger(self) -> logging.Logger:
        """Get configured logger"""
        return self.logger

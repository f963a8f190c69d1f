import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

ROOT_LOGGER_NAME = 'psgoldbach'


class PsgLogger:
    def __init__(self, log_dir: Optional[Path] = None, max_log_files=10,
                 console_level: str = "WARNING", log_to_file: bool = True):
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.max_log_files = max_log_files
        self.file_handler = None
        self.console_handler = None
        self.setup_logging(console_level, log_to_file)

    def setup_logging(self, console_level: str = "WARNING", log_to_file: bool = True):
        """Setup logging with a timestamped file and a stderr console handler"""
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        logger = logging.getLogger(ROOT_LOGGER_NAME)
        logger.setLevel(logging.DEBUG)
        logger.propagate = False

        if self.console_handler is None:
            # StreamHandler defaults to stderr, which keeps stdout clean for results
            self.console_handler = logging.StreamHandler()
            self.console_handler.setFormatter(formatter)
            logger.addHandler(self.console_handler)
        self.console_handler.setLevel(getattr(logging, console_level.upper(), logging.WARNING))

        if log_to_file and self.file_handler is None and self.log_dir is not None:
            try:
                self.log_dir.mkdir(parents=True, exist_ok=True)
                timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
                log_file = self.log_dir / f"psg_{timestamp}.log"
                self.file_handler = logging.FileHandler(log_file, encoding='utf-8')
                self.file_handler.setFormatter(formatter)
                self.file_handler.setLevel(logging.DEBUG)
                logger.addHandler(self.file_handler)
                self.cleanup_old_logs()
            except OSError as e:
                logger.warning(f"File logging disabled: {e}")
        elif not log_to_file and self.file_handler is not None:
            logger.removeHandler(self.file_handler)
            self.file_handler.close()
            self.file_handler = None

        return logger

    def cleanup_old_logs(self):
        """Remove old log files, keeping only the most recent ones"""
        log_files = list(self.log_dir.glob("psg_*.log"))
        if len(log_files) > self.max_log_files:
            log_files.sort(key=lambda x: x.stat().st_mtime, reverse=True)
            for old_log in log_files[self.max_log_files:]:
                try:
                    old_log.unlink()
                except OSError:
                    pass

    def get_logger(self, name):
        """Get a logger instance for a specific module"""
        return logging.getLogger(f'{ROOT_LOGGER_NAME}.{name}')


_default_logger: Optional[PsgLogger] = None


def default_logger() -> PsgLogger:
    """The shared PsgLogger, configured from the settings file on first use"""
    global _default_logger
    if _default_logger is None:
        # importing src.core.config runs src.core, whose modules call get_logger again
        from ..core.config import config_manager
        if _default_logger is None:
            settings = config_manager.settings
            log_dir = config_manager.get_logs_dir() if settings.log_to_file else None
            _default_logger = PsgLogger(log_dir=log_dir,
                                        max_log_files=settings.max_log_files,
                                        console_level=settings.log_level,
                                        log_to_file=settings.log_to_file)
    return _default_logger


def get_logger(name):
    """Convenience function to get a logger"""
    return default_logger().get_logger(name)


def configure_logging(level: str, log_to_file: bool):
    """Re-apply handler levels, e.g. after the CLI has read its settings"""
    psg_logger = default_logger()
    if log_to_file and psg_logger.log_dir is None:
        from ..core.config import config_manager
        psg_logger.log_dir = config_manager.get_logs_dir()
    psg_logger.setup_logging(level, log_to_file)

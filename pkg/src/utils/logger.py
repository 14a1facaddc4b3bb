"""
Logging configuration for the traveling-wave solver and its diagnostics
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from loguru import logger

_configured = False


class InterceptHandler(logging.Handler):
    """Intercept standard logging and redirect to loguru"""

    def emit(self, record):
        # Get corresponding Loguru level if it exists
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Find caller from where originated the logged message
        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            if frame.f_back is None:
                break
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def _json_format(record) -> str:
    payload = {
        "timestamp": record["time"].isoformat(),
        "level": record["level"].name,
        "logger": record["name"],
        "function": record["function"],
        "line": record["line"],
        "message": record["message"],
        "extra": record.get("extra", {}),
    }
    # loguru formats the returned string again, so braces must be escaped
    return json.dumps(payload, default=str).replace("{", "{{").replace("}", "}}") + "\n"


def configure_logging(log_level: str = "INFO", log_file: Optional[str] = None,
                      json_logs: bool = False) -> None:
    """Install the console sink and, when requested, file and JSON sinks.

    Calling it again replaces the previous sinks, so the CLI can apply the
    user's level after modules have already bound their loggers.
    """
    global _configured

    logger.remove()

    logger.add(
        sys.stderr,
        level=log_level,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
               "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        colorize=True,
        backtrace=True,
        diagnose=False,
    )

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path,
            level=log_level,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            rotation="100 MB",
            retention="10 days",
            backtrace=True,
            diagnose=False,
        )
        if json_logs:
            logger.add(
                log_path.with_suffix(".json"),
                level=log_level,
                format=_json_format,
                rotation="100 MB",
                retention="30 days",
            )

    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    _configured = True


def setup_logger(name: str, log_level: str = "INFO", log_file: Optional[str] = None):
    """Return the shared loguru logger bound to a module name.

    The first call installs a default console sink; later calls only bind.
    """
    if not _configured:
        configure_logging(log_level, log_file)
    return logger.bind(module=name)


def log_step_progress(t: float, t_max: float, n: int, dt: float, max_p: float) -> None:
    """Log solver progress"""
    logger.bind(type="solver_progress", t=t, step=n, dt=dt, max_p=max_p).info(
        f"t={t:.4f}/{t_max:.4f} step={n} dt={dt:.3e} max_p={max_p:.6f}"
    )


def log_run_summary(label: str, verdicts: dict, duration: float) -> None:
    """Log the verdict line of an experiment"""
    summary = " ".join(f"{key}={value}" for key, value in verdicts.items())
    logger.bind(type="run_summary", label=label, duration_seconds=duration, **verdicts).info(
        f"Run {label} finished in {duration:.2f}s: {summary}"
    )


class LoggedOperation:
    """Context manager for logging operations with timing"""

    def __init__(self, operation_name: str, **kwargs):
        self.operation_name = operation_name
        self.kwargs = kwargs
        self.start_time = None
        self.duration = 0.0
        self.logger = logger

    def __enter__(self):
        self.start_time = datetime.now()
        self.logger.bind(operation=self.operation_name, **self.kwargs).info(
            f"Starting operation: {self.operation_name}"
        )
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = (datetime.now() - self.start_time).total_seconds()
        success = exc_type is None

        log_data = {
            "operation": self.operation_name,
            "duration_seconds": self.duration,
            "success": success,
            **self.kwargs,
        }

        if exc_val:
            log_data["error"] = str(exc_val)
            log_data["error_type"] = exc_type.__name__ if exc_type else None

        level = "ERROR" if not success else "INFO"
        message = f"Operation {self.operation_name} completed in {self.duration:.2f}s"
        if not success:
            message += f" with error: {exc_val}"

        self.logger.bind(**log_data).log(level, message)

        return False  # Don't suppress exceptions

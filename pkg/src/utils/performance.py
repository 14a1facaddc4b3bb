"""
Wall-clock timing of solver and analysis phases
"""

import functools
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict

from .logger import setup_logger

logger = setup_logger(__name__)


@dataclass
class OperationStats:
    """Accumulated timing for one named operation"""
    total_calls: int = 0
    failed_calls: int = 0
    total_duration: float = 0.0
    max_duration: float = 0.0

    @property
    def avg_duration(self) -> float:
        return self.total_duration / self.total_calls if self.total_calls else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_calls": self.total_calls,
            "failed_calls": self.failed_calls,
            "total_duration": self.total_duration,
            "avg_duration": self.avg_duration,
            "max_duration": self.max_duration,
        }


class PerformanceMonitor:
    """Collects per-operation timings; slow operations are logged"""

    def __init__(self, slow_threshold: float = 60.0):
        self.slow_threshold = slow_threshold
        self.metrics: Dict[str, OperationStats] = {}
        self._lock = threading.Lock()

    def record(self, operation_name: str, duration: float, success: bool = True) -> None:
        with self._lock:
            stats = self.metrics.setdefault(operation_name, OperationStats())
            stats.total_calls += 1
            stats.total_duration += duration
            stats.max_duration = max(stats.max_duration, duration)
            if not success:
                stats.failed_calls += 1

        if duration > self.slow_threshold:
            logger.warning(f"Slow operation detected: {operation_name} took {duration:.2f}s")

    def track_performance(self, operation_name: str) -> Callable:
        """Decorator to track operation performance"""
        def decorator(func):
            @functools.wraps(func)
            def wrapper(*args, **kwargs):
                start = time.perf_counter()
                try:
                    result = func(*args, **kwargs)
                except Exception:
                    self.record(operation_name, time.perf_counter() - start, success=False)
                    raise
                self.record(operation_name, time.perf_counter() - start)
                return result

            return wrapper

        return decorator

    def get_metrics(self) -> Dict[str, Dict[str, Any]]:
        """Get performance metrics"""
        with self._lock:
            return {name: stats.to_dict() for name, stats in self.metrics.items()}

    def reset_metrics(self) -> None:
        with self._lock:
            self.metrics.clear()


performance_monitor = PerformanceMonitor()

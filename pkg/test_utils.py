"""
Tests for settings, error mapping, timing and logged operations
"""

import re
from pathlib import Path

import pytest

import src
from src.utils.config import RuntimeSettings
from src.utils.error_handler import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_FAILURE,
    EXIT_OK,
    AdmissibilityError,
    BoundaryContactError,
    CFLViolationError,
    ConfigError,
    EmptyLadderError,
    ErrorHandler,
    NumericalInstabilityError,
    StencilRangeError,
    cli_error_handler,
    exit_code_for,
)
from src.utils.logger import LoggedOperation
from src.utils.performance import PerformanceMonitor


@pytest.mark.unit
class TestRuntimeSettings:
    """Environment-driven process settings"""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("PMEWAVE_LOG_LEVEL", raising=False)
        settings = RuntimeSettings(_env_file=None)
        assert settings.log_level == "INFO"
        assert settings.output_dir == "runs"
        assert settings.progress_fraction == 0.1

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("PMEWAVE_LOG_LEVEL", "debug")
        monkeypatch.setenv("PMEWAVE_OUTPUT_DIR", "elsewhere")
        settings = RuntimeSettings(_env_file=None)
        assert settings.log_level == "DEBUG"
        assert settings.output_dir == "elsewhere"

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            RuntimeSettings(_env_file=None, log_level="chatty")

    def test_ensure_output_dir(self, tmp_path):
        target = tmp_path / "a" / "b"
        assert RuntimeSettings(_env_file=None).ensure_output_dir(str(target)) == target
        assert target.is_dir()


@pytest.mark.unit
class TestErrorMapping:
    """Exit codes and the CLI wrapper"""

    def test_config_error_carries_line(self):
        error = ConfigError("bad value", line=7, key="m")
        assert str(error) == "line 7: bad value"
        assert (error.line, error.key) == (7, "m")
        assert str(ConfigError("bad value")) == "bad value"

    @pytest.mark.parametrize("error,code", [
        (ConfigError("x"), EXIT_CONFIG_ERROR),
        (AdmissibilityError("x", key="c"), EXIT_CONFIG_ERROR),
        (FileNotFoundError("x"), EXIT_CONFIG_ERROR),
        (ValueError("x"), EXIT_CONFIG_ERROR),
        (NumericalInstabilityError("x"), EXIT_NUMERICAL_FAILURE),
        (CFLViolationError("x"), EXIT_NUMERICAL_FAILURE),
        (BoundaryContactError("x"), EXIT_NUMERICAL_FAILURE),
        (EmptyLadderError("x"), EXIT_CONFIG_ERROR),
        (ZeroDivisionError("x"), EXIT_NUMERICAL_FAILURE),
        (RuntimeError("x"), EXIT_NUMERICAL_FAILURE),
    ])
    def test_exit_codes(self, error, code):
        assert exit_code_for(error) == code

    def test_stencil_range_is_an_index_error(self):
        assert issubclass(StencilRangeError, IndexError)

    def test_handle_error_report(self):
        report = ErrorHandler().handle_error(AdmissibilityError("c too small", line=3, key="c"), {"step": 1})
        assert report["exit_code"] == EXIT_CONFIG_ERROR
        assert report["error_type"] == "AdmissibilityError"
        assert report["message"] == "line 3: c too small"
        assert len(report["error_id"]) == 8

    def test_cli_error_handler(self):
        @cli_error_handler()
        def succeeds():
            return None

        @cli_error_handler(debug_mode=True)
        def fails():
            raise NumericalInstabilityError("NaN at step 12")

        assert succeeds() == EXIT_OK
        assert fails() == EXIT_NUMERICAL_FAILURE


@pytest.mark.unit
class TestPerformanceMonitor:
    """Per-operation timing"""

    def test_tracks_calls_and_failures(self):
        monitor = PerformanceMonitor()

        @monitor.track_performance("phase")
        def phase(fail: bool):
            if fail:
                raise ValueError("boom")
            return 3

        assert phase(False) == 3
        with pytest.raises(ValueError):
            phase(True)

        stats = monitor.get_metrics()["phase"]
        assert stats["total_calls"] == 2
        assert stats["failed_calls"] == 1
        assert stats["max_duration"] >= stats["avg_duration"] >= 0.0

        monitor.reset_metrics()
        assert monitor.get_metrics() == {}

    def test_slow_operations_still_recorded(self):
        monitor = PerformanceMonitor(slow_threshold=0.0)
        monitor.record("solve", 1.5)
        assert monitor.get_metrics()["solve"]["total_duration"] == 1.5


@pytest.mark.unit
class TestPackageLayout:
    """Modules inside src import each other relatively"""

    def test_no_absolute_package_imports(self):
        root = Path(src.__file__).parent
        offenders = [str(path.relative_to(root)) for path in sorted(root.rglob("*.py"))
                     if re.search(r"^\s*(from|import) src\b", path.read_text(encoding="utf-8"), re.MULTILINE)]
        assert offenders == []


@pytest.mark.unit
class TestLoggedOperation:
    """Timed log context"""

    def test_duration_recorded(self):
        with LoggedOperation("trial", label="x") as operation:
            pass
        assert operation.duration >= 0.0

    def test_exceptions_propagate(self):
        with pytest.raises(KeyError):
            with LoggedOperation("trial"):
                raise KeyError("missing")

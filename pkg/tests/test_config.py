"""Tests for settings, validators and the exception hierarchy."""

import logging

import pytest
from pydantic import ValidationError as PydanticValidationError

from wiretap_workbench.config import (
    DEFAULT_BA_TOLERANCE,
    DEFAULT_DENSE_CAP,
    DEFAULT_RESTARTS,
    WorkbenchSettings,
    get_settings,
)
from wiretap_workbench.exceptions import (
    AlphabetMismatchError,
    CapExceededError,
    ConfigurationError,
    ConvergenceError,
    InvariantViolationError,
    RunRecordError,
    ValidationError,
    WorkbenchError,
)
from wiretap_workbench.validators import Validators


class TestSettings:
    """Environment-backed settings."""

    def test_defaults(self, monkeypatch):
        for name in ("WORKBENCH_THREADS", "WORKBENCH_CAP_DENSE", "LOG_LEVEL"):
            monkeypatch.delenv(name, raising=False)
        settings = WorkbenchSettings(_env_file=None)
        assert settings.cap_dense == DEFAULT_DENSE_CAP
        assert settings.optimizer_restarts == DEFAULT_RESTARTS
        assert settings.ba_tolerance == DEFAULT_BA_TOLERANCE
        assert settings.threads == 1

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("WORKBENCH_THREADS", "4")
        monkeypatch.setenv("LOG_LEVEL", "debug")
        settings = WorkbenchSettings(_env_file=None)
        assert settings.threads == 4
        assert settings.log_level == "DEBUG"

    def test_keyword_overrides(self, tmp_path):
        settings = get_settings(out_dir=str(tmp_path), cap_subsets=10)
        assert settings.cap_subsets == 10
        assert settings.get_out_dir() == tmp_path

    @pytest.mark.parametrize("field", ["threads", "cap_dense", "cap_subsets", "ba_max_iter"])
    def test_rejects_non_positive(self, field):
        with pytest.raises(PydanticValidationError):
            get_settings(**{field: 0})

    def test_rejects_unknown_log_level(self):
        with pytest.raises(PydanticValidationError):
            get_settings(log_level="CHATTY")

    def test_rejects_bad_tolerance(self):
        with pytest.raises(PydanticValidationError):
            get_settings(ba_tolerance=2.0)

    def test_setup_logging(self, tmp_path, mocker):
        basic_config = mocker.patch("logging.basicConfig")
        settings = get_settings(out_dir=str(tmp_path), run_log=True, log_level="WARNING")
        settings.setup_logging()

        assert basic_config.call_args.kwargs["level"] == logging.WARNING
        run_logger = logging.getLogger("wiretap_workbench.runs")
        assert any(
            getattr(h, "baseFilename", "").endswith("runs.log") for h in run_logger.handlers
        )
        for handler in list(run_logger.handlers):
            run_logger.removeHandler(handler)
            handler.close()

    def test_setup_logging_twice_keeps_one_run_handler(self, tmp_path, mocker):
        mocker.patch("logging.basicConfig")
        settings = get_settings(out_dir=str(tmp_path), run_log=True, log_level="WARNING")
        settings.setup_logging()
        settings.setup_logging()

        run_logger = logging.getLogger("wiretap_workbench.runs")
        run_handlers = [
            h for h in run_logger.handlers if getattr(h, "baseFilename", "").endswith("runs.log")
        ]
        assert len(run_handlers) == 1
        for handler in list(run_logger.handlers):
            run_logger.removeHandler(handler)
            handler.close()


class TestValidators:
    """Shared input validation."""

    def test_weights_negative_names_index(self):
        with pytest.raises(ValidationError, match="index 1"):
            Validators.validate_weights([0.5, -0.1])

    def test_weights_all_zero(self):
        with pytest.raises(ValidationError, match="zero"):
            Validators.validate_weights([0.0, 0.0])

    def test_weights_not_finite(self):
        with pytest.raises(ValidationError, match="index 0"):
            Validators.validate_weights([float("nan"), 1.0])

    def test_unit_interval(self):
        assert Validators.validate_unit_interval(0.0, "alpha") == 0.0
        with pytest.raises(ValidationError, match="alpha"):
            Validators.validate_unit_interval(1.5, "alpha")

    def test_renyi_order(self):
        assert Validators.validate_renyi_order(2) == 2.0
        with pytest.raises(ValidationError, match="limit"):
            Validators.validate_renyi_order(1.0)

    def test_blocklength_and_count(self):
        assert Validators.validate_blocklength(0, minimum=0) == 0
        with pytest.raises(ValidationError):
            Validators.validate_blocklength(0)
        with pytest.raises(ValidationError):
            Validators.validate_count(True, "trials")
        with pytest.raises(ValidationError):
            Validators.validate_count(0, "trials")

    def test_seed(self):
        assert Validators.validate_seed(7) == 7
        with pytest.raises(ValidationError):
            Validators.validate_seed(-1)

    def test_file_path(self, tmp_path):
        target = tmp_path / "a.json"
        target.write_text("{}")
        assert Validators.validate_file_path(str(target)) == target
        with pytest.raises(ValidationError, match="not found"):
            Validators.validate_file_path(str(tmp_path / "missing.json"))

    def test_parse_grid(self):
        grid = Validators.parse_grid("0:1:0.05")
        assert len(grid) == 21
        assert grid[0] == 0.0
        assert grid[-1] == 1.0
        assert grid[2] == 0.1

    def test_parse_grid_rejects_garbage(self):
        with pytest.raises(ValidationError):
            Validators.parse_grid("0:1")
        with pytest.raises(ValidationError):
            Validators.parse_grid("1:0:0.1")

    def test_parse_range(self):
        assert Validators.parse_range("4..8") == [4, 5, 6, 7, 8]
        assert Validators.parse_range("4..14:2") == [4, 6, 8, 10, 12, 14]
        with pytest.raises(ValidationError):
            Validators.parse_range("8..4")

    def test_summarize_for_logging(self):
        import numpy as np

        assert "shape=(100,)" in Validators.summarize_for_logging(np.zeros(100))
        assert "list of 20 items" in Validators.summarize_for_logging(list(range(20)))


class TestExceptions:
    """Error codes and process exit codes."""

    @pytest.mark.parametrize(
        "error, code, exit_code",
        [
            (WorkbenchError("x"), "GENERAL_ERROR", 1),
            (ValidationError("x"), "VALIDATION_ERROR", 2),
            (AlphabetMismatchError(("0",), ("1",)), "ALPHABET_MISMATCH", 2),
            (ConfigurationError("x", ["a: b"]), "CONFIG_ERROR", 2),
            (CapExceededError("thing", 10, 5), "CAP_EXCEEDED", 3),
            (ConvergenceError("solver", 10, 0.1), "CONVERGENCE_ERROR", 4),
            (InvariantViolationError("a <= b", 2.0, 1.0), "INVARIANT_VIOLATION", 1),
            (RunRecordError("x"), "RUN_RECORD_ERROR", 1),
        ],
    )
    def test_codes(self, error, code, exit_code):
        assert error.error_code == code
        assert error.exit_code == exit_code
        assert isinstance(error, WorkbenchError)

    def test_cap_exceeded_hint(self):
        error = CapExceededError("subsets", 100, 10, "use sampled mode")
        assert "use sampled mode" in error.message
        assert error.requested == 100
        assert error.cap == 10

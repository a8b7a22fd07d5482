"""
Configuration management for the wiretap workbench.
"""

import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings

DEFAULT_DENSE_CAP = 2**24
DEFAULT_SUBSET_CAP = 10**6
DEFAULT_CODEBOOK_CAP = 2**20
DEFAULT_RESTARTS = 64
DEFAULT_OPTIMIZER_MAX_ITER = 10**4
DEFAULT_BA_TOLERANCE = 1e-9
DEFAULT_BA_MAX_ITER = 10**5
DEFAULT_ALPHA_GRID_POINTS = 512

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class WorkbenchSettings(BaseSettings):
    """Process-wide settings; per-run parameters live in ExperimentConfig."""

    # Logging settings
    log_level: str = Field("INFO", validation_alias="LOG_LEVEL")
    log_file: Optional[str] = Field(None, validation_alias="LOG_FILE")
    run_log: bool = Field(True, validation_alias="WORKBENCH_RUN_LOG")

    # Output settings
    out_dir: str = Field("./runs", validation_alias="WORKBENCH_OUT_DIR")

    # Compute settings
    threads: int = Field(1, validation_alias="WORKBENCH_THREADS")
    cap_dense: int = Field(DEFAULT_DENSE_CAP, validation_alias="WORKBENCH_CAP_DENSE")
    cap_subsets: int = Field(
        DEFAULT_SUBSET_CAP, validation_alias="WORKBENCH_CAP_SUBSETS"
    )
    cap_codebook: int = Field(
        DEFAULT_CODEBOOK_CAP, validation_alias="WORKBENCH_CAP_CODEBOOK"
    )

    # Solver settings
    optimizer_restarts: int = Field(
        DEFAULT_RESTARTS, validation_alias="WORKBENCH_RESTARTS"
    )
    optimizer_max_iter: int = Field(
        DEFAULT_OPTIMIZER_MAX_ITER, validation_alias="WORKBENCH_OPTIMIZER_MAX_ITER"
    )
    ba_tolerance: float = Field(
        DEFAULT_BA_TOLERANCE, validation_alias="WORKBENCH_BA_TOLERANCE"
    )
    ba_max_iter: int = Field(DEFAULT_BA_MAX_ITER, validation_alias="WORKBENCH_BA_MAX_ITER")
    alpha_grid_points: int = Field(
        DEFAULT_ALPHA_GRID_POINTS, validation_alias="WORKBENCH_ALPHA_GRID"
    )

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "populate_by_name": True,
        "extra": "ignore",
    }

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator(
        "threads",
        "cap_dense",
        "cap_subsets",
        "cap_codebook",
        "optimizer_restarts",
        "optimizer_max_iter",
        "ba_max_iter",
    )
    @classmethod
    def validate_positive_int(cls, v, info):
        """Caps, thread counts and iteration limits must be at least 1."""
        if v < 1:
            raise ValueError(f"{info.field_name} must be at least 1")
        return v

    @field_validator("alpha_grid_points")
    @classmethod
    def validate_grid_points(cls, v):
        if v < 3:
            raise ValueError("alpha grid needs at least 3 points")
        return v

    @field_validator("ba_tolerance")
    @classmethod
    def validate_tolerance(cls, v):
        if not 0 < v < 1:
            raise ValueError("ba_tolerance must lie in (0, 1)")
        return v

    def setup_logging(self) -> None:
        """Setup logging configuration."""
        handlers = []

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(console_handler)

        if self.log_file:
            file_handler = logging.FileHandler(self.log_file)
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            handlers.append(file_handler)

        logging.basicConfig(
            level=getattr(logging, self.log_level),
            handlers=handlers,
            format=LOG_FORMAT,
            force=True,
        )

        # Run logger records every dispatched experiment in the output directory
        if self.run_log:
            run_logger = logging.getLogger("wiretap_workbench.runs")
            run_path = os.path.abspath(self.get_out_dir() / "runs.log")
            attached = any(
                isinstance(h, logging.FileHandler) and h.baseFilename == run_path
                for h in run_logger.handlers
            )
            if not attached:
                run_handler = logging.FileHandler(run_path)
                run_handler.setFormatter(
                    logging.Formatter("%(asctime)s - RUN - %(message)s")
                )
                run_logger.addHandler(run_handler)
            run_logger.setLevel(logging.INFO)

    def get_out_dir(self) -> Path:
        """Get output directory as Path object."""
        out_path = Path(self.out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        return out_path


def get_settings(**overrides) -> WorkbenchSettings:
    """Get application settings, with keyword overrides taking precedence."""
    return WorkbenchSettings(**overrides)

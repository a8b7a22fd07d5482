"""
Input validation for the wiretap workbench.
"""

import math
from pathlib import Path
from typing import Any, List, Sequence

import numpy as np

from .exceptions import ValidationError


class Validators:
    """Collection of validation functions for the numeric inputs of every module."""

    @staticmethod
    def validate_weights(weights: Sequence[float]) -> np.ndarray:
        """Validate a non-negative weight vector and return it as float array."""
        try:
            array = np.asarray(weights, dtype=float)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Weights must be numeric: {e}")

        if array.ndim != 1 or array.size == 0:
            raise ValidationError("Weights must be a non-empty one-dimensional vector")

        for index, value in enumerate(array):
            if not math.isfinite(value):
                raise ValidationError(f"Weight at index {index} is not finite: {value}")
            if value < 0:
                raise ValidationError(f"Weight at index {index} is negative: {value}")

        if not np.any(array > 0):
            raise ValidationError(
                f"All {array.size} weights are zero (indices 0..{array.size - 1})"
            )

        return array

    @staticmethod
    def validate_unit_interval(value: float, name: str) -> float:
        """Validate that a real lies in [0, 1]."""
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"{name} must be a finite real")
        if value < 0 or value > 1:
            raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        return float(value)

    @staticmethod
    def validate_renyi_order(alpha: float) -> float:
        """Validate a Rényi order; the α↓1 limit has its own query."""
        if not isinstance(alpha, (int, float)) or math.isnan(alpha):
            raise ValidationError("Rényi order must be a real number")
        if alpha <= 1:
            raise ValidationError(
                f"Rényi order must exceed 1, got {alpha} "
                "(use renyi_divergence_limit for the α↓1 limit)"
            )
        return float(alpha)

    @staticmethod
    def validate_blocklength(n: int, minimum: int = 1) -> int:
        """Validate a blocklength."""
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValidationError(f"Blocklength must be an integer, got {n!r}")
        if n < minimum:
            raise ValidationError(f"Blocklength must be at least {minimum}, got {n}")
        return int(n)

    @staticmethod
    def validate_non_negative(value: float, name: str) -> float:
        """Validate a finite non-negative real."""
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"{name} must be a finite real")
        if value < 0:
            raise ValidationError(f"{name} must be non-negative, got {value}")
        return float(value)

    @staticmethod
    def validate_positive(value: float, name: str) -> float:
        """Validate a finite positive real."""
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"{name} must be a finite real")
        if value <= 0:
            raise ValidationError(f"{name} must be positive, got {value}")
        return float(value)

    @staticmethod
    def validate_seed(seed: int) -> int:
        """Validate a generator seed."""
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise ValidationError(f"Seed must be an integer, got {seed!r}")
        if seed < 0:
            raise ValidationError("Seed must be non-negative")
        return int(seed)

    @staticmethod
    def validate_count(value: int, name: str, minimum: int = 1) -> int:
        """Validate an integer count such as trials or restarts."""
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ValidationError(f"{name} must be an integer, got {value!r}")
        if value < minimum:
            raise ValidationError(f"{name} must be at least {minimum}, got {value}")
        return int(value)

    @staticmethod
    def validate_file_path(file_path: str) -> Path:
        """Validate that an input file exists."""
        if not isinstance(file_path, (str, Path)):
            raise ValidationError("File path must be a string")

        path = Path(file_path)
        if not path.is_file():
            raise ValidationError(f"File not found: {file_path}")
        return path

    @staticmethod
    def parse_grid(spec: str) -> List[float]:
        """Parse a 'start:stop:step' grid specification (stop inclusive)."""
        try:
            start, stop, step = (float(part) for part in spec.split(":"))
        except ValueError:
            raise ValidationError(f"Grid must look like start:stop:step, got {spec!r}")

        if step <= 0 or stop < start:
            raise ValidationError(f"Invalid grid bounds or step: {spec!r}")

        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    @staticmethod
    def parse_range(spec: str) -> List[int]:
        """Parse an integer range 'a..b' (inclusive, step 1 or 'a..b:step')."""
        try:
            body, _, step_text = spec.partition(":")
            low_text, high_text = body.split("..")
            low, high = int(low_text), int(high_text)
            step = int(step_text) if step_text else 1
        except ValueError:
            raise ValidationError(f"Range must look like a..b[:step], got {spec!r}")

        if low > high or step < 1:
            raise ValidationError(f"Invalid range: {spec!r}")
        return list(range(low, high + 1, step))

    @staticmethod
    def summarize_for_logging(data: Any) -> str:
        """Summarise data for logging without dumping whole arrays."""
        if isinstance(data, np.ndarray):
            if data.size > 16:
                return f"[array shape={data.shape} dtype={data.dtype}]"
            return np.array2string(data, precision=6)

        elif isinstance(data, dict):
            return str({k: Validators.summarize_for_logging(v) for k, v in data.items()})

        elif isinstance(data, (list, tuple)):
            if len(data) > 16:
                return f"[{type(data).__name__} of {len(data)} items]"
            return str([Validators.summarize_for_logging(item) for item in data])

        else:
            return str(data)

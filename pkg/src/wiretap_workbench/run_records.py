"""
Run records: output files, their sha256 digests and the manifest tying them
to the configuration that produced them.
"""

import csv
import hashlib
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field
from typing_extensions import Self

from .exceptions import RunRecordError

SCHEMA_VERSION = "1.0"
MANIFEST_SUFFIX = ".manifest.json"


def to_jsonable(value: Any) -> Any:
    """Plain-JSON form of a result tree; infinities and NaN become strings."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def calculate_checksum(file_path: Path) -> str:
    """SHA-256 of a file, read in blocks."""
    sha256_hash = hashlib.sha256()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(4096), b""):
            sha256_hash.update(chunk)
    return sha256_hash.hexdigest()


class OutputDigest(BaseModel):
    filename: str
    sha256: str
    size: int


class RunRecord(BaseModel):
    """Manifest of one dispatched experiment."""

    schema_version: str = SCHEMA_VERSION
    tool_version: str
    subcommand: str
    config: Dict[str, Any]
    started_at: str
    finished_at: Optional[str] = None
    outputs: List[OutputDigest] = Field(default_factory=list)

    @property
    def digests(self) -> Dict[str, str]:
        return {output.filename: output.sha256 for output in self.outputs}

    def save(self, path: Path) -> Path:
        try:
            path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise RunRecordError(f"Cannot write manifest {path}: {e}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> Self:
        path = Path(path)
        try:
            record = cls.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise RunRecordError(f"Cannot read manifest {path}: {e}")
        except ValueError as e:
            raise RunRecordError(f"Malformed manifest {path}: {e}")
        if record.schema_version != SCHEMA_VERSION:
            raise RunRecordError(
                f"Manifest schema {record.schema_version} is not supported (expected {SCHEMA_VERSION})"
            )
        return record

    def verify(self, directory: Path) -> List[str]:
        """Filenames whose current digest differs from the recorded one."""
        mismatches = []
        for output in self.outputs:
            path = directory / output.filename
            if not path.exists() or calculate_checksum(path) != output.sha256:
                mismatches.append(output.filename)
        return mismatches


def compare_digests(expected: RunRecord, actual: RunRecord) -> List[str]:
    """Filenames present in either record whose digests do not match."""
    left, right = expected.digests, actual.digests
    return sorted(name for name in set(left) | set(right) if left.get(name) != right.get(name))


class RunRecorder:
    """Writes result files into one output directory and tracks their digests."""

    def __init__(self, out_dir: Path, subcommand: str, config: Dict[str, Any]):
        from . import __version__

        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.record = RunRecord(
            tool_version=__version__,
            subcommand=subcommand,
            config=to_jsonable(config),
            started_at=datetime.now().isoformat(),
        )
        self.logger = logging.getLogger(__name__)

    def _register(self, path: Path) -> Path:
        self.record.outputs.append(
            OutputDigest(
                filename=path.name,
                sha256=calculate_checksum(path),
                size=path.stat().st_size,
            )
        )
        self.logger.debug(f"Wrote {path}")
        return path

    def write_json(self, filename: str, document: Dict[str, Any]) -> Path:
        path = self.out_dir / filename
        payload = to_jsonable({"schema_version": SCHEMA_VERSION, **document})
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        except OSError as e:
            self.logger.error(f"Failed to write {path}: {e}")
            raise RunRecordError(f"Cannot write {path}: {e}")
        return self._register(path)

    def write_csv(
        self, filename: str, rows: Iterable[Dict[str, Any]], fieldnames: Optional[Sequence[str]] = None
    ) -> Path:
        rows = [to_jsonable(row) for row in rows]
        if fieldnames is None:
            fieldnames = list(rows[0]) if rows else []
        path = self.out_dir / filename
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.DictWriter(
                    f, fieldnames=["schema_version", *fieldnames], lineterminator="\n"
                )
                writer.writeheader()
                for row in rows:
                    writer.writerow({"schema_version": SCHEMA_VERSION, **row})
        except OSError as e:
            self.logger.error(f"Failed to write {path}: {e}")
            raise RunRecordError(f"Cannot write {path}: {e}")
        return self._register(path)

    def finish(self, stem: str) -> RunRecord:
        self.record.finished_at = datetime.now().isoformat()
        manifest = self.record.save(self.out_dir / f"{stem}{MANIFEST_SUFFIX}")
        self.logger.info(
            f"Run {self.record.subcommand} finished: {len(self.record.outputs)} outputs, manifest {manifest}"
        )
        return self.record

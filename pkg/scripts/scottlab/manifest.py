"""
Run manifests.

A manifest records the command line, the SHA-256 of every input file, the
bounds in force, the tool version and the outcome, together with the digest
of the report the run produced. Manifests carry no timestamps, so two runs of
the same command on the same inputs write identical manifests.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Union

from pydantic import BaseModel, Field, ValidationError

from . import __version__
from .errors import InputError


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class RunManifest(BaseModel):
    command: List[str]
    inputs: Dict[str, str] = Field(default_factory=dict)
    bounds: Dict[str, Union[int, str]] = Field(default_factory=dict)
    version: str = __version__
    exit_code: int
    outcome: str
    report_sha256: str

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2) + "\n"

    def changed_inputs(self) -> List[str]:
        """Inputs that are missing or whose digest no longer matches."""
        changed = []
        for path, digest in sorted(self.inputs.items()):
            target = Path(path)
            if not target.is_file() or sha256_file(target) != digest:
                changed.append(path)
        return changed


def write_manifest(manifest: RunManifest, destination: Path) -> None:
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    destination.write_text(manifest.to_json(), encoding="utf-8")


def load_manifest(path: Path) -> RunManifest:
    try:
        return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise InputError(f"Invalid manifest {path}: {exc}") from None

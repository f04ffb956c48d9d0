"""Run manifests: enough provenance to reproduce any output byte-for-byte."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    tool_version: str
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    calibration: list[dict] | None = None
    created_at: str = ""

    def __post_init__(self) -> None:
        if not self.created_at:
            self.created_at = datetime.now(timezone.utc).isoformat()

    def add_input(self, path) -> None:
        self.inputs[str(path)] = file_digest(path)

    def add_output(self, path) -> None:
        self.outputs[str(path)] = file_digest(path)

    def to_dict(self) -> dict:
        data = {
            "command": self.command,
            "argv": self.argv,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "created_at": self.created_at,
        }
        if self.calibration is not None:
            data["calibration"] = self.calibration
        return data


def write_manifest(output_path, manifest: RunManifest) -> str:
    """Write ``<output>.manifest.json`` next to the output it describes."""
    manifest_path = f"{output_path}.manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest.to_dict(), handle, sort_keys=True, indent=1)
        handle.write("\n")
    return manifest_path

"""Run manifests: what ran, on which scenario, and digests of what it wrote."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .. import __version__
from .formats import atomic_write, render_json


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: list
    scenario_hash: str
    seed: int
    outputs: dict = field(default_factory=dict)  # file name -> sha256
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool_version": self.version,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "command": list(self.command),
            "outputs": [{"file": k, "sha256": v} for k, v in sorted(self.outputs.items())],
        }

    def verify(self, directory: str) -> list:
        """Names of output files whose digest no longer matches."""
        return [name for name, digest in self.outputs.items()
                if not os.path.exists(os.path.join(directory, name))
                or file_digest(os.path.join(directory, name)) != digest]


def write_manifest(directory: str, command, scenario_hash: str, seed: int, files) -> RunManifest:
    """Digest ``files`` (paths inside ``directory``) and write ``manifest.json`` beside them."""
    outputs = {os.path.basename(p): file_digest(p) for p in files}
    m = RunManifest(list(command), scenario_hash, int(seed), outputs)
    atomic_write(os.path.join(directory, "manifest.json"), render_json(m.to_dict()))
    return m

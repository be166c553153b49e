"""Reproducibility manifests written next to every CLI output artifact.

A manifest pins the command, tool version, seed, resolved options, and
content hashes of all input files. No wall-clock state is recorded, so an
identical manifest implies byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class ExperimentManifest:
    command: str
    version: str
    seed: int | None
    inputs: dict          # path -> sha256 of content
    outputs: tuple        # paths written by the command
    options: dict         # resolved flag values

    @classmethod
    def build(cls, command: str, version: str, input_paths, output_paths,
              seed: int | None, options: dict) -> "ExperimentManifest":
        return cls(command=command, version=version, seed=seed,
                   inputs={str(p): sha256_file(p) for p in input_paths},
                   outputs=tuple(str(p) for p in output_paths),
                   options={k: options[k] for k in sorted(options)})

    def write(self, path) -> None:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        with open(path, "w", encoding="ascii") as f:
            json.dump(d, f, indent=2, sort_keys=True)
            f.write("\n")


def manifest_path(output_path) -> str:
    return str(output_path) + ".manifest.json"

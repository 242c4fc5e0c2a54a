"""Checkpoint persistence.

Checkpoints are JSON with parameters serialized as hexadecimal floats, so a
save/load/save cycle is byte-identical and warm starts are bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CheckpointError
from .net import MLPArchitecture, parameter_count

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    architecture: str
    seed: int
    parameters: np.ndarray
    status: str
    config: dict = field(default_factory=dict)
    activation: str = "tanh"
    optimizer_state: Optional[dict] = None
    format_version: int = FORMAT_VERSION


def _floats_to_hex(values: np.ndarray):
    return [float(v).hex() for v in values]


def _hex_to_floats(values) -> np.ndarray:
    return np.array([float.fromhex(v) for v in values], dtype=np.float64)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    payload = {
        "format_version": ckpt.format_version,
        "architecture": ckpt.architecture,
        "activation": ckpt.activation,
        "seed": ckpt.seed,
        "status": ckpt.status,
        "config": ckpt.config,
        "parameters_hex": _floats_to_hex(ckpt.parameters),
        "optimizer_state": ckpt.optimizer_state,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} is truncated or not valid JSON: {exc}")

    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format_version {version!r}, expected {FORMAT_VERSION}"
        )
    try:
        arch_string = payload["architecture"]
        params = _hex_to_floats(payload["parameters_hex"])
        ckpt = Checkpoint(
            architecture=arch_string,
            activation=payload.get("activation", "tanh"),
            seed=payload["seed"],
            parameters=params,
            status=payload["status"],
            config=payload.get("config", {}),
            optimizer_state=payload.get("optimizer_state"),
            format_version=version,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"checkpoint {path} is malformed: {exc}")

    arch = MLPArchitecture.from_string(arch_string)
    if ckpt.parameters.size != parameter_count(arch):
        raise CheckpointError(
            f"checkpoint {path} holds {ckpt.parameters.size} parameters but "
            f"architecture {arch_string} needs {parameter_count(arch)}"
        )
    return ckpt

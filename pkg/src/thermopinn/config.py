"""Experiment configuration: JSON round-trip, dotted-path overrides, and the
built-in presets.

The resolved configuration is echoed verbatim into every output file so runs
can be reproduced from any artifact.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Tuple

from .errors import ConfigurationError
from .physics import DomainSpec, FlowParameters
from .training import TrainConfig


@dataclass(frozen=True)
class DatasetSpec:
    """Which ladder level a run trains on and how many levels exist."""

    level: int = 5
    levels: int = 8

    def __post_init__(self):
        if not 0 <= self.level < self.levels:
            raise ConfigurationError(
                f"dataset level {self.level} outside the {self.levels}-level ladder"
            )


@dataclass(frozen=True)
class ConvergenceStudySpec:
    thresholds: Tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    levels: Tuple[int, ...] = (3, 4, 5)


@dataclass(frozen=True)
class ArchitectureStudySpec:
    hidden_widths: Tuple[int, ...] = (32, 64, 128)
    hidden_depths: Tuple[int, ...] = (1, 2)
    levels: Tuple[int, ...] = (3, 4, 5)


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "desk"
    seed: int = 0
    out_dir: str = "runs/desk"
    architecture: str = "2-32-32-4"
    eval_grid_n: int = 100
    rng_algorithm: str = "pcg64"
    domain: DomainSpec = DomainSpec()
    flow: FlowParameters = FlowParameters()
    dataset: DatasetSpec = DatasetSpec()
    train: TrainConfig = TrainConfig()
    convergence_study: ConvergenceStudySpec = ConvergenceStudySpec()
    architecture_study: ArchitectureStudySpec = ArchitectureStudySpec()

    def resolved_train(self) -> TrainConfig:
        """Training config with the experiment seed folded in."""
        return dataclasses.replace(self.train, seed=self.seed)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["flow"]["g"] = list(d["flow"]["g"])
        for key in ("thresholds", "levels"):
            d["convergence_study"][key] = list(d["convergence_study"][key])
        for key in ("hidden_widths", "hidden_depths", "levels"):
            d["architecture_study"][key] = list(d["architecture_study"][key])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        try:
            kwargs = {}
            for key in ("preset", "seed", "out_dir", "architecture", "eval_grid_n", "rng_algorithm"):
                if key in d:
                    kwargs[key] = d[key]
            if "domain" in d:
                kwargs["domain"] = DomainSpec(**d["domain"])
            if "flow" in d:
                flow = dict(d["flow"])
                if "g" in flow:
                    flow["g"] = tuple(flow["g"])
                kwargs["flow"] = FlowParameters(**flow)
            if "dataset" in d:
                kwargs["dataset"] = DatasetSpec(**d["dataset"])
            if "train" in d:
                kwargs["train"] = TrainConfig(**d["train"])
            if "convergence_study" in d:
                s = {k: tuple(v) for k, v in d["convergence_study"].items()}
                kwargs["convergence_study"] = ConvergenceStudySpec(**s)
            if "architecture_study" in d:
                s = {k: tuple(v) for k, v in d["architecture_study"].items()}
                kwargs["architecture_study"] = ArchitectureStudySpec(**s)
            return ExperimentConfig(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(f"bad configuration field: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"configuration file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"configuration file {path} is not valid JSON: {exc}")
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n")


def _assign(d: dict, assignment: str) -> None:
    path, sep, raw = assignment.partition("=")
    if not sep or not path:
        raise ConfigurationError(f"override must look like key=value, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = d
    parts = path.strip().split(".")
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigurationError(f"unknown configuration path {path!r}")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigurationError(f"unknown configuration path {path!r}")
    node[parts[-1]] = value


def apply_override(config: ExperimentConfig, assignment: str) -> ExperimentConfig:
    """Apply one "dotted.path=value" override; values parse as JSON when possible."""
    return apply_overrides(config, [assignment])


def apply_overrides(config: ExperimentConfig, assignments) -> ExperimentConfig:
    """Apply several overrides, validating once at the end so that mutually
    dependent fields (like the ladder depth and level) can change together."""
    assignments = list(assignments or ())
    if not assignments:
        return config
    d = config.to_dict()
    for assignment in assignments:
        _assign(d, assignment)
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def desk_preset() -> ExperimentConfig:
    """Small network and loose threshold that trains in minutes on one core."""
    return ExperimentConfig()


def paper_scale_preset() -> ExperimentConfig:
    """Full-size study settings; training to 1e-4 on 1536 points takes on the
    order of a day of CPU time."""
    return ExperimentConfig(
        preset="paper-scale",
        out_dir="runs/paper-scale",
        architecture="2-128-128-4",
        dataset=DatasetSpec(level=7),
        train=TrainConfig(threshold=1e-4, max_epochs=350_000),
        convergence_study=ConvergenceStudySpec(
            thresholds=(1e-1, 1e-2, 1e-3, 1e-4), levels=tuple(range(8))
        ),
        architecture_study=ArchitectureStudySpec(levels=tuple(range(8))),
    )


def transfer_half_domain_preset() -> ExperimentConfig:
    """Warm-start target: the right half of the original domain."""
    return ExperimentConfig(
        preset="transfer-half-domain",
        out_dir="runs/transfer-half-domain",
        domain=DomainSpec(x_min=0.0, x_max=1.0, y_min=-1.0, y_max=1.0),
        train=TrainConfig(optimizer="lbfgs"),
    )


def transfer_re10_preset() -> ExperimentConfig:
    """Warm-start target: Reynolds number 10 (nu = 0.1) with g = (0, -9.8)."""
    return ExperimentConfig(
        preset="transfer-re10",
        out_dir="runs/transfer-re10",
        flow=FlowParameters(nu=0.1, g=(0.0, -9.8)),
        train=TrainConfig(optimizer="lbfgs"),
    )


PRESETS = {
    "desk": desk_preset,
    "paper-scale": paper_scale_preset,
    "transfer-half-domain": transfer_half_domain_preset,
    "transfer-re10": transfer_re10_preset,
}


def preset_config(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")

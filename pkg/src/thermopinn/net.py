"""Fully connected network mapping (x, y) to the four flow fields (u, v, p, theta).

Hidden layers use tanh, the output layer is linear. Parameters live in a single
flat float64 vector, ordered layer by layer: each weight matrix in row-major
order followed by its bias vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArchitectureError
from .fields import VAL, FieldState, Point2

N_INPUTS = 2
N_OUTPUTS = 4


@dataclass(frozen=True)
class MLPArchitecture:
    """Layer widths of the network, e.g. (2, 32, 32, 4).

    The first width is always 2 (spatial inputs) and the last is always 4
    (output fields). Zero hidden layers are allowed.
    """

    layer_widths: tuple
    activation: str = "tanh"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ArchitectureError("need at least input and output layers")
        if widths[0] != N_INPUTS:
            raise ArchitectureError(f"first layer width must be {N_INPUTS}, got {widths[0]}")
        if widths[-1] != N_OUTPUTS:
            raise ArchitectureError(f"last layer width must be {N_OUTPUTS}, got {widths[-1]}")
        if any(w <= 0 for w in widths):
            raise ArchitectureError(f"layer widths must be positive: {widths}")
        if self.activation != "tanh":
            raise ArchitectureError(f"unsupported activation {self.activation!r}")

    @property
    def n_hidden(self) -> int:
        return len(self.layer_widths) - 2

    @staticmethod
    def from_string(spec: str) -> "MLPArchitecture":
        """Parse the "2-h1-...-4" naming convention used in configs and checkpoints."""
        try:
            widths = tuple(int(part) for part in spec.strip().split("-"))
        except ValueError as exc:
            raise ArchitectureError(f"cannot parse architecture string {spec!r}") from exc
        return MLPArchitecture(widths)

    def to_string(self) -> str:
        return "-".join(str(w) for w in self.layer_widths)


def parameter_count(arch: MLPArchitecture) -> int:
    """Total number of trainable weights and biases."""
    widths = arch.layer_widths
    return sum(widths[l - 1] * widths[l] + widths[l] for l in range(1, len(widths)))


def init_parameters(arch: MLPArchitecture, seed: int) -> np.ndarray:
    """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))) and zero biases.

    Deterministic function of (arch, seed).
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))
    chunks = []
    widths = arch.layer_widths
    for l in range(1, len(widths)):
        fan_in, fan_out = widths[l - 1], widths[l]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        chunks.append(w.ravel())
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def split_parameters(arch: MLPArchitecture, params: np.ndarray):
    """Split a flat parameter vector into per-layer (W, b) array views."""
    params = np.asarray(params, dtype=np.float64)
    if params.ndim != 1 or params.size != parameter_count(arch):
        raise ArchitectureError(
            f"parameter vector of length {params.size} does not match "
            f"architecture {arch.to_string()} ({parameter_count(arch)} parameters)"
        )
    layers = []
    offset = 0
    widths = arch.layer_widths
    for l in range(1, len(widths)):
        fan_in, fan_out = widths[l - 1], widths[l]
        w = params[offset : offset + fan_in * fan_out].reshape(fan_out, fan_in)
        offset += fan_in * fan_out
        b = params[offset : offset + fan_out]
        offset += fan_out
        layers.append((w, b))
    return layers


def pack_parameters(layers) -> np.ndarray:
    """Inverse of split_parameters."""
    return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in layers])


def forward(arch: MLPArchitecture, params: np.ndarray, point) -> FieldState:
    """Evaluate the network at one point.

    Shares its arithmetic with the jet evaluation, so values agree with
    evaluate_jet bit for bit.
    """
    from . import autodiff

    if isinstance(point, Point2):
        point = point.as_array()
    pts = np.asarray(point, dtype=np.float64).reshape(1, 2)
    jets = autodiff.field_jets(arch, params, pts)
    return FieldState.from_array(jets[0, VAL, :])

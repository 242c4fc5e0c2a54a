"""Field-level value containers shared by the network, physics, and evaluation code.

Batched computations use plain float64 arrays; jets are laid out as
``(n_points, 6, 4)`` with the derivative component on axis 1 and the field
(u, v, p, theta) on axis 2. The dataclasses below are the single-point view
of the same data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Jet component indices (axis 1 of a batched jet array).
VAL, DX, DY, DXX, DXY, DYY = range(6)
JET_COMPONENTS = ("value", "dx", "dy", "dxx", "dxy", "dyy")

# Field indices (axis 2 of a batched jet array).
IU, IV, IP, ITH = range(4)
FIELD_NAMES = ("u", "v", "p", "theta")


@dataclass(frozen=True)
class Point2:
    """A point in the two-dimensional spatial domain."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


@dataclass(frozen=True)
class FieldState:
    """The four solution fields at one point."""

    u: float
    v: float
    p: float
    theta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.p, self.theta], dtype=np.float64)

    @staticmethod
    def from_array(values: np.ndarray) -> "FieldState":
        u, v, p, theta = (float(x) for x in values)
        return FieldState(u, v, p, theta)


@dataclass(frozen=True)
class ScalarJet2:
    """One scalar field with its spatial derivatives up to second order.

    The mixed partial is stored once; smooth networks give dxy == dyx.
    """

    value: float
    dx: float
    dy: float
    dxx: float
    dxy: float
    dyy: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.value, self.dx, self.dy, self.dxx, self.dxy, self.dyy],
            dtype=np.float64,
        )

    @staticmethod
    def from_array(comps: np.ndarray) -> "ScalarJet2":
        return ScalarJet2(*(float(c) for c in comps))


@dataclass(frozen=True)
class FieldJet2:
    """All four solution fields with first and second spatial derivatives."""

    u: ScalarJet2
    v: ScalarJet2
    p: ScalarJet2
    theta: ScalarJet2

    def values(self) -> FieldState:
        return FieldState(self.u.value, self.v.value, self.p.value, self.theta.value)

    def as_array(self) -> np.ndarray:
        """Return the (6, 4) component-major array view of this jet."""
        out = np.empty((6, 4), dtype=np.float64)
        for j, jet in enumerate((self.u, self.v, self.p, self.theta)):
            out[:, j] = jet.as_array()
        return out

    @staticmethod
    def from_array(jet: np.ndarray) -> "FieldJet2":
        """Build from a (6, 4) component-major array."""
        jet = np.asarray(jet, dtype=np.float64)
        if jet.shape != (6, 4):
            raise ValueError(f"expected a (6, 4) jet array, got shape {jet.shape}")
        return FieldJet2(*(ScalarJet2.from_array(jet[:, j]) for j in range(4)))

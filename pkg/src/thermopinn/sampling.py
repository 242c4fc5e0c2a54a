"""Collocation point generation: Latin hypercube sampling, hierarchically
nested training datasets, validation splits, and the uniform test grid.

The canonical dataset ladder doubles from 12 to 1536 total points with the
domain holding twice as many points as all four boundary edges combined:

    level        0   1   2   3    4    5    6     7
    domain       8  16  32  64  128  256  512  1024
    per edge     1   2   4   8   16   32   64   128

Level k+1 keeps every point of level k and draws the new points by Latin
hypercube sampling, so nesting holds bitwise while stratification holds per
increment.

All randomness flows through numpy's PCG64 generator seeded from explicit
integers, so every dataset is a pure function of its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import physics
from .physics import DomainSpec

EDGES = ("S", "N", "W", "E")

CANONICAL_LEVELS = 8
BASE_DOMAIN_POINTS = 8
BASE_EDGE_POINTS = 1


def _rng(seed: int, *tags: int) -> np.random.Generator:
    """Deterministic, portable generator for a seed plus a stream tag."""
    entropy = [seed & 0xFFFFFFFFFFFFFFFF] + [int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class CollocationSet:
    """Domain and boundary training points with Dirichlet target data.

    ``boundary_targets`` holds (g_u, g_v, g_theta) rows aligned with
    ``boundary_points``; ``boundary_pressure`` optionally carries exact
    pressure values for the experimental pressure boundary term.
    """

    domain_points: np.ndarray  # (n_d, 2)
    boundary_points: np.ndarray  # (n_b, 2)
    boundary_edges: tuple  # length n_b, entries in EDGES
    boundary_targets: np.ndarray  # (n_b, 3)
    boundary_pressure: Optional[np.ndarray] = None  # (n_b,)
    level: int = 0
    seed: int = 0

    @property
    def n_domain(self) -> int:
        return self.domain_points.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.boundary_points.shape[0]

    @property
    def n_total(self) -> int:
        return self.n_domain + self.n_boundary


def latin_hypercube(n: int, rect: DomainSpec, seed: int) -> np.ndarray:
    """n points with exactly one sample per stratum in each dimension."""
    if n < 1:
        raise ValueError(f"need at least one sample, got n={n}")
    rng = _rng(seed)
    return _lhs_2d(n, rect, rng)


def _lhs_2d(n: int, rect: DomainSpec, rng: np.random.Generator) -> np.ndarray:
    pts = np.empty((n, 2))
    for dim, (lo, hi) in enumerate(((rect.x_min, rect.x_max), (rect.y_min, rect.y_max))):
        strata = rng.permutation(n)
        jitter = rng.random(n)
        pts[:, dim] = lo + (hi - lo) * (strata + jitter) / n
    return pts


def _lhs_1d(n: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    strata = rng.permutation(n)
    jitter = rng.random(n)
    return lo + (hi - lo) * (strata + jitter) / n


def _edge_points(edge: str, coords: np.ndarray, rect: DomainSpec) -> np.ndarray:
    """Lift 1-D edge coordinates onto the tagged edge of the rectangle."""
    pts = np.empty((coords.shape[0], 2))
    if edge == "S":
        pts[:, 0], pts[:, 1] = coords, rect.y_min
    elif edge == "N":
        pts[:, 0], pts[:, 1] = coords, rect.y_max
    elif edge == "W":
        pts[:, 0], pts[:, 1] = rect.x_min, coords
    elif edge == "E":
        pts[:, 0], pts[:, 1] = rect.x_max, coords
    else:
        raise ValueError(f"unknown edge tag {edge!r}")
    return pts


def hierarchical_datasets(
    levels: int,
    rect: DomainSpec,
    seed: int,
    exact_solution_provider: Callable[[np.ndarray], np.ndarray] = physics.beltrami_fields,
) -> List[CollocationSet]:
    """Nested collocation sets following the canonical 12..1536 ladder.

    ``exact_solution_provider`` maps points (n, 2) to field values (n, 4);
    it supplies the Dirichlet targets on the boundary.
    """
    if not 1 <= levels <= CANONICAL_LEVELS:
        raise ValueError(f"levels must be in 1..{CANONICAL_LEVELS}, got {levels}")

    domain = np.empty((0, 2))
    boundary = np.empty((0, 2))
    edge_tags: Tuple[str, ...] = ()
    sets = []
    for k in range(levels):
        n_new_domain = BASE_DOMAIN_POINTS if k == 0 else BASE_DOMAIN_POINTS * 2 ** (k - 1)
        n_new_edge = BASE_EDGE_POINTS if k == 0 else BASE_EDGE_POINTS * 2 ** (k - 1)
        domain = np.concatenate([domain, _lhs_2d(n_new_domain, rect, _rng(seed, k, 0))])
        for e, edge in enumerate(EDGES):
            lo, hi = (rect.x_min, rect.x_max) if edge in ("S", "N") else (rect.y_min, rect.y_max)
            coords = _lhs_1d(n_new_edge, lo, hi, _rng(seed, k, 1 + e))
            boundary = np.concatenate([boundary, _edge_points(edge, coords, rect)])
            edge_tags = edge_tags + (edge,) * n_new_edge
        exact = np.asarray(exact_solution_provider(boundary), dtype=np.float64)
        sets.append(
            CollocationSet(
                domain_points=domain.copy(),
                boundary_points=boundary.copy(),
                boundary_edges=edge_tags,
                boundary_targets=exact[:, [0, 1, 3]].copy(),
                boundary_pressure=exact[:, 2].copy(),
                level=k,
                seed=seed,
            )
        )
    return sets


def split_validation(cset: CollocationSet, fraction: float, seed: int):
    """Partition a collocation set into training and validation subsets.

    The validation size is round-half-up(fraction * total points), drawn
    uniformly without replacement across domain and boundary points together.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"fraction must be in [0, 1), got {fraction}")
    total = cset.n_total
    n_val = int(np.floor(fraction * total + 0.5))
    rng = _rng(seed, 0x5A11D)
    val_idx = np.sort(rng.choice(total, size=n_val, replace=False))
    mask = np.zeros(total, dtype=bool)
    mask[val_idx] = True

    def subset(selected: np.ndarray) -> CollocationSet:
        dom_sel = selected[: cset.n_domain]
        bnd_sel = selected[cset.n_domain :]
        return replace(
            cset,
            domain_points=cset.domain_points[dom_sel],
            boundary_points=cset.boundary_points[bnd_sel],
            boundary_edges=tuple(str(e) for e in np.asarray(cset.boundary_edges)[bnd_sel]),
            boundary_targets=cset.boundary_targets[bnd_sel],
            boundary_pressure=None if cset.boundary_pressure is None else cset.boundary_pressure[bnd_sel],
        )

    return subset(~mask), subset(mask)


def boundary_grid(rect: DomainSpec, n_per_edge: int) -> np.ndarray:
    """Uniformly spaced points along each edge (corners included), stacked
    in edge order S, N, W, E. Used for dense residual estimation on the
    boundary, not for training."""
    if n_per_edge < 2:
        raise ValueError(f"need at least 2 points per edge, got {n_per_edge}")
    xs = np.linspace(rect.x_min, rect.x_max, n_per_edge)
    ys = np.linspace(rect.y_min, rect.y_max, n_per_edge)
    return np.concatenate(
        [_edge_points(edge, xs if edge in ("S", "N") else ys, rect) for edge in EDGES]
    )


def test_grid(rect: DomainSpec, n_per_side: int) -> np.ndarray:
    """Uniform evaluation grid including all four corners, row-major order.

    Points are ordered with x varying fastest: index k maps to
    (xs[k % n], ys[k // n]), so the first point is the lower-left corner and
    the last is the upper-right one.
    """
    if n_per_side < 2:
        raise ValueError(f"need at least 2 points per side, got {n_per_side}")
    xs = np.linspace(rect.x_min, rect.x_max, n_per_side)
    ys = np.linspace(rect.y_min, rect.y_max, n_per_side)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


# ---------------------------------------------------------------------------
# CSV export / import
# ---------------------------------------------------------------------------

_CSV_HEADER = "x,y,kind,g_u,g_v,g_theta"


def collocation_to_csv(cset: CollocationSet, path) -> None:
    """Write a collocation set for inspection and replay.

    Domain rows leave the Dirichlet columns empty; boundary rows carry their
    targets. Floats use the shortest round-trip representation.
    """
    def fmt(v):
        return repr(float(v))

    lines = [f"# level={cset.level} seed={cset.seed}", _CSV_HEADER]
    for x, y in cset.domain_points:
        lines.append(f"{fmt(x)},{fmt(y)},domain,,,")
    for (x, y), edge, (gu, gv, gth) in zip(
        cset.boundary_points, cset.boundary_edges, cset.boundary_targets
    ):
        lines.append(f"{fmt(x)},{fmt(y)},edge-{edge},{fmt(gu)},{fmt(gv)},{fmt(gth)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def collocation_from_csv(path) -> CollocationSet:
    """Inverse of collocation_to_csv (the optional pressure data is not kept)."""
    level, seed = 0, 0
    dom, bnd, tags, targets = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line == _CSV_HEADER:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    if key == "level":
                        level = int(value)
                    elif key == "seed":
                        seed = int(value)
                continue
            parts = line.split(",")
            x, y, kind = float(parts[0]), float(parts[1]), parts[2]
            if kind == "domain":
                dom.append((x, y))
            elif kind.startswith("edge-"):
                bnd.append((x, y))
                tags.append(kind[len("edge-") :])
                targets.append(tuple(float(p) for p in parts[3:6]))
            else:
                raise ValueError(f"unknown point kind {kind!r} in {path}")
    return CollocationSet(
        domain_points=np.array(dom, dtype=np.float64).reshape(-1, 2),
        boundary_points=np.array(bnd, dtype=np.float64).reshape(-1, 2),
        boundary_edges=tuple(tags),
        boundary_targets=np.array(targets, dtype=np.float64).reshape(-1, 3),
        boundary_pressure=None,
        level=level,
        seed=seed,
    )

"""Seeded network geometry: BS/UE placement on a 2-D window and planar queries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi
MAX_DEPLOYMENT_ATTEMPTS = 8


class EmptyDeploymentError(RuntimeError):
    """Raised when a PPP draw keeps producing zero base stations."""


class Point2D(NamedTuple):
    x: float
    y: float


AngleOrPoint = Union[float, Point2D, Sequence[float]]


def derive_seed(parent: int, *stream: int) -> int:
    """Child seed for ``stream`` under ``parent``.

    Children are independent of the order in which they are requested, so
    trial ``k`` gets the same seed whether it runs first or last.
    """
    seq = np.random.SeedSequence(entropy=int(parent), spawn_key=tuple(int(s) for s in stream))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class DeploymentConfig:
    """Deployment window (width, height in meters, origin at (0, 0)) and density."""

    window: tuple[float, float]
    cell_radius: float
    seed: int
    ue_count: int = 10
    mode: str = "ppp"
    min_ue_bs_distance: float = 0.0  # UEs are redrawn while closer than this to any BS

    def __post_init__(self):
        w, h = self.window
        if not (w > 0 and h > 0):
            raise ValueError(f"window must have positive area, got {self.window}")
        if not self.cell_radius > 0:
            raise ValueError(f"cell_radius must be positive, got {self.cell_radius}")
        if self.ue_count < 1:
            raise ValueError(f"ue_count must be >= 1, got {self.ue_count}")
        if self.mode not in ("ppp", "grid"):
            raise ValueError(f"mode must be 'ppp' or 'grid', got {self.mode!r}")
        if self.min_ue_bs_distance < 0:
            raise ValueError("min_ue_bs_distance must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def intensity(self) -> float:
        """BS intensity per square meter: one BS per disc of the cell radius."""
        return 1.0 / (math.pi * self.cell_radius**2)

    @property
    def area(self) -> float:
        return self.window[0] * self.window[1]


@dataclass(frozen=True, eq=False)
class Topology:
    bs_positions: np.ndarray  # (n_bs, 2)
    ue_positions: np.ndarray  # (n_ue, 2)
    head_azimuth: np.ndarray  # (n_ue,), radians in [0, 2*pi)
    seed_used: int
    window: tuple[float, float]

    def __post_init__(self):
        if len(self.bs_positions) < 1:
            raise ValueError("topology needs at least one BS")
        for arr in (self.bs_positions, self.ue_positions, self.head_azimuth):
            arr.setflags(write=False)

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def n_ue(self) -> int:
        return len(self.ue_positions)

    def bs(self, i: int) -> Point2D:
        return Point2D(*map(float, self.bs_positions[i]))

    def ue(self, i: int) -> Point2D:
        return Point2D(*map(float, self.ue_positions[i]))

    def ue_bs_distances(self, ue: int) -> np.ndarray:
        delta = self.bs_positions - self.ue_positions[ue]
        return np.hypot(delta[:, 0], delta[:, 1])

    def ue_bs_bearings(self, ue: int) -> np.ndarray:
        """Bearing from the UE toward every BS, radians in (-pi, pi]."""
        delta = self.bs_positions - self.ue_positions[ue]
        return np.arctan2(delta[:, 1], delta[:, 0])

    def to_dict(self) -> dict:
        return {
            "seed_used": self.seed_used,
            "window": list(self.window),
            "bs_positions": self.bs_positions.tolist(),
            "ue_positions": self.ue_positions.tolist(),
            "head_azimuth": self.head_azimuth.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        return cls(
            bs_positions=np.array(data["bs_positions"], dtype=float).reshape(-1, 2),
            ue_positions=np.array(data["ue_positions"], dtype=float).reshape(-1, 2),
            head_azimuth=np.array(data["head_azimuth"], dtype=float),
            seed_used=int(data["seed_used"]),
            window=tuple(data["window"]),
        )


def _grid_positions(config: DeploymentConfig) -> np.ndarray:
    # lattice points sit at cell centres: R, 3R, 5R, ... from the window origin
    spacing = 2.0 * config.cell_radius
    w, h = config.window
    xs = np.arange(config.cell_radius, w + 1e-9 * spacing, spacing)
    ys = np.arange(config.cell_radius, h + 1e-9 * spacing, spacing)
    xs = xs[xs <= w]
    ys = ys[ys <= h]
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _enforce_exclusion(ue, bs, min_dist, scale, rng, max_rounds=10_000):
    for _ in range(max_rounds):
        d = np.hypot(ue[:, None, 0] - bs[None, :, 0], ue[:, None, 1] - bs[None, :, 1])
        bad = np.flatnonzero(d.min(axis=1) < min_dist)
        if len(bad) == 0:
            return ue
        ue[bad] = rng.uniform(size=(len(bad), 2)) * scale
    raise EmptyDeploymentError("no room for UEs outside the BS exclusion zones")


def sample_topology(config: DeploymentConfig) -> Topology:
    """Draw BS and UE positions plus per-UE head directions from ``config.seed``.

    In ``ppp`` mode an empty draw is retried with sub-seeds ``(seed, attempt)``
    up to :data:`MAX_DEPLOYMENT_ATTEMPTS` times.
    """
    scale = np.array(config.window, dtype=float)
    for attempt in range(MAX_DEPLOYMENT_ATTEMPTS):
        rng = make_rng(derive_seed(config.seed, attempt))
        if config.mode == "ppp":
            n_bs = int(rng.poisson(config.intensity * config.area))
            bs = rng.uniform(size=(n_bs, 2)) * scale
        else:
            bs = _grid_positions(config)
            if len(bs) == 0:
                raise EmptyDeploymentError("empty deployment: window smaller than one grid cell")
        ue = rng.uniform(size=(config.ue_count, 2)) * scale
        if len(bs) > 0 and config.min_ue_bs_distance > 0:
            ue = _enforce_exclusion(ue, bs, config.min_ue_bs_distance, scale, rng)
        head = rng.uniform(0.0, TWO_PI, size=config.ue_count)
        # uniform() is half-open in exact arithmetic but may round up to 2*pi
        head[head >= TWO_PI] = 0.0
        if len(bs) > 0:
            return Topology(bs, ue, head, seed_used=config.seed, window=tuple(map(float, config.window)))
    raise EmptyDeploymentError(
        f"empty deployment: no BS sampled after {MAX_DEPLOYMENT_ATTEMPTS} attempts (seed {config.seed})"
    )


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def bearing(origin: Sequence[float], target: Sequence[float]) -> float:
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    if dx == 0 and dy == 0:
        raise ValueError("undefined azimuth: target coincides with origin")
    return math.atan2(dy, dx)


def wrap_angle(angle):
    """Map an angle (or array of angles) into [-pi, pi)."""
    return (np.asarray(angle) + math.pi) % TWO_PI - math.pi


def _as_angle(origin: Sequence[float], target: AngleOrPoint) -> float:
    if isinstance(target, (int, float, np.floating, np.integer)):
        return float(target)
    return bearing(origin, target)


def azimuth_separation(origin: Sequence[float], target_a: AngleOrPoint, target_b: AngleOrPoint) -> float:
    """Smallest absolute angle between two directions seen from ``origin``.

    Each target is either a point or an absolute azimuth in radians.
    """
    a = _as_angle(origin, target_a)
    b = _as_angle(origin, target_b)
    return float(abs(wrap_angle(a - b)))

"""Ground-truth target motion and the range/azimuth measurement model.

Units are fixed network-wide: km, km/s, rad, s.  The state ordering is
[x, y, vx, vy], under which the transition and process-noise matrices
take their Kronecker closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = a % TWO_PI
    if w > math.pi:
        w -= TWO_PI
    return w


@dataclass(frozen=True)
class TargetState:
    """Ground-truth kinematic state of one target: [x, y, vx, vy]."""

    x: float
    y: float
    vx: float
    vy: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "TargetState":
        v = np.asarray(v, dtype=float)
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


@dataclass
class MotionModel:
    """White-noise constant-velocity model.

    F = [[1, t_u], [0, 1]] (x) I2 and
    Q = sigma_w2 * [[t_u^3/3, t_u^2/2], [t_u^2/2, t_u]] (x) I2
    under the [x, y, vx, vy] state ordering.
    """

    t_u: float
    sigma_w2: float
    F: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.t_u <= 0:
            raise ValueError("update time t_u must be positive")
        if self.sigma_w2 < 0:
            raise ValueError("process-noise intensity must be nonnegative")
        t = self.t_u
        i2 = np.eye(2)
        self.F = np.kron(np.array([[1.0, t], [0.0, 1.0]]), i2)
        self.Q = self.sigma_w2 * np.kron(
            np.array([[t**3 / 3.0, t**2 / 2.0], [t**2 / 2.0, t]]), i2
        )
        if self.sigma_w2 > 0:
            self._Q_chol = np.linalg.cholesky(self.Q)
        else:
            self._Q_chol = np.zeros((4, 4))


@dataclass(frozen=True)
class RadarSite:
    """Fixed radar position; ids are unique and contiguous from 0."""

    id: int
    x: float
    y: float


@dataclass
class NoiseModel:
    """Per-(radar, target) measurement noise.

    Range std for radar i and target j is b[i, j] * sigma_r with
    b[i, j] >= 1; azimuth std sigma_a is common to all pairs.
    """

    sigma_a: float
    sigma_r: float
    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.sigma_a <= 0 or self.sigma_r <= 0:
            raise ValueError("noise stds must be positive")
        if np.any(self.b < 1.0):
            raise ValueError("range-accuracy coefficients must be >= 1")

    def range_std(self, radar_id: int, target_id: int) -> float:
        return float(self.b[radar_id, target_id] * self.sigma_r)

    def measurement_cov(self, radar_id: int, target_id: int) -> np.ndarray:
        return np.diag(
            [self.range_std(radar_id, target_id) ** 2, self.sigma_a**2]
        )


@dataclass(frozen=True)
class Measurement:
    """One range/azimuth return: r >= 0, azimuth wrapped to (-pi, pi]."""

    radar_id: int
    target_id: int
    r: float
    a: float
    k: int


def propagate(
    state: TargetState,
    model: MotionModel,
    rng: np.random.Generator | None,
    noiseless: bool = False,
) -> TargetState:
    """One step of the constant-velocity model: F x + w, w ~ N(0, Q)."""
    x = model.F @ state.as_vector()
    if not noiseless:
        x = x + model._Q_chol @ rng.standard_normal(4)
    return TargetState.from_vector(x)


def measurement_fn(site: RadarSite, state: TargetState) -> tuple[float, float]:
    """Noiseless range/azimuth of a target as seen from a radar."""
    dx = state.x - site.x
    dy = state.y - site.y
    r = math.hypot(dx, dy)
    if r <= 0.0:
        raise DegenerateGeometryError(
            f"target co-located with radar {site.id}; range-bearing undefined"
        )
    return r, math.atan2(dy, dx)


def observe(
    site: RadarSite,
    state: TargetState,
    noise: NoiseModel,
    rng: np.random.Generator | None,
    target_id: int,
    k: int = 0,
    noiseless: bool = False,
) -> Measurement:
    """Range/azimuth measurement with per-(radar, target) Gaussian noise."""
    r, a = measurement_fn(site, state)
    if not noiseless:
        r += rng.normal(0.0, noise.range_std(site.id, target_id))
        a += rng.normal(0.0, noise.sigma_a)
    return Measurement(
        radar_id=site.id,
        target_id=target_id,
        r=max(r, 0.0),
        a=wrap_angle(a),
        k=k,
    )


def linearize(site: RadarSite, state: TargetState) -> np.ndarray:
    """Jacobian of the range/azimuth map at a state, 2x4."""
    dx = state.x - site.x
    dy = state.y - site.y
    r2 = dx * dx + dy * dy
    if r2 <= 0.0:
        raise DegenerateGeometryError(
            f"target co-located with radar {site.id}; Jacobian undefined"
        )
    r = math.sqrt(r2)
    return np.array(
        [
            [dx / r, dy / r, 0.0, 0.0],
            [-dy / r2, dx / r2, 0.0, 0.0],
        ]
    )

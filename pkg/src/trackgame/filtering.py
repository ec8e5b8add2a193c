"""Extended Kalman filtering per (radar, target) track.

Multiple same-scan measurements are applied one at a time ("cyclic"
incremental updates), relinearizing after every increment.  The
covariance-only gain ladder evaluates the trace reduction a beam
allocation would produce without needing measurement values; it holds the
linearization at the prediction point, which is what makes utilities
computable before any beam is fired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CovarianceDegeneracyError, NumericalSingularityError
from .kinematics import (
    Measurement,
    MotionModel,
    NoiseModel,
    RadarSite,
    TargetState,
    linearize,
    measurement_fn,
    wrap_angle,
)

_I4 = np.eye(4)


@dataclass
class TrackEstimate:
    """Filtered state of one target at one radar: estimate plus covariance."""

    target_id: int
    k: int
    x_hat: np.ndarray
    P: np.ndarray

    def copy(self) -> "TrackEstimate":
        return TrackEstimate(self.target_id, self.k, self.x_hat.copy(), self.P.copy())


@dataclass
class GainLadder:
    """Per-beam trace reductions and their sum for one allocation."""

    increments: list[float]
    total: float


def symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def assert_spd(P: np.ndarray, context: str = "", allow_psd: bool = False) -> None:
    """Raise if a covariance is asymmetric or not positive (semi)definite."""
    if not np.allclose(P, P.T, atol=1e-10):
        raise CovarianceDegeneracyError(f"covariance not symmetric {context}")
    eigs = np.linalg.eigvalsh(symmetrize(P))
    low = -1e-12 if allow_psd else 1e-15
    if eigs[0] < low:
        raise CovarianceDegeneracyError(
            f"covariance not positive definite (min eig {eigs[0]:.3e}) {context}"
        )


def predict(track: TrackEstimate, model: MotionModel) -> TrackEstimate:
    """Time update: x <- F x, P <- F P F' + Q (symmetrized)."""
    F = model.F
    x = F @ track.x_hat
    P = symmetrize(F @ track.P @ F.T + model.Q)
    return TrackEstimate(track.target_id, track.k, x, P)


def _inv2(S: np.ndarray) -> np.ndarray:
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    if not det > 0.0 or not np.isfinite(det):
        raise NumericalSingularityError(
            f"innovation covariance singular (det {det:.3e})"
        )
    return np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det


def _covariance_increment(
    P: np.ndarray, H: np.ndarray, R: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One covariance update; returns (gain K, updated P)."""
    PHt = P @ H.T
    S = H @ PHt + R
    K = PHt @ _inv2(S)
    P_new = symmetrize((_I4 - K @ H) @ P)
    return K, P_new


def update_cyclic(
    track: TrackEstimate,
    measurements: list[Measurement],
    noise: NoiseModel,
    sites: list[RadarSite],
) -> TrackEstimate:
    """Apply all same-scan measurements incrementally.

    Relinearizes at the running estimate before every increment; azimuth
    innovations are wrapped to (-pi, pi].  Measurements must carry the
    track's target id and scan index.
    """
    x = track.x_hat.copy()
    P = track.P.copy()
    for z in measurements:
        if z.target_id != track.target_id:
            raise ValueError(
                f"measurement for target {z.target_id} fed to track "
                f"{track.target_id}"
            )
        if z.k != track.k:
            raise ValueError(
                f"measurement from scan {z.k} fed to track at scan {track.k}"
            )
        site = sites[z.radar_id]
        state = TargetState.from_vector(x)
        H = linearize(site, state)
        R = noise.measurement_cov(z.radar_id, z.target_id)
        K, P = _covariance_increment(P, H, R)
        r_pred, a_pred = measurement_fn(site, state)
        innov = np.array([z.r - r_pred, wrap_angle(z.a - a_pred)])
        x = x + K @ innov
    return TrackEstimate(track.target_id, track.k, x, P)


def update_covariance_only(
    track: TrackEstimate,
    allocation: list[tuple[int, int]],
    noise: NoiseModel,
    sites: list[RadarSite],
) -> TrackEstimate:
    """Covariance update for an allocation without measurement values.

    The state estimate is kept; only P shrinks, with the linearization
    held at the current estimate (beams applied in canonical order).
    """
    state = TargetState.from_vector(track.x_hat)
    P = track.P
    for radar_id, count in sorted(allocation):
        if count <= 0:
            continue
        H = linearize(sites[radar_id], state)
        R = noise.measurement_cov(radar_id, track.target_id)
        for _ in range(count):
            _, P = _covariance_increment(P, H, R)
    return TrackEstimate(track.target_id, track.k, track.x_hat.copy(), P)


def gain_ladder(
    track_pred: TrackEstimate,
    allocation: list[tuple[int, int]],
    noise: NoiseModel,
    sites: list[RadarSite],
) -> GainLadder:
    """Trace-reduction ladder for an allocation, measurement-free.

    ``allocation`` lists (radar_id, beam_count) pairs; beams are applied
    in ascending radar id, then beam index.  Only the covariance update
    runs, with the linearization held at the prediction point, so the
    result depends on P, H and R alone.
    """
    state = TargetState.from_vector(track_pred.x_hat)
    P = track_pred.P
    increments: list[float] = []
    tr_prev = float(np.trace(P))
    for radar_id, count in sorted(allocation):
        if count <= 0:
            continue
        H = linearize(sites[radar_id], state)
        R = noise.measurement_cov(radar_id, track_pred.target_id)
        for _ in range(count):
            _, P = _covariance_increment(P, H, R)
            tr = float(np.trace(P))
            increments.append(tr_prev - tr)
            tr_prev = tr
    return GainLadder(increments=increments, total=float(sum(increments)))

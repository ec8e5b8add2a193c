"""The track selection games: strategy spaces, utilities and equilibria.

Two gain providers sit behind one interface.  The abstract table mode
feeds hand-set per-beam increments (used to test the equilibrium
structure results exactly); the EKF mode evaluates the covariance-only
trace-reduction ladder at each radar's own predicted tracks.  The
homogeneous full-connectivity game is the special case of the weighted
one with an all-ones interest matrix and the full graph.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Protocol

import numpy as np

from .errors import InfeasibleStrategySpaceError, InstanceTooLargeError
from .filtering import TrackEstimate, gain_ladder
from .kinematics import NoiseModel, RadarSite

#: Absolute tolerance for utility comparisons; keeps floating-point noise
#: from manufacturing spurious deviations.
UTILITY_TOL = 1e-9

Row = tuple[int, ...]
Profile = tuple[Row, ...]


@dataclass
class TopologySpec:
    """Observability sets T_i and communication neighborhoods N_i.

    Each neighborhood contains the radar itself.
    """

    observable: list[frozenset[int]]
    neighbors: list[frozenset[int]]

    def __post_init__(self):
        self.observable = [frozenset(s) for s in self.observable]
        self.neighbors = [frozenset(s) for s in self.neighbors]
        for i, ni in enumerate(self.neighbors):
            if i not in ni:
                raise ValueError(f"radar {i} missing from its own neighborhood")

    @classmethod
    def full(cls, n_radars: int, n_targets: int) -> "TopologySpec":
        all_t = frozenset(range(n_targets))
        all_n = frozenset(range(n_radars))
        return cls([all_t] * n_radars, [all_n] * n_radars)

    @property
    def n_radars(self) -> int:
        return len(self.observable)

    def is_full(self, n_targets: int) -> bool:
        all_t = frozenset(range(n_targets))
        all_n = frozenset(range(self.n_radars))
        return all(t == all_t for t in self.observable) and all(
            n == all_n for n in self.neighbors
        )


@dataclass
class InterestMatrix:
    """Nonnegative per-(radar, target) weights; every row has support."""

    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if np.any(self.w < 0):
            raise ValueError("interest weights must be nonnegative")
        if np.any(self.w.sum(axis=1) <= 0):
            raise ValueError("every radar needs at least one positive weight")

    @classmethod
    def ones(cls, n_radars: int, n_targets: int) -> "InterestMatrix":
        return cls(np.ones((n_radars, n_targets)))


class GainProvider(Protocol):
    """Maps a per-target beam allocation to a tracking-accuracy gain."""

    def gain(
        self, radar_id: int, target_id: int, allocation: tuple[tuple[int, int], ...]
    ) -> float: ...

    def max_single_beam_gain(self) -> float: ...


@dataclass
class GainTable:
    """Abstract-game gains: explicit per-target increment ladders.

    Increments must be positive (gains increase with measurements) and
    strictly decreasing within each target (diminishing returns).  The
    case-(b) structure additionally requires every level-p increment to
    dominate every level-(p+1) increment across targets.
    """

    increments: np.ndarray  # shape (n_targets, depth)

    def __post_init__(self):
        self.increments = np.asarray(self.increments, dtype=float)
        if self.increments.ndim != 2:
            raise ValueError("increments must be a (targets, depth) array")
        if np.any(self.increments <= 0):
            raise ValueError("all gain increments must be positive")
        if np.any(np.diff(self.increments, axis=1) >= 0):
            raise ValueError("increments must strictly decrease per target")
        self._cum = np.concatenate(
            [np.zeros((self.increments.shape[0], 1)), np.cumsum(self.increments, axis=1)],
            axis=1,
        )

    @classmethod
    def case_a(cls, levels: Iterable[float], n_targets: int) -> "GainTable":
        """Identical ladders for all targets."""
        levels = np.asarray(list(levels), dtype=float)
        return cls(np.tile(levels, (n_targets, 1)))

    @classmethod
    def case_b(
        cls, levels: Iterable[float], n_targets: int, spread: float = 0.4
    ) -> "GainTable":
        """Target-dependent ladders with cross-target level separation.

        Target j's level-p increment is levels[p] * (1 + spread * j / T);
        the base levels must be separated enough that the smallest level-p
        value still exceeds the largest level-(p+1) value.
        """
        levels = np.asarray(list(levels), dtype=float)
        factors = 1.0 + spread * np.arange(n_targets) / max(n_targets, 1)
        inc = np.outer(factors, levels)
        table = cls(inc)
        if not table.is_case_b():
            raise ValueError("levels/spread do not satisfy the case-(b) separation")
        return table

    def is_case_a(self) -> bool:
        return bool(np.all(self.increments == self.increments[0]))

    def is_case_b(self) -> bool:
        per_level_min = self.increments.min(axis=0)
        per_level_max = self.increments.max(axis=0)
        return bool(np.all(per_level_min[:-1] > per_level_max[1:]))

    def gain_at(self, target_id: int, m: int) -> float:
        if m > self.increments.shape[1]:
            raise ValueError(
                f"gain table depth {self.increments.shape[1]} < {m} measurements"
            )
        return float(self._cum[target_id, m])

    def gain(self, radar_id, target_id, allocation) -> float:
        m = sum(c for _, c in allocation)
        return self.gain_at(target_id, m)

    def max_single_beam_gain(self) -> float:
        return float(self.increments[:, 0].max())


class EkfCovarianceGains:
    """Measurement-free gain oracle over each radar's predicted tracks.

    ``tracks[(i, j)]`` holds radar i's prediction for target j; gains are
    cached per (radar, target, allocation) and the cache must be cleared
    whenever the tracks change.
    """

    def __init__(
        self,
        tracks: dict[tuple[int, int], TrackEstimate],
        noise: NoiseModel,
        sites: list[RadarSite],
    ):
        self.tracks = tracks
        self.noise = noise
        self.sites = sites
        self._cache: dict[tuple, float] = {}
        self._max_single: float | None = None
        # radars sharing a track object (same fusion history) share cache
        # entries; keyed by object identity
        reps: dict[tuple[int, int], int] = {}
        self._rep: dict[tuple[int, int], int] = {}
        for (i, j), tr in tracks.items():
            key = (id(tr), j)
            self._rep[(i, j)] = reps.setdefault(key, i)

    def clear_cache(self) -> None:
        self._cache.clear()
        self._max_single = None

    def ladder(
        self, radar_id: int, target_id: int, allocation: tuple[tuple[int, int], ...]
    ):
        return gain_ladder(
            self.tracks[(radar_id, target_id)], list(allocation), self.noise, self.sites
        )

    def gain(self, radar_id, target_id, allocation) -> float:
        allocation = tuple(sorted((l, c) for l, c in allocation if c > 0))
        if not allocation:
            return 0.0
        rep = self._rep.get((radar_id, target_id), radar_id)
        key = (rep, target_id, allocation)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.ladder(radar_id, target_id, allocation).total
            self._cache[key] = hit
        return hit

    def max_single_beam_gain(self) -> float:
        if self._max_single is None:
            self._max_single = max(
                self.gain(i, j, ((i, 1),)) for (i, j) in self.tracks
            )
        return self._max_single


class HoldHorizonGains:
    """Gain oracle for a plan that will be held fixed for several scans.

    The value of an allocation on one target is the total trace reduction
    it produces relative to leaving the target unmeasured, accumulated
    over the hold window: the covariance is predicted forward and updated
    with the same allocation at every step.  With horizon 1 this reduces
    to the per-scan oracle; longer horizons heavily penalize plans that
    starve a target.
    """

    def __init__(
        self,
        tracks: dict[tuple[int, int], TrackEstimate],
        noise: NoiseModel,
        sites: list[RadarSite],
        motion,
        horizon: int = 1,
    ):
        self.base = EkfCovarianceGains(tracks, noise, sites)
        self.noise = noise
        self.sites = sites
        self.motion = motion
        self.horizon = max(int(horizon), 1)
        self._cache: dict[tuple, float] = {}
        self._nominal: dict[tuple, list[float]] = {}

    def _nominal_traces(self, rep: int, target_id: int) -> list[float]:
        """Per-step traces of the never-measured covariance evolution."""
        key = (rep, target_id)
        traces = self._nominal.get(key)
        if traces is None:
            from .filtering import predict

            track = self.base.tracks[(rep, target_id)]
            traces = [float(np.trace(track.P))]
            cur = track
            for _ in range(self.horizon - 1):
                cur = predict(cur, self.motion)
                traces.append(float(np.trace(cur.P)))
            self._nominal[key] = traces
        return traces

    def gain(self, radar_id, target_id, allocation) -> float:
        from .filtering import predict, update_covariance_only

        allocation = tuple(sorted((l, c) for l, c in allocation if c > 0))
        if not allocation:
            return 0.0
        rep = self.base._rep.get((radar_id, target_id), radar_id)
        key = (rep, target_id, allocation)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        nominal = self._nominal_traces(rep, target_id)
        track = self.base.tracks[(rep, target_id)]
        cur = track.copy()
        total = 0.0
        for step in range(self.horizon):
            if step > 0:
                cur = predict(cur, self.motion)
            cur = update_covariance_only(cur, list(allocation), self.noise, self.sites)
            total += nominal[step] - float(np.trace(cur.P))
        self._cache[key] = total
        return total

    def max_single_beam_gain(self) -> float:
        return self.base.max_single_beam_gain()


@dataclass
class GameContext:
    """Everything needed to evaluate utilities and enumerate strategies."""

    n_radars: int
    n_targets: int
    m: int
    topology: TopologySpec
    weights: InterestMatrix
    gains: GainProvider
    mode: str = "distinct"  # distinct | multiset
    cap: int = 10**7
    _rows: dict[int, list[Row]] = field(default_factory=dict, repr=False)
    _colval: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._neighbor_order = [
            sorted(self.topology.neighbors[i]) for i in range(self.n_radars)
        ]

    def rows_for(self, radar_id: int) -> list[Row]:
        rows = self._rows.get(radar_id)
        if rows is None:
            rows = enumerate_strategies(
                radar_id, self.m, self.topology, self.mode, self.n_targets
            )
            self._rows[radar_id] = rows
        return rows

    def joint_space_size(self) -> int:
        return math.prod(len(self.rows_for(i)) for i in range(self.n_radars))

    def column_value(self, radar_id: int, target_id: int, column: tuple) -> float:
        """Weighted gain one radar draws from one target's beam column.

        Columns repeat heavily across profiles, so values are memoized
        per (radar, target, column); the cache lives as long as the
        context (one scan's game).
        """
        key = (radar_id, target_id, column)
        v = self._colval.get(key)
        if v is None:
            w = self.weights.w[radar_id, target_id]
            v = 0.0
            if w != 0.0:
                alloc = tuple(
                    (l, column[l])
                    for l in self._neighbor_order[radar_id]
                    if column[l] > 0
                )
                if alloc:
                    v = w * self.gains.gain(radar_id, target_id, alloc)
            self._colval[key] = v
        return v

    def profile_utility(self, profile: Profile, radar_id: int) -> float:
        return sum(
            self.column_value(
                radar_id, j, tuple(int(row[j]) for row in profile)
            )
            for j in range(self.n_targets)
        )

    def profile_welfare(self, profile: Profile) -> float:
        total = 0.0
        for j in range(self.n_targets):
            col = tuple(int(row[j]) for row in profile)
            for i in range(self.n_radars):
                total += self.column_value(i, j, col)
        return total


def validate_profile(profile, ctx: GameContext) -> np.ndarray:
    s = np.asarray(profile, dtype=int)
    if s.shape != (ctx.n_radars, ctx.n_targets):
        raise ValueError(
            f"profile shape {s.shape} != ({ctx.n_radars}, {ctx.n_targets})"
        )
    if np.any(s < 0):
        raise ValueError("beam counts must be nonnegative")
    for i in range(ctx.n_radars):
        if s[i].sum() > ctx.m:
            raise ValueError(f"radar {i} exceeds its beam budget {ctx.m}")
        for j in range(ctx.n_targets):
            if s[i, j] > 0 and j not in ctx.topology.observable[i]:
                raise ValueError(f"radar {i} cannot observe target {j}")
    return s


def measurement_count(profile, topology: TopologySpec, radar_id: int, target_id: int) -> int:
    """Beams on a target as seen through radar_id's neighborhood."""
    s = np.asarray(profile, dtype=int)
    return int(sum(s[l, target_id] for l in topology.neighbors[radar_id]))


def column_allocation(
    profile, topology: TopologySpec, radar_id: int, target_id: int
) -> tuple[tuple[int, int], ...]:
    """(contributor, count) pairs for a target, restricted to N_i, sorted."""
    s = np.asarray(profile, dtype=int)
    return tuple(
        (l, int(s[l, target_id]))
        for l in sorted(topology.neighbors[radar_id])
        if s[l, target_id] > 0
    )


def utility(
    profile,
    radar_id: int,
    gains: GainProvider,
    topology: TopologySpec,
    weights: InterestMatrix,
) -> float:
    """Weighted sum of per-target gains visible to one radar."""
    s = np.asarray(profile, dtype=int)
    w = weights.w[radar_id]
    total = 0.0
    for j in range(s.shape[1]):
        if w[j] == 0:
            continue
        alloc = column_allocation(s, topology, radar_id, j)
        if alloc:
            total += w[j] * gains.gain(radar_id, j, alloc)
    return total


def social_welfare(
    profile,
    gains: GainProvider,
    topology: TopologySpec,
    weights: InterestMatrix,
) -> float:
    s = np.asarray(profile, dtype=int)
    return sum(
        utility(s, i, gains, topology, weights) for i in range(s.shape[0])
    )


def enumerate_strategies(
    radar_id: int,
    m: int,
    topology: TopologySpec,
    mode: str,
    n_targets: int,
) -> list[Row]:
    """All strategy rows for one radar, as count vectors over all targets.

    distinct: every m-subset of observable targets, one beam each.
    multiset: every multiset of size exactly m over observable targets.
    """
    observable = sorted(topology.observable[radar_id])
    if mode == "distinct":
        if len(observable) < m:
            raise InfeasibleStrategySpaceError(
                f"radar {radar_id} observes {len(observable)} targets, "
                f"cannot pick {m} distinct ones"
            )
        combos = itertools.combinations(observable, m)
    elif mode == "multiset":
        combos = itertools.combinations_with_replacement(observable, m)
    else:
        raise ValueError(f"unknown strategy mode {mode!r}")
    rows = []
    for combo in combos:
        row = [0] * n_targets
        for j in combo:
            row[j] += 1
        rows.append(tuple(row))
    return rows


def iter_profiles(ctx: GameContext) -> Iterator[Profile]:
    size = ctx.joint_space_size()
    if size > ctx.cap:
        raise InstanceTooLargeError(size, ctx.cap)
    yield from itertools.product(*(ctx.rows_for(i) for i in range(ctx.n_radars)))


def _utilities(profile, ctx: GameContext) -> list[float]:
    p = tuple(tuple(int(v) for v in row) for row in np.asarray(profile, dtype=int))
    return [ctx.profile_utility(p, i) for i in range(ctx.n_radars)]


def is_pure_nash(profile, ctx: GameContext) -> tuple[bool, tuple[int, Row] | None]:
    """Check for improving unilateral deviations.

    Returns (is_nash, best_deviation) where best_deviation is the
    (radar, row) pair with the largest improvement, or None.
    """
    s = validate_profile(profile, ctx)
    p = tuple(tuple(int(v) for v in row) for row in s)
    best_gain = UTILITY_TOL
    best_dev: tuple[int, Row] | None = None
    for i in range(ctx.n_radars):
        base = ctx.profile_utility(p, i)
        for row in ctx.rows_for(i):
            if p[i] == row:
                continue
            trial = p[:i] + (row,) + p[i + 1:]
            u = ctx.profile_utility(trial, i)
            if u - base > best_gain:
                best_gain = u - base
                best_dev = (i, row)
    return best_dev is None, best_dev


def enumerate_nash(ctx: GameContext) -> list[Profile]:
    """All pure Nash equilibria, by full joint-space enumeration."""
    return [p for p in iter_profiles(ctx) if is_pure_nash(np.array(p), ctx)[0]]


def price_of_anarchy(ctx: GameContext) -> float | None:
    """Optimal welfare over worst-NE welfare; None when no pure NE exists."""
    best = -math.inf
    worst_ne = math.inf
    found_ne = False
    for p in iter_profiles(ctx):
        w = ctx.profile_welfare(p)
        if w > best:
            best = w
        if is_pure_nash(np.array(p), ctx)[0]:
            found_ne = True
            worst_ne = min(worst_ne, w)
    if not found_ne:
        return None
    return best / worst_ne


def best_profile_exhaustive(ctx: GameContext) -> Profile:
    """Welfare argmax over the joint space, lexicographically tie-broken.

    Welfare is a sum of per-target column values, so the search fills one
    welfare tensor (one axis per radar) target by target: each target
    contributes a lookup table over its distinct beam columns, broadcast
    across the joint space.  This is equivalent to enumerating every
    profile but avoids the per-profile Python loop.
    """
    size = ctx.joint_space_size()
    if size > ctx.cap:
        raise InstanceTooLargeError(size, ctx.cap)
    n = ctx.n_radars
    rows = [ctx.rows_for(i) for i in range(n)]
    shape = tuple(len(r) for r in rows)
    welfare = np.zeros(shape)
    for j in range(ctx.n_targets):
        counts = [
            np.array([row[j] for row in rows[i]], dtype=np.int64) for i in range(n)
        ]
        base = max(int(c.max()) for c in counts) + 1
        code = np.zeros(shape, dtype=np.int64)
        for i in range(n):
            axes = [1] * n
            axes[i] = -1
            code = code * base + counts[i].reshape(axes)
        uniq, inverse = np.unique(code, return_inverse=True)
        values = np.empty(len(uniq))
        for u_idx, u in enumerate(uniq):
            rem = int(u)
            col = [0] * n
            for i in range(n - 1, -1, -1):
                col[i] = rem % base
                rem //= base
            col_t = tuple(col)
            values[u_idx] = sum(ctx.column_value(i, j, col_t) for i in range(n))
        welfare += values[inverse].reshape(shape)
    flat = welfare.ravel()
    candidates = np.flatnonzero(flat >= flat.max() - UTILITY_TOL)
    profiles = []
    for c in candidates:
        idx = np.unravel_index(int(c), shape)
        profiles.append(tuple(rows[i][idx[i]] for i in range(n)))
    return min(profiles)

"""Per-radar track selection policies.

All selectors share simultaneous-update semantics: every radar reads the
previous scan's beam counts, then all commit new strategies together.
Randomness comes from a per-radar substream owned by the engine, so a
fixed seed gives bit-identical strategy sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MuViolationError
from .game import (
    GainProvider,
    GameContext,
    InterestMatrix,
    Row,
    TopologySpec,
    best_profile_exhaustive,
    enumerate_strategies,
    utility,
)

UTILITY_TOL = 1e-9


@dataclass
class SelectorContext:
    """Per-scan snapshot handed to every selector."""

    k: int
    n_radars: int
    n_targets: int
    m: int
    topology: TopologySpec
    weights: InterestMatrix
    b: np.ndarray                       # range-accuracy coefficients, N x T
    gains: GainProvider                 # covariance-only oracle for this scan
    ceil_level: int                     # ceil(N * m / T)
    game_ctx: GameContext | None = None  # set when centralized planning runs


def greedy_row(radar_id: int, ctx_b: np.ndarray, observable, m: int, n_targets: int) -> np.ndarray:
    """Accuracy-greedy distinct row: the m smallest-b observable targets."""
    order = sorted(observable, key=lambda j: (ctx_b[radar_id, j], j))
    row = np.zeros(n_targets, dtype=int)
    for j in order[:m]:
        row[j] = 1
    return row


def random_distinct_row(rng, observable, m: int, n_targets: int) -> np.ndarray:
    chosen = rng.choice(sorted(observable), size=m, replace=False)
    row = np.zeros(n_targets, dtype=int)
    for j in chosen:
        row[j] = 1
    return row


def counterfactual_utilities(
    profile: np.ndarray,
    radar_id: int,
    rows: list[Row],
    gains: GainProvider,
    topology: TopologySpec,
    weights: InterestMatrix,
) -> np.ndarray:
    """Utility radar_id would have seen under each own row, others fixed."""
    s = np.asarray(profile, dtype=int).copy()
    own = s[radar_id].copy()
    out = np.empty(len(rows))
    for idx, row in enumerate(rows):
        s[radar_id] = row
        out[idx] = utility(s, radar_id, gains, topology, weights)
    s[radar_id] = own
    return out


def lcbrd_step(
    row: np.ndarray,
    counts: np.ndarray,
    b_row: np.ndarray,
    observable,
    ceil_level: int,
    alpha: float,
    rng,
) -> np.ndarray:
    """One balancing move of the low-complexity best-response scheme.

    s1 splits duplicate own beams onto min-count unselected targets; then,
    with probability alpha, s2 moves a single beam either off an overfull
    target or toward a strictly more accurate min-count target.  Counts
    are the previous scan's totals as seen through the radar's
    neighborhood and are adjusted locally as beams move.
    """
    row = np.asarray(row, dtype=int).copy()
    counts = np.asarray(counts, dtype=int).copy()
    observable = sorted(observable)

    def unselected():
        return [j for j in observable if row[j] == 0]

    # s1: no duplicate beams on one target
    for j in [q for q in observable if row[q] > 1]:
        while row[j] > 1:
            cand = unselected()
            if not cand:
                break
            dest = min(cand, key=lambda q: (counts[q], q))
            row[j] -= 1
            counts[j] -= 1
            row[dest] += 1
            counts[dest] += 1

    # s2: at most one balancing move, taken with probability alpha
    if rng.random() < alpha:
        selected = [j for j in observable if row[j] > 0]
        free = unselected()
        if selected and free:
            overfull = [j for j in selected if counts[j] > ceil_level]
            if overfull:
                src = overfull[0]
                min_count = min(counts[q] for q in free)
                pool = [q for q in free if counts[q] == min_count]
                dest = min(pool, key=lambda q: (b_row[q], q))
                row[src] -= 1
                row[dest] += 1
            else:
                src = min(selected, key=lambda q: (-counts[q], q))
                min_count = min(counts[q] for q in free)
                pool = [q for q in free if counts[q] == min_count]
                dest = min(pool, key=lambda q: (b_row[q], q))
                gap = counts[src] - counts[dest]
                # gap >= 2: the gained increment sits at a strictly lower
                # level than the lost one, so the move always pays; at
                # gap 1 both sit at the same level and accuracy decides.
                if gap >= 2 or (gap == 1 and b_row[dest] < b_row[src]):
                    row[src] -= 1
                    row[dest] += 1
    return row


class Selector:
    """Base class; one instance per radar."""

    shares_measurements = True
    strategy_mode = "distinct"

    def __init__(self, radar_id: int):
        self.radar_id = radar_id
        self.rng: np.random.Generator | None = None

    def reset(self, rng, b: np.ndarray, observable, m: int, n_targets: int,
              init: str = "greedy") -> np.ndarray:
        """Bind the rng and return the scan-0 strategy row."""
        self.rng = rng
        if init == "random":
            row = random_distinct_row(rng, observable, m, n_targets)
        else:
            row = greedy_row(self.radar_id, b, observable, m, n_targets)
        self.current = row
        return row

    def select(
        self,
        ctx: SelectorContext,
        counts: np.ndarray,
        neighbor_profile: np.ndarray | None = None,
    ) -> np.ndarray:
        raise NotImplementedError

    def record_outcome(self, ctx: SelectorContext, own_utility: float,
                       profile: np.ndarray) -> None:
        pass

    @property
    def reverted(self) -> bool:
        return False


class LcbrdSelector(Selector):
    """Low-complexity best response with revert, reinitialization and kicks.

    The balancing move consults the gain oracle directly: per scan it
    evaluates the weighted-utility change of dropping each own beam and
    of adding a beam on each free target, then takes the best single
    exchange if it strictly improves.  Because distinct target columns
    contribute additively, a profile every radar leaves unchanged is a
    pure Nash equilibrium.
    """

    def __init__(self, radar_id: int, alpha: float = 0.5, epsilon: float = 0.0,
                 k_reinit: int | None = None, use_s4: bool = True):
        super().__init__(radar_id)
        self.alpha = alpha
        self.epsilon = epsilon
        self.k_reinit = k_reinit
        self.use_s4 = use_s4
        self.prev_row: np.ndarray | None = None
        self.prev_utility: float | None = None
        self.skip_next = False
        self._reverted = False

    @property
    def reverted(self) -> bool:
        return self._reverted

    def _beam_delta(self, ctx: SelectorContext, others: np.ndarray,
                    own_count: int, j: int, delta: int) -> float:
        """Weighted utility change of moving this radar's beam count on
        target j by delta, with every neighbor's allocation held fixed."""
        i = self.radar_id
        w = ctx.weights.w[i, j]
        if w == 0.0:
            return 0.0

        def level_gain(own: int) -> float:
            alloc = [(l, int(others[l, j])) for l in range(ctx.n_radars)
                     if others[l, j] > 0]
            if own > 0:
                alloc.append((i, own))
            if not alloc:
                return 0.0
            return ctx.gains.gain(i, j, tuple(sorted(alloc)))

        return w * (level_gain(own_count + delta) - level_gain(own_count))

    def _step(self, ctx: SelectorContext, neighbor_profile: np.ndarray,
              observable) -> np.ndarray:
        i = self.radar_id
        row = self.current.copy()
        others = neighbor_profile.copy()
        others[i] = 0

        def free():
            return [j for j in observable if row[j] == 0]

        # split duplicate beams onto the most valuable free targets
        for j in [q for q in observable if row[q] > 1]:
            while row[j] > 1:
                cand = free()
                if not cand:
                    break
                dest = max(
                    cand,
                    key=lambda q: (self._beam_delta(ctx, others, 0, q, +1), -q),
                )
                row[j] -= 1
                row[dest] += 1

        # with probability alpha, take the best single-beam exchange if
        # it strictly improves own utility
        if self.rng.random() < self.alpha:
            selected = [j for j in observable if row[j] > 0]
            cand = free()
            if selected and cand:
                src = max(
                    selected,
                    key=lambda q: (
                        self._beam_delta(ctx, others, int(row[q]), q, -1), -q
                    ),
                )
                dest = max(
                    cand,
                    key=lambda q: (self._beam_delta(ctx, others, 0, q, +1), -q),
                )
                value = (
                    self._beam_delta(ctx, others, int(row[src]), src, -1)
                    + self._beam_delta(ctx, others, 0, dest, +1)
                )
                if value > UTILITY_TOL:
                    row[src] -= 1
                    row[dest] += 1
        return row

    def select(self, ctx: SelectorContext, counts: np.ndarray,
               neighbor_profile: np.ndarray | None = None) -> np.ndarray:
        i = self.radar_id
        observable = sorted(ctx.topology.observable[i])
        if self.k_reinit and ctx.k > 1 and (ctx.k - 1) % self.k_reinit == 0:
            # restart the search from a fresh random point
            self.current = random_distinct_row(self.rng, observable, ctx.m,
                                               ctx.n_targets)
            self.prev_row = None
            self.prev_utility = None
            self.skip_next = False
            return self.current.copy()
        if self.skip_next:
            # post-revert scan: play the restored strategy, skip one step
            self.skip_next = False
            return self.current.copy()
        if self.epsilon > 0 and self.rng.random() < self.epsilon:
            self.current = random_distinct_row(self.rng, observable, ctx.m,
                                               ctx.n_targets)
        elif neighbor_profile is not None:
            self.current = self._step(ctx, neighbor_profile, observable)
        else:
            self.current = lcbrd_step(
                self.current, counts, ctx.b[i], observable, ctx.ceil_level,
                self.alpha, self.rng,
            )
        return self.current.copy()

    def record_outcome(self, ctx, own_utility, profile) -> None:
        self._reverted = False
        if self.use_s4 and self.prev_row is not None:
            # value the previous strategy inside this scan's game, so the
            # comparison stays meaningful when the tracks (and hence the
            # gains) drift between scans
            s = np.asarray(profile, dtype=int).copy()
            s[self.radar_id] = self.prev_row
            u_prev = utility(s, self.radar_id, ctx.gains, ctx.topology,
                             ctx.weights)
            if own_utility < u_prev - UTILITY_TOL:
                # discard this scan's strategy, restore the previous one
                self.current = self.prev_row.copy()
                self.skip_next = True
                self._reverted = True
                return
        self.prev_row = self.current.copy()
        self.prev_utility = own_utility


class StandaloneSelector(Selector):
    """Non-cooperative baseline: cycles its beams over targets in blocks.

    With targets (t0, .., t4) and m=2 the scan sequence is {t0,t1},
    {t2,t3}, {t4,t0}, ...  No measurements are sent or received.
    """

    shares_measurements = False

    def __init__(self, radar_id: int):
        super().__init__(radar_id)
        self._ptr = 0

    def select(self, ctx: SelectorContext, counts: np.ndarray,
               neighbor_profile: np.ndarray | None = None) -> np.ndarray:
        targets = sorted(ctx.topology.observable[self.radar_id])
        row = np.zeros(ctx.n_targets, dtype=int)
        for off in range(ctx.m):
            row[targets[(self._ptr + off) % len(targets)]] += 1
        self._ptr = (self._ptr + ctx.m) % len(targets)
        self.current = row
        return row.copy()


class RandomKSelector(Selector):
    """Uniform random distinct row, redrawn every K scans."""

    def __init__(self, radar_id: int, K: int = 10):
        super().__init__(radar_id)
        self.K = K

    def select(self, ctx: SelectorContext, counts: np.ndarray,
               neighbor_profile: np.ndarray | None = None) -> np.ndarray:
        if ctx.k == 1 or (ctx.k - 1) % self.K == 0:
            self.current = random_distinct_row(
                self.rng, ctx.topology.observable[self.radar_id], ctx.m,
                ctx.n_targets,
            )
        return self.current.copy()


class CentralizedPlanner:
    """Shared exhaustive-search planner re-run every K scans."""

    def __init__(self, K: int = 1):
        self.K = K
        self._assignment: np.ndarray | None = None
        self._last_k = None

    def assignment(self, ctx: SelectorContext) -> np.ndarray:
        stale = (
            self._assignment is None
            or ctx.k == 1
            or (ctx.k - 1) % self.K == 0
        )
        if stale and self._last_k != ctx.k:
            profile = best_profile_exhaustive(ctx.game_ctx)
            self._assignment = np.asarray(profile, dtype=int)
            self._last_k = ctx.k
        return self._assignment


class CentralizedSelector(Selector):
    """Plays its row of the welfare-optimal profile found by the planner."""

    def __init__(self, radar_id: int, planner: CentralizedPlanner):
        super().__init__(radar_id)
        self.planner = planner

    def select(self, ctx: SelectorContext, counts: np.ndarray,
               neighbor_profile: np.ndarray | None = None) -> np.ndarray:
        self.current = self.planner.assignment(ctx)[self.radar_id].copy()
        return self.current.copy()


def regret_update(
    D: np.ndarray, played: int, counterfactuals: np.ndarray, theta_k: float
) -> np.ndarray:
    """One discounted average-regret step.

    All rows decay by (1 - theta_k); the played row additionally absorbs
    theta_k times the counterfactual payoff differences.  With
    theta_k = 1/k this reproduces the batch time-average exactly.
    """
    D = D * (1.0 - theta_k)
    D[played] += theta_k * (counterfactuals - counterfactuals[played])
    return D


def regret_probabilities(
    D: np.ndarray, played: int, mu: float
) -> np.ndarray:
    """Switch probabilities linear in the positive part of the regrets."""
    regrets = np.maximum(D[played], 0.0)
    regrets[played] = 0.0
    total = float(regrets.sum())
    if total >= mu:
        raise MuViolationError(mu, total)
    pi = regrets / mu
    pi[played] = 1.0 - total / mu
    return pi


#: Minimum stay probability under the adaptive normalization: without an
#: explicit mu the switch distribution is proportional to the positive
#: regrets, scaled so at least this much mass stays on the current row.
RM_MIN_STAY = 0.05


class RegretMatchingSelector(Selector):
    """Adaptive play whose empirical profile distribution tracks the CE set.

    With an explicit ``mu`` the switch probabilities are the positive
    regrets divided by that fixed normalization (validity asserted every
    draw).  By default the normalization adapts per draw to the current
    positive-regret sum: utilities shrink by orders of magnitude as
    tracking converges, and any fixed normalization calibrated early
    drives every switch probability to zero, freezing the play.
    """

    strategy_mode = "multiset"

    def __init__(self, radar_id: int, theta: float | str = 0.5,
                 mu: float | None = None):
        super().__init__(radar_id)
        self.theta = theta
        self.mu = mu  # fixed normalization; None selects the adaptive one
        self.rows: list[Row] | None = None
        self.D: np.ndarray | None = None
        self.current_idx: int | None = None

    def _ensure_rows(self, ctx: SelectorContext) -> None:
        if self.rows is None:
            self.rows = enumerate_strategies(
                self.radar_id, ctx.m, ctx.topology, self.strategy_mode,
                ctx.n_targets,
            )
            self.D = np.zeros((len(self.rows), len(self.rows)))
            self.current_idx = self.rows.index(tuple(self.current))

    def theta_at(self, k: int) -> float:
        if self.theta == "1/k":
            return 1.0 / k
        return float(self.theta)

    def _normalization(self) -> float:
        if self.mu is not None:
            return self.mu
        regrets = np.maximum(self.D[self.current_idx], 0.0)
        regrets[self.current_idx] = 0.0
        return max(float(regrets.sum()) / (1.0 - RM_MIN_STAY), 1e-300)

    def select(self, ctx: SelectorContext, counts: np.ndarray,
               neighbor_profile: np.ndarray | None = None) -> np.ndarray:
        self._ensure_rows(ctx)
        if ctx.k > 1:
            pi = regret_probabilities(self.D, self.current_idx,
                                      self._normalization())
            self.current_idx = int(self.rng.choice(len(self.rows), p=pi))
        self.current = np.array(self.rows[self.current_idx], dtype=int)
        return self.current.copy()

    def record_outcome(self, ctx, own_utility, profile) -> None:
        cf = counterfactual_utilities(
            profile, self.radar_id, self.rows, ctx.gains, ctx.topology,
            ctx.weights,
        )
        self.D = regret_update(self.D, self.current_idx, cf, self.theta_at(ctx.k))

    def max_average_regret(self) -> float:
        if self.D is None:
            return 0.0
        return float(self.D.max())


def build_selectors(spec, n_radars: int) -> list[Selector]:
    """Instantiate one selector per radar from a SelectorSpec."""
    kind = spec.kind
    if kind == "lcbrd":
        return [
            LcbrdSelector(i, alpha=spec.alpha, epsilon=spec.epsilon,
                          k_reinit=spec.K, use_s4=spec.s4)
            for i in range(n_radars)
        ]
    if kind == "rm":
        return [
            RegretMatchingSelector(i, theta=spec.theta, mu=spec.mu)
            for i in range(n_radars)
        ]
    if kind == "standalone":
        return [StandaloneSelector(i) for i in range(n_radars)]
    if kind == "random":
        return [RandomKSelector(i, K=spec.K or 1) for i in range(n_radars)]
    if kind == "centralized":
        planner = CentralizedPlanner(K=spec.K or 1)
        return [CentralizedSelector(i, planner) for i in range(n_radars)]
    raise ValueError(f"unknown selector kind {kind!r}")

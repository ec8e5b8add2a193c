"""Scenario configuration: schema, validation, file loading.

Scenario files are YAML with a ``.scn`` extension.  Every field has a
documented default; validation errors carry the dotted path of the
offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ScenarioError
from .game import GainTable, InterestMatrix, TopologySpec
from .kinematics import MotionModel, NoiseModel, RadarSite, TargetState
from .rng import TAG_BMAT, substream

SCHEMA_VERSION = 1

SELECTOR_KINDS = ("lcbrd", "rm", "standalone", "random", "centralized")


@dataclass
class SelectorSpec:
    """Selector kind plus its algorithm parameters."""

    kind: str = "lcbrd"
    alpha: float = 0.5
    epsilon: float = 0.0
    theta: float | str = 0.5
    mu: float | None = None
    K: int | None = None
    s4: bool = True
    init: str = "greedy"  # greedy | random
    label: str | None = None

    def __post_init__(self):
        if self.kind not in SELECTOR_KINDS:
            raise ScenarioError("selector.kind", f"unknown kind {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ScenarioError("selector.alpha", "must be in [0, 1]")
        if not 0.0 <= self.epsilon < 1.0:
            raise ScenarioError("selector.epsilon", "must be in [0, 1)")
        if self.K is not None and self.K < 1:
            raise ScenarioError("selector.K", "must be >= 1")
        if self.init not in ("greedy", "random"):
            raise ScenarioError("selector.init", f"unknown init {self.init!r}")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        parts = [self.kind]
        if self.kind == "lcbrd" and self.epsilon > 0:
            parts = [f"eps-lcbrd"]
        if self.K:
            parts.append(f"K{self.K}")
        return "-".join(parts)


@dataclass
class ScenarioConfig:
    """Full experiment description; see the bundled ``table12.scn``."""

    name: str
    radars: list[RadarSite]
    targets: list[TargetState]
    motion: MotionModel
    noise: NoiseModel
    m: int
    topology: TopologySpec
    weights: InterestMatrix
    selector: SelectorSpec
    horizon: int
    realizations: int
    seed: int
    init_cov: np.ndarray
    init_state_noise_std: float = 0.05
    gain_mode: str = "ekf"  # ekf | abstract
    gain_table: GainTable | None = None
    freeze_dynamics: bool = False
    record_nash: str = "auto"  # auto | on | off
    b_spec: dict | None = field(default=None, repr=False)  # for the manifest

    def __post_init__(self):
        n, t = len(self.radars), len(self.targets)
        if n < 1:
            raise ScenarioError("radars", "need at least one radar")
        if t < 1:
            raise ScenarioError("targets", "need at least one target")
        if not 1 <= self.m < t:
            raise ScenarioError("m", f"must satisfy 1 <= m < T (m={self.m}, T={t})")
        if self.horizon < 1:
            raise ScenarioError("horizon", "must be >= 1")
        if self.realizations < 1:
            raise ScenarioError("realizations", "must be >= 1")
        if self.noise.b.shape != (n, t):
            raise ScenarioError("b", f"shape {self.noise.b.shape} != ({n}, {t})")
        if self.weights.w.shape != (n, t):
            raise ScenarioError("weights", f"shape {self.weights.w.shape} != ({n}, {t})")
        if self.topology.n_radars != n:
            raise ScenarioError("topology", "radar count mismatch")
        for i, ti in enumerate(self.topology.observable):
            if any(j >= t for j in ti):
                raise ScenarioError(f"topology.observable[{i}]", "target index out of range")
        for i, ni in enumerate(self.topology.neighbors):
            if any(l >= n for l in ni):
                raise ScenarioError(f"topology.neighbors[{i}]", "radar index out of range")
        self.init_cov = np.asarray(self.init_cov, dtype=float)
        if self.init_cov.shape != (4, 4):
            raise ScenarioError("init_cov", "must be 4x4")
        if self.gain_mode not in ("ekf", "abstract"):
            raise ScenarioError("gain_mode", f"unknown mode {self.gain_mode!r}")
        if self.gain_mode == "abstract" and self.gain_table is None:
            raise ScenarioError("gain_table", "required when gain_mode is abstract")
        if self.record_nash not in ("auto", "on", "off"):
            raise ScenarioError("record_nash", "must be auto, on or off")

    @property
    def n_radars(self) -> int:
        return len(self.radars)

    @property
    def n_targets(self) -> int:
        return len(self.targets)


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}{key}", "missing required field")
    return d[key]


def _resolve_b(spec, n: int, t: int, seed: int) -> tuple[np.ndarray, dict]:
    """Either an explicit N x T matrix or uniform sampling from an interval."""
    if isinstance(spec, dict):
        low = float(spec.get("low", 1.0))
        high = float(spec.get("high", 4.5))
        if low < 1.0 or high < low:
            raise ScenarioError("b", f"need 1 <= low <= high, got [{low}, {high}]")
        u = substream(seed, TAG_BMAT).random((n, t))
        return low + (high - low) * u, {"low": low, "high": high}
    b = np.asarray(spec, dtype=float)
    return b, {"matrix": b.tolist()}


def _resolve_topology(spec, n: int, t: int) -> TopologySpec:
    if spec == "full" or spec is None:
        return TopologySpec.full(n, t)
    if not isinstance(spec, dict):
        raise ScenarioError("topology", "must be 'full' or a mapping")
    observable = spec.get("observable")
    neighbors = spec.get("neighbors")
    if observable is None:
        observable = [list(range(t))] * n
    if neighbors is None:
        neighbors = [list(range(n))] * n
    try:
        return TopologySpec(
            [frozenset(s) for s in observable],
            [frozenset(s) for s in neighbors],
        )
    except ValueError as e:
        raise ScenarioError("topology", str(e)) from e


def _resolve_weights(spec, n: int, t: int) -> InterestMatrix:
    if spec == "ones" or spec is None:
        return InterestMatrix.ones(n, t)
    try:
        return InterestMatrix(np.asarray(spec, dtype=float))
    except ValueError as e:
        raise ScenarioError("weights", str(e)) from e


def _resolve_gain_table(spec, t: int) -> GainTable:
    try:
        if "increments" in spec:
            return GainTable(np.asarray(spec["increments"], dtype=float))
        case = spec.get("case", "a")
        levels = spec.get("levels", [1.0, 0.5, 0.25])
        if case == "a":
            return GainTable.case_a(levels, t)
        if case == "b":
            return GainTable.case_b(levels, t, spread=float(spec.get("spread", 0.4)))
        raise ScenarioError("gain_table.case", f"unknown case {case!r}")
    except ValueError as e:
        raise ScenarioError("gain_table", str(e)) from e


def scenario_from_dict(d: dict, name: str = "scenario") -> ScenarioConfig:
    """Build and validate a config from a plain mapping, filling defaults."""
    if not isinstance(d, dict):
        raise ScenarioError("", "scenario root must be a mapping")
    try:
        radar_rows = _require(d, "radars", "")
        target_rows = _require(d, "targets", "")
        radars = [RadarSite(i, float(x), float(y)) for i, (x, y) in enumerate(radar_rows)]
        targets = [TargetState(*[float(v) for v in row]) for row in target_rows]
    except (TypeError, ValueError) as e:
        raise ScenarioError("radars/targets", f"malformed entry: {e}") from e
    n, t = len(radars), len(targets)
    seed = int(d.get("seed", 0))

    try:
        motion = MotionModel(
            t_u=float(d.get("t_u", 0.25)),
            sigma_w2=float(d.get("sigma_w2", 2.5e-5)),
        )
    except ValueError as e:
        raise ScenarioError("t_u/sigma_w2", str(e)) from e

    b, b_spec = _resolve_b(d.get("b", {"low": 1.0, "high": 4.5}), n, t, seed)
    try:
        noise = NoiseModel(
            sigma_a=float(d.get("sigma_a", 2e-3)),
            sigma_r=float(d.get("sigma_r", 0.015)),
            b=b,
        )
    except ValueError as e:
        raise ScenarioError("sigma_a/sigma_r/b", str(e)) from e

    sel_dict = d.get("selector", {}) or {}
    known = {"kind", "alpha", "epsilon", "theta", "mu", "K", "s4", "init", "label"}
    unknown = set(sel_dict) - known
    if unknown:
        raise ScenarioError(f"selector.{sorted(unknown)[0]}", "unknown field")
    selector = SelectorSpec(**sel_dict)

    cov_diag = d.get("init_cov_diag", [0.01, 0.01, 0.01, 0.01])
    init_cov = np.diag([float(v) for v in cov_diag])

    gain_mode = d.get("gain_mode", "ekf")
    gain_table = None
    if gain_mode == "abstract":
        gain_table = _resolve_gain_table(d.get("gain_table", {}), t)

    return ScenarioConfig(
        name=str(d.get("name", name)),
        radars=radars,
        targets=targets,
        motion=motion,
        noise=noise,
        m=int(_require(d, "m", "")),
        topology=_resolve_topology(d.get("topology", "full"), n, t),
        weights=_resolve_weights(d.get("weights", "ones"), n, t),
        selector=selector,
        horizon=int(d.get("horizon", 200)),
        realizations=int(d.get("realizations", 1)),
        seed=seed,
        init_cov=init_cov,
        init_state_noise_std=float(d.get("init_state_noise_std", 0.05)),
        gain_mode=gain_mode,
        gain_table=gain_table,
        freeze_dynamics=bool(d.get("freeze_dynamics", False)),
        record_nash=str(d.get("record_nash", "auto")),
        b_spec=b_spec,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(str(path), "scenario file not found")
    try:
        with open(path) as f:
            d = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ScenarioError(str(path), f"parse error: {e}") from e
    return scenario_from_dict(d, name=path.stem)


def config_to_dict(config: ScenarioConfig) -> dict:
    """Fully resolved config as plain data, for output manifests."""
    return {
        "schema_version": SCHEMA_VERSION,
        "name": config.name,
        "radars": [[r.x, r.y] for r in config.radars],
        "targets": [[s.x, s.y, s.vx, s.vy] for s in config.targets],
        "t_u": config.motion.t_u,
        "sigma_w2": config.motion.sigma_w2,
        "sigma_a": config.noise.sigma_a,
        "sigma_r": config.noise.sigma_r,
        "b": config.noise.b.tolist(),
        "m": config.m,
        "topology": {
            "observable": [sorted(s) for s in config.topology.observable],
            "neighbors": [sorted(s) for s in config.topology.neighbors],
        },
        "weights": config.weights.w.tolist(),
        "selector": {
            "kind": config.selector.kind,
            "alpha": config.selector.alpha,
            "epsilon": config.selector.epsilon,
            "theta": config.selector.theta,
            "mu": config.selector.mu,
            "K": config.selector.K,
            "s4": config.selector.s4,
            "init": config.selector.init,
            "label": config.selector.label,
        },
        "horizon": config.horizon,
        "realizations": config.realizations,
        "seed": config.seed,
        "init_cov_diag": np.diag(config.init_cov).tolist(),
        "init_state_noise_std": config.init_state_noise_std,
        "gain_mode": config.gain_mode,
        "gain_table": (
            config.gain_table.increments.tolist() if config.gain_table else None
        ),
        "freeze_dynamics": config.freeze_dynamics,
        "record_nash": config.record_nash,
    }

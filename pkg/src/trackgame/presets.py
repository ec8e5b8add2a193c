"""Bundled experiment setups.

Each compare preset returns a base scenario plus a selector menu; the
sweep preset additionally carries its spread points.  Geometry beyond
the reference tables (extra radars, the 15-target field) is generated
deterministically.
"""

from __future__ import annotations

from dataclasses import replace
from importlib import resources

import numpy as np

from .scenario import ScenarioConfig, SelectorSpec, load_scenario, scenario_from_dict


def table12_config(**overrides) -> ScenarioConfig:
    """The bundled three-radar five-target scenario."""
    path = resources.files("trackgame.data") / "table12.scn"
    with resources.as_file(path) as p:
        config = load_scenario(p)
    return replace(config, **overrides) if overrides else config


def _five_radar_dict() -> dict:
    return {
        "name": "five-radar",
        "radars": [[-10.0, 0.0], [3.0, 0.0], [10.0, 0.0], [-4.0, 0.0], [7.0, 0.0]],
        "targets": [
            [1.0, 6.0, 0.5, 0.1],
            [0.5, 7.0, 0.35, -0.1],
            [1.5, 3.0, -0.3, 0.0],
            [2.0, 4.0, -0.2, 0.1],
            [2.5, 5.0, 0.3, 0.2],
        ],
        "m": 2,
        "seed": 1,
        "horizon": 200,
        "realizations": 100,
    }


def _many_targets_dict() -> dict:
    g = np.random.default_rng(20240815)
    targets = [
        [
            round(float(g.uniform(0.0, 3.0)), 3),
            round(float(g.uniform(2.5, 7.5)), 3),
            round(float(g.uniform(-0.5, 0.5)), 3),
            round(float(g.uniform(-0.5, 0.5)), 3),
        ]
        for _ in range(15)
    ]
    return {
        "name": "many-targets",
        "radars": [[-10.0, 0.0], [3.0, 0.0], [10.0, 0.0]],
        "targets": targets,
        "m": 6,
        "seed": 1,
        "horizon": 200,
        "realizations": 100,
    }


def _partial_topology_dict() -> dict:
    # 6 radars, 5 targets, m=1; observability 3..5 targets, near-full graph.
    sizes = [3, 4, 5, 3, 4, 5]
    observable = [
        sorted({(i + off) % 5 for off in range(sizes[i])}) for i in range(6)
    ]
    neighbors = [list(range(6)) for _ in range(6)]
    neighbors[0] = [0, 1, 2, 3, 4]
    neighbors[1] = [0, 1, 2, 3, 5]
    return {
        "name": "partial-topology",
        "radars": [[-10.0, 0.0], [3.0, 0.0], [10.0, 0.0], [-4.0, 0.0], [7.0, 0.0], [-1.0, 0.0]],
        "targets": [
            [1.0, 6.0, 0.5, 0.1],
            [0.5, 7.0, 0.35, -0.1],
            [1.5, 3.0, -0.3, 0.0],
            [2.0, 4.0, -0.2, 0.1],
            [2.5, 5.0, 0.3, 0.2],
        ],
        "m": 1,
        "seed": 1,
        "horizon": 200,
        "realizations": 100,
        "topology": {"observable": observable, "neighbors": neighbors},
    }


def _menu_basic() -> list[SelectorSpec]:
    return [
        SelectorSpec(kind="standalone", label="standalone"),
        SelectorSpec(kind="random", K=10, label="random-K10"),
        SelectorSpec(kind="random", K=1, label="random-K1"),
        SelectorSpec(kind="lcbrd", K=10, label="lcbrd-K10"),
    ]


def compare_preset(name: str) -> tuple[ScenarioConfig, list[SelectorSpec]]:
    """Scenario plus selector menu for the bundled comparison figures."""
    if name == "fig6":
        return table12_config(), _menu_basic() + [
            SelectorSpec(kind="centralized", K=10, label="centralized-K10"),
        ]
    if name == "fig7":
        return table12_config(), _menu_basic() + [
            SelectorSpec(kind="centralized", K=10, label="centralized-K10"),
            SelectorSpec(kind="lcbrd", epsilon=0.02, label="eps-lcbrd"),
        ]
    if name == "fig8":
        cfg = scenario_from_dict(_many_targets_dict())
        return cfg, _menu_basic() + [
            SelectorSpec(kind="lcbrd", epsilon=0.02, label="eps-lcbrd"),
        ]
    if name == "fig9":
        cfg = scenario_from_dict(_five_radar_dict())
        return cfg, _menu_basic()
    if name == "fig10":
        # at the fast scan rate the adaptive play is still learning at
        # scan 200; the horizon covers enough of the time axis for every
        # selector to reach its steady behavior
        cfg = scenario_from_dict(
            {**_five_radar_dict(), "t_u": 0.025, "horizon": 400}
        )
        return cfg, _menu_basic() + [
            SelectorSpec(kind="rm", theta=0.5, label="rm"),
        ]
    if name == "fig12":
        cfg = scenario_from_dict(_partial_topology_dict())
        return cfg, [
            SelectorSpec(kind="random", K=1, label="random-K1"),
            SelectorSpec(kind="lcbrd", K=10, label="lcbrd-K10"),
            SelectorSpec(kind="rm", theta=0.5, label="rm"),
            SelectorSpec(kind="centralized", K=1, label="exhaustive"),
        ]
    raise KeyError(f"unknown compare preset {name!r}")


def sweep_preset(name: str):
    """Base scenario, selectors and spread points for the diversity sweep."""
    if name == "fig11":
        cfg = scenario_from_dict(
            {**_five_radar_dict(), "t_u": 0.025, "realizations": 30}
        )
        specs = [
            SelectorSpec(kind="lcbrd", K=10, label="lcbrd-K10"),
            SelectorSpec(kind="centralized", K=10, label="centralized-K10"),
        ]
        return cfg, specs, [1.0, 2.0, 3.0, 4.5]
    raise KeyError(f"unknown sweep preset {name!r}")


def frozen_preset(name: str) -> ScenarioConfig:
    """Stationary-game scenarios for equilibrium-convergence studies."""
    if name == "frozen-table12":
        return table12_config(
            freeze_dynamics=True,
            record_nash="on",
            horizon=200,
            realizations=1,
            selector=SelectorSpec(kind="lcbrd", s4=True, init="random"),
        )
    if name == "frozen-five-radar":
        cfg = scenario_from_dict(_five_radar_dict())
        return replace(
            cfg,
            freeze_dynamics=True,
            record_nash="on",
            horizon=500,
            realizations=1,
            selector=SelectorSpec(kind="rm", theta=0.5, init="greedy"),
        )
    raise KeyError(f"unknown frozen preset {name!r}")


COMPARE_PRESETS = ("fig6", "fig7", "fig8", "fig9", "fig10", "fig12")
SWEEP_PRESETS = ("fig11",)

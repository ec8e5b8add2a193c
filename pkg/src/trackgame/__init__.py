"""Game-theoretic track selection for multifunction radar networks."""

from .engine import (
    MetricsRecord,
    compare_strategies,
    run_monte_carlo,
    run_realization,
    sweep_variance_spread,
    tail_mean,
)
from .filtering import GainLadder, TrackEstimate, gain_ladder, predict, update_cyclic
from .game import (
    EkfCovarianceGains,
    GainTable,
    GameContext,
    InterestMatrix,
    TopologySpec,
    best_profile_exhaustive,
    enumerate_nash,
    enumerate_strategies,
    is_pure_nash,
    measurement_count,
    price_of_anarchy,
    social_welfare,
    utility,
)
from .kinematics import (
    Measurement,
    MotionModel,
    NoiseModel,
    RadarSite,
    TargetState,
    linearize,
    observe,
    propagate,
)
from .scenario import ScenarioConfig, SelectorSpec, load_scenario, scenario_from_dict

__version__ = "0.1.0"

"""Shared fixtures: the reference three-radar geometry in miniature."""

import numpy as np
import pytest

from trackgame.filtering import TrackEstimate
from trackgame.kinematics import MotionModel, NoiseModel, RadarSite, TargetState


@pytest.fixture
def sites():
    return [RadarSite(0, -10.0, 0.0), RadarSite(1, 3.0, 0.0), RadarSite(2, 10.0, 0.0)]


@pytest.fixture
def motion():
    return MotionModel(t_u=0.25, sigma_w2=2.5e-5)


@pytest.fixture
def noise():
    return NoiseModel(sigma_a=2e-3, sigma_r=0.015, b=np.ones((3, 5)))


@pytest.fixture
def targets():
    return [
        TargetState(1.0, 6.0, 0.5, 0.1),
        TargetState(0.5, 7.0, 0.35, -0.1),
        TargetState(1.5, 3.0, -0.3, 0.0),
        TargetState(2.0, 4.0, -0.2, 0.1),
        TargetState(2.5, 5.0, 0.3, 0.2),
    ]


@pytest.fixture
def track0():
    """A track for target 0 with the standard initial covariance."""
    return TrackEstimate(
        0, 0, np.array([1.0, 6.0, 0.5, 0.1]), np.diag([0.01, 0.01, 0.01, 0.01])
    )

import math

import pytest

from frictionlab.joint import JointParams


@pytest.fixture
def saturn() -> JointParams:
    # shank motor means: inertia / viscous / static friction, torque limit 45
    return JointParams(inertia_I=0.0145, viscous_B=0.0704, coulomb_bc=0.442,
                       motor_strength_k=1.0, kp=25.0, kd=0.3, tau_max=45.0)


@pytest.fixture
def go1() -> JointParams:
    return JointParams(inertia_I=0.0121, viscous_B=0.0342, coulomb_bc=0.0481,
                       motor_strength_k=1.0, kp=25.0, kd=0.3, tau_max=35.55)


@pytest.fixture
def sine_target():
    def make(amplitude=0.5, omega=2.0 * math.pi):
        return lambda t: amplitude * math.sin(omega * t)
    return make

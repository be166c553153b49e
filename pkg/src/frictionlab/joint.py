"""Single-joint PD-controlled dynamics with viscous and Coulomb friction.

The joint obeys

    I * theta_dd + B * theta_d = tau_pd + f

where the PD torque is saturated motor output

    tau_pd = clip(k_motor * kp * (target - theta) - k_motor * kd * theta_d,
                  -tau_max, +tau_max)

and f is Coulomb friction of constant magnitude b_c with a Karnopp-style
sticking band: for |theta_d| <= eps the joint sticks whenever the net
applied torque (tau_pd - B * theta_d) stays within +-b_c, in which case
friction balances it exactly and the velocity is forced to 0. Static and
dynamic friction magnitudes are taken equal.

Integration is semi-implicit Euler: velocity first, then position with the
new velocity. In the sticking branch the angle is held exactly, so a joint
driven below the friction threshold never drifts.

One deliberate arithmetic choice: outside saturation the velocity-
proportional torques are folded into a single total damping coefficient
D = B + k_motor * kd before any per-step arithmetic. Parameter sets whose
(B, kd) splits produce the same D therefore integrate to bit-identical
angle/velocity trajectories; only the recorded PD torque differs. Torque
saturation applies to the PD output alone and genuinely breaks that
interchangeability.

All functions are pure; the hot loop is JIT-compiled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from numba import njit

from frictionlab.errors import InvalidInputError
from frictionlab.trajectory import Trajectory
from frictionlab.validation import check_array_finite, check_finite, check_non_negative, check_positive

# velocity half-width of the sticking regime (rad/s)
STICTION_BAND = 1e-4
# default integration step (s)
DEFAULT_DT = 1e-3


@dataclass(frozen=True)
class JointParams:
    """Physical and controller constants of one joint."""

    inertia_I: float          # rotational inertia, kg*m^2
    viscous_B: float          # viscous friction coefficient, N*m*s/rad
    coulomb_bc: float         # Coulomb/static friction magnitude, N*m
    motor_strength_k: float = 1.0   # dimensionless motor strength factor
    kp: float = 25.0          # proportional gain, N*m/rad
    kd: float = 0.3           # derivative gain, N*m*s/rad
    tau_max: float = 45.0     # torque saturation limit, N*m

    def __post_init__(self):
        check_positive(inertia_I=self.inertia_I, motor_strength_k=self.motor_strength_k,
                       tau_max=self.tau_max)
        check_non_negative(viscous_B=self.viscous_B, coulomb_bc=self.coulomb_bc,
                           kp=self.kp, kd=self.kd)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "JointParams":
        try:
            return cls(**{k: float(d[k]) for k in
                          ("inertia_I", "viscous_B", "coulomb_bc", "motor_strength_k",
                           "kp", "kd", "tau_max")})
        except KeyError as exc:
            raise InvalidInputError(f"joint params missing field {exc.args[0]!r}") from exc

    def to_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json(cls, path) -> "JointParams":
        with open(path, "r", encoding="ascii") as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class JointState:
    """Instantaneous angle (rad) and angular velocity (rad/s)."""

    theta: float = 0.0
    theta_dot: float = 0.0

    def __post_init__(self):
        check_finite(theta=self.theta, theta_dot=self.theta_dot)


def _gains(params: JointParams) -> tuple[float, float, float]:
    """(k_motor*kp, k_motor*kd, total damping B + k_motor*kd)."""
    kp_eff = params.motor_strength_k * params.kp
    kd_eff = params.motor_strength_k * params.kd
    return kp_eff, kd_eff, params.viscous_B + kd_eff


@njit(cache=True)
def _step_core(theta, theta_dot, target, kp_eff, kd_eff, viscous_b, total_damping,
               coulomb_bc, inertia, tau_max, eps, dt):
    err = target - theta
    tau_pd = kp_eff * err - kd_eff * theta_dot
    saturated = False
    if tau_pd > tau_max:
        tau_pd = tau_max
        saturated = True
    elif tau_pd < -tau_max:
        tau_pd = -tau_max
        saturated = True
    # torque available against static friction: tau_pd - B*theta_dot; the
    # unsaturated form uses the folded total damping (see module docstring)
    if saturated:
        tau_applied = tau_pd - viscous_b * theta_dot
    else:
        tau_applied = kp_eff * err - total_damping * theta_dot
    if theta_dot > eps:
        tau_f = -coulomb_bc
    elif theta_dot < -eps:
        tau_f = coulomb_bc
    else:
        if abs(tau_applied) <= coulomb_bc:
            # stick: friction balances the drive, motion stops dead
            return theta, 0.0, tau_pd, -tau_applied
        tau_f = -coulomb_bc if tau_applied > 0.0 else coulomb_bc
    acc = (tau_applied + tau_f) / inertia
    new_theta_dot = theta_dot + acc * dt
    new_theta = theta + new_theta_dot * dt
    return new_theta, new_theta_dot, tau_pd, tau_f


@njit(cache=True)
def _simulate_core(targets, theta0, theta_dot0, kp_eff, kd_eff, viscous_b,
                   total_damping, coulomb_bc, inertia, tau_max, eps, dt):
    n = targets.shape[0]
    theta = np.empty(n)
    theta_dot = np.empty(n)
    tau_pd = np.empty(n)
    tau_f = np.empty(n)
    th = theta0
    td = theta_dot0
    for i in range(n):
        nth, ntd, pd_i, f_i = _step_core(th, td, targets[i], kp_eff, kd_eff,
                                         viscous_b, total_damping, coulomb_bc,
                                         inertia, tau_max, eps, dt)
        theta[i] = th
        theta_dot[i] = td
        tau_pd[i] = pd_i
        tau_f[i] = f_i
        th = nth
        td = ntd
    return theta, theta_dot, tau_pd, tau_f


def pd_torque(params: JointParams, state: JointState, target: float) -> float:
    """Saturated PD motor torque for the given state and target angle."""
    check_finite(target=target, theta=state.theta, theta_dot=state.theta_dot)
    kp_eff, kd_eff, _ = _gains(params)
    tau = kp_eff * (target - state.theta) - kd_eff * state.theta_dot
    if tau > params.tau_max:
        return params.tau_max
    if tau < -params.tau_max:
        return -params.tau_max
    return tau


def friction_torque(params: JointParams, theta_dot: float, tau_applied: float,
                    stiction_band_eps: float = STICTION_BAND) -> float:
    """Coulomb friction torque, including the sticking band.

    Moving (|theta_dot| > eps): constant magnitude opposing the motion.
    Inside the band: friction cancels ``tau_applied`` exactly while it stays
    within +-b_c (the joint sticks), otherwise kinetic friction opposes the
    impending motion direction.
    """
    check_finite(theta_dot=theta_dot, tau_applied=tau_applied,
                 stiction_band_eps=stiction_band_eps)
    bc = params.coulomb_bc
    if theta_dot > stiction_band_eps:
        return -bc
    if theta_dot < -stiction_band_eps:
        return bc
    if abs(tau_applied) <= bc:
        return -tau_applied
    return -bc if tau_applied > 0.0 else bc


def step(params: JointParams, state: JointState, target: float,
         dt: float = DEFAULT_DT, stiction_band_eps: float = STICTION_BAND) -> JointState:
    """Advance one semi-implicit Euler step toward ``target``."""
    check_positive(dt=dt)
    check_finite(target=target)
    kp_eff, kd_eff, total_damping = _gains(params)
    new_theta, new_theta_dot, _, _ = _step_core(
        state.theta, state.theta_dot, target, kp_eff, kd_eff, params.viscous_B,
        total_damping, params.coulomb_bc, params.inertia_I, params.tau_max,
        stiction_band_eps, dt)
    return JointState(new_theta, new_theta_dot)


def simulate(params: JointParams, target_fn: Callable[[float], float], duration: float,
             dt: float = DEFAULT_DT, initial: JointState = JointState(),
             stiction_band_eps: float = STICTION_BAND) -> Trajectory:
    """Simulate ``floor(duration/dt) + 1`` rows of PD tracking of ``target_fn``.

    Row i holds the state after i steps together with the PD and friction
    torques evaluated at that state, i.e. the torques that drive step i.
    """
    check_positive(duration=duration, dt=dt)
    n = int(math.floor(duration / dt + 1e-9)) + 1
    t = np.arange(n) * dt
    targets = np.array([float(target_fn(float(ti))) for ti in t], dtype=float)
    check_array_finite("target", targets)
    kp_eff, kd_eff, total_damping = _gains(params)
    theta, theta_dot, tau_pd, tau_f = _simulate_core(
        targets, float(initial.theta), float(initial.theta_dot), kp_eff, kd_eff,
        params.viscous_B, total_damping, params.coulomb_bc, params.inertia_I,
        params.tau_max, stiction_band_eps, dt)
    return Trajectory(dt, t, targets, theta, theta_dot, tau_pd, tau_f)


def action_to_target(action: float, theta_stand: float) -> float:
    """Map a policy action to a joint target angle relative to standing posture."""
    check_finite(action=action, theta_stand=theta_stand)
    return theta_stand + action

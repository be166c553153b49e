"""Identification of joint inertia, viscous friction, and Coulomb friction.

A sinusoidal excitation is tracked by the PD-controlled joint; the sampled
angle response is then matched in the least-squares sense against simulated
responses of candidate (I, B, b_c) triples. Positivity of all three
parameters is enforced by optimizing their logarithms with multi-start
Nelder-Mead; the objective is nonsmooth wherever candidates cross stiction
transitions, so a derivative-free method is the right tool.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from frictionlab import neldermead
from frictionlab.errors import (ConstraintViolationError, IdentificationFailureError,
                                InvalidInputError)
from frictionlab.joint import DEFAULT_DT, STICTION_BAND, JointParams, _gains, _simulate_core
from frictionlab.trajectory import Trajectory
from frictionlab.validation import check_finite, check_non_negative, check_positive

# Measured responses whose total angle span stays below this floor carry no
# information about the dynamics; identify() refuses to call such a fit
# converged no matter what the simplex did.
MOTION_FLOOR = 1e-9

DEFAULT_INITIAL_GUESS = (0.01, 0.05, 0.1)

# log-space clamp: parameters live in [exp(-60), exp(60)]
_LOG_BOUND = 60.0


@dataclass(frozen=True)
class Excitation:
    """Sinusoidal reference ``amplitude * sin(omega * t)`` on [0, duration]."""

    amplitude: float   # rad
    omega: float       # rad/s
    duration: float    # s
    dt: float = DEFAULT_DT

    def __post_init__(self):
        check_positive(amplitude=self.amplitude, omega=self.omega,
                       duration=self.duration, dt=self.dt)
        period = 2.0 * math.pi / self.omega
        if self.duration < period:
            raise InvalidInputError(
                f"duration {self.duration} shorter than one period {period:.6g}")
        if self.dt >= math.pi / self.omega:
            raise InvalidInputError(
                f"dt {self.dt} too coarse for omega {self.omega} (Nyquist margin)")

    def rows(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9)) + 1

    def targets(self) -> np.ndarray:
        t = np.arange(self.rows()) * self.dt
        return self.amplitude * np.sin(self.omega * t)


def excitation_target(exc: Excitation, t: float) -> float:
    """Excitation reference angle at time ``t`` within [0, duration]."""
    check_finite(t=t)
    if t < 0.0 or t > exc.duration:
        raise InvalidInputError(f"t={t} outside excitation window [0, {exc.duration}]")
    return exc.amplitude * math.sin(exc.omega * t)


@dataclass(frozen=True)
class FixedGains:
    """Controller constants held fixed during identification."""

    motor_strength_k: float
    kp: float
    kd: float
    tau_max: float

    def __post_init__(self):
        check_positive(motor_strength_k=self.motor_strength_k, tau_max=self.tau_max)
        check_non_negative(kp=self.kp, kd=self.kd)

    @classmethod
    def from_joint_params(cls, params: JointParams) -> "FixedGains":
        return cls(params.motor_strength_k, params.kp, params.kd, params.tau_max)


@dataclass(frozen=True)
class StartDiagnostic:
    start_index: int
    initial_inertia_I: float
    initial_viscous_B: float
    initial_coulomb_bc: float
    inertia_I: float
    viscous_B: float
    coulomb_bc: float
    objective_value: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class IdentificationResult:
    """Best identified parameters plus optimizer diagnostics."""

    inertia_I: float
    viscous_B: float
    coulomb_bc: float
    objective_value: float   # mean squared angle residual, rad^2
    evaluations: int         # total objective evaluations over all starts
    converged: bool
    per_start: tuple[StartDiagnostic, ...] = ()

    def __post_init__(self):
        check_positive(inertia_I=self.inertia_I, viscous_B=self.viscous_B,
                       coulomb_bc=self.coulomb_bc)
        check_non_negative(objective_value=self.objective_value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_start"] = [asdict(s) for s in self.per_start]
        return d

    def to_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def add_angle_noise(traj: Trajectory, sigma: float, seed: int) -> Trajectory:
    """Additive i.i.d. Gaussian noise on the angle column only."""
    check_non_negative(sigma=sigma)
    rng = np.random.default_rng(seed)
    return traj.with_theta(traj.theta + rng.normal(0.0, sigma, size=len(traj)))


def _candidate_params(inertia_I: float, viscous_B: float, coulomb_bc: float,
                      fixed: FixedGains) -> JointParams:
    return JointParams(inertia_I=inertia_I, viscous_B=viscous_B, coulomb_bc=coulomb_bc,
                       motor_strength_k=fixed.motor_strength_k, kp=fixed.kp,
                       kd=fixed.kd, tau_max=fixed.tau_max)


def _simulated_theta(params: JointParams, targets: np.ndarray, theta0: float,
                     theta_dot0: float, dt: float,
                     stiction_band_eps: float) -> np.ndarray:
    kp_eff, kd_eff, total_damping = _gains(params)
    theta, _, _, _ = _simulate_core(
        targets, theta0, theta_dot0, kp_eff, kd_eff, params.viscous_B, total_damping,
        params.coulomb_bc, params.inertia_I, params.tau_max, stiction_band_eps, dt)
    return theta


def _mean_square(residual: np.ndarray) -> float:
    # divergent candidates overflow to inf; that is a legitimate "reject me"
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean(residual * residual))


def _check_measurement(measured: Trajectory, exc: Excitation) -> None:
    if measured.dt != exc.dt:
        raise InvalidInputError(
            f"measured dt {measured.dt} does not match excitation dt {exc.dt}")
    if len(measured) != exc.rows():
        raise InvalidInputError(
            f"measured has {len(measured)} rows, excitation implies {exc.rows()}")


def identification_objective(candidate, measured: Trajectory, fixed: FixedGains,
                             exc: Excitation,
                             stiction_band_eps: float = STICTION_BAND) -> float:
    """Mean squared angle residual of the candidate against the measurement.

    The candidate (I, B, b_c) joint is simulated tracking the excitation from
    the measurement's initial state; the value is mean((theta_sim - theta)^2).
    b_c = 0 is admitted so frictionless hypotheses can be scored; I and B must
    be strictly positive.
    """
    inertia_I, viscous_B, coulomb_bc = (float(v) for v in candidate)
    if not (inertia_I > 0.0 and viscous_B > 0.0 and coulomb_bc >= 0.0):
        raise ConstraintViolationError(
            f"candidate (I={inertia_I}, B={viscous_B}, b_c={coulomb_bc}) violates "
            "I > 0, B > 0, b_c >= 0")
    _check_measurement(measured, exc)
    params = _candidate_params(inertia_I, viscous_B, coulomb_bc, fixed)
    theta = _simulated_theta(params, measured.target, float(measured.theta[0]),
                             float(measured.theta_dot[0]), exc.dt, stiction_band_eps)
    return _mean_square(theta - measured.theta)


def _run_start(log_x0: np.ndarray, measured: Trajectory, fixed: FixedGains,
               exc: Excitation, stiction_band_eps: float, max_evals: int,
               diameter_tol: float) -> tuple[neldermead.NelderMeadResult, np.ndarray]:
    targets = measured.target
    theta_meas = measured.theta
    theta0 = float(theta_meas[0])
    theta_dot0 = float(measured.theta_dot[0])
    dt = exc.dt

    def objective(log_params: np.ndarray) -> float:
        p = np.exp(np.clip(log_params, -_LOG_BOUND, _LOG_BOUND))
        params = _candidate_params(p[0], p[1], p[2], fixed)
        theta = _simulated_theta(params, targets, theta0, theta_dot0, dt,
                                 stiction_band_eps)
        return _mean_square(theta - theta_meas)

    # restart from each converged point with a fresh small simplex until the
    # objective stops improving; a collapsed simplex on this kinked landscape
    # is often not yet at the basin bottom. All restarts share the start's
    # evaluation budget.
    res = neldermead.minimize(objective, log_x0, diameter_tol=diameter_tol,
                              max_evals=max_evals)
    evals = res.evaluations
    while res.converged and evals + 50 <= max_evals:
        again = neldermead.minimize(objective, res.x, initial_step=0.02,
                                    diameter_tol=diameter_tol,
                                    max_evals=max_evals - evals)
        evals += again.evaluations
        improved = again.fx < res.fx
        res = neldermead.NelderMeadResult(
            again.x if improved else res.x, min(again.fx, res.fx), evals,
            again.converged)
        if not improved:
            break
    best = np.exp(np.clip(res.x, -_LOG_BOUND, _LOG_BOUND))
    return res, best


def identify(measured: Trajectory, fixed: FixedGains, exc: Excitation,
             starts: int = 8, seed: int = 0,
             initial_guess: tuple[float, float, float] = DEFAULT_INITIAL_GUESS,
             max_evals_per_start: int = 2000, diameter_tol: float = 1e-6,
             workers: int = 1,
             stiction_band_eps: float = STICTION_BAND) -> IdentificationResult:
    """Multi-start identification of (I, B, b_c) from a measured trajectory.

    Starts are drawn log-uniformly within [0.1x, 10x] of ``initial_guess``
    and optimized independently in log space; the best final objective wins,
    with ties broken by lowest start index. Fully deterministic given
    (measured, seed, starts); ``workers`` only parallelizes the independent
    starts and cannot change the result.
    """
    if starts < 1:
        raise InvalidInputError(f"starts must be >= 1, got {starts}")
    check_positive(**{"initial_guess I": initial_guess[0],
                      "initial_guess B": initial_guess[1],
                      "initial_guess b_c": initial_guess[2]})
    _check_measurement(measured, exc)

    rng = np.random.default_rng(seed)
    center = np.log(np.asarray(initial_guess, dtype=float))
    draws = rng.uniform(center + math.log(0.1), center + math.log(10.0),
                        size=(starts, 3))

    def run(k: int):
        return _run_start(draws[k], measured, fixed, exc, stiction_band_eps,
                          max_evals_per_start, diameter_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(starts)))
    else:
        outcomes = [run(k) for k in range(starts)]

    diagnostics = []
    for k, (res, best) in enumerate(outcomes):
        x0 = np.exp(draws[k])
        diagnostics.append(StartDiagnostic(
            start_index=k, initial_inertia_I=float(x0[0]),
            initial_viscous_B=float(x0[1]), initial_coulomb_bc=float(x0[2]),
            inertia_I=float(best[0]), viscous_B=float(best[1]),
            coulomb_bc=float(best[2]), objective_value=res.fx,
            evaluations=res.evaluations, converged=res.converged))

    finite = [d for d in diagnostics if math.isfinite(d.objective_value)]
    if not finite:
        raise IdentificationFailureError(
            f"all {starts} starts diverged to non-finite objectives")
    winner = min(finite, key=lambda d: (d.objective_value, d.start_index))

    # a response that never moved cannot pin down any parameter
    moved = float(measured.theta.max() - measured.theta.min()) > MOTION_FLOOR

    return IdentificationResult(
        inertia_I=winner.inertia_I, viscous_B=winner.viscous_B,
        coulomb_bc=winner.coulomb_bc, objective_value=winner.objective_value,
        evaluations=sum(d.evaluations for d in diagnostics),
        converged=winner.converged and moved,
        per_start=tuple(diagnostics))


def friction_ratio(coulomb_bc: float, tau_max: float) -> float:
    """Static friction as a percentage of the torque limit."""
    check_finite(coulomb_bc=coulomb_bc)
    check_positive(tau_max=tau_max)
    return 100.0 * coulomb_bc / tau_max


class JointParamIdentifier(BaseEstimator):
    """Estimator facade around :func:`identify`.

    Hyperparameters mirror the functional interface; ``fit`` consumes a
    measured :class:`~frictionlab.trajectory.Trajectory` and exposes the
    identified constants as fitted attributes, so the identifier slots into
    sklearn-style pipelines and parameter searches.
    """

    def __init__(self, motor_strength_k=1.0, kp=25.0, kd=0.3, tau_max=45.0,
                 amplitude=0.5, omega=2.0 * math.pi, starts=8, seed=0,
                 initial_guess=DEFAULT_INITIAL_GUESS, workers=1):
        self.motor_strength_k = motor_strength_k
        self.kp = kp
        self.kd = kd
        self.tau_max = tau_max
        self.amplitude = amplitude
        self.omega = omega
        self.starts = starts
        self.seed = seed
        self.initial_guess = initial_guess
        self.workers = workers

    def fit(self, measured: Trajectory, y=None):
        exc = Excitation(self.amplitude, self.omega,
                         duration=(len(measured) - 1) * measured.dt, dt=measured.dt)
        fixed = FixedGains(self.motor_strength_k, self.kp, self.kd, self.tau_max)
        result = identify(measured, fixed, exc, starts=self.starts, seed=self.seed,
                          initial_guess=tuple(self.initial_guess), workers=self.workers)
        self.result_ = result
        self.inertia_I_ = result.inertia_I
        self.viscous_B_ = result.viscous_B
        self.coulomb_bc_ = result.coulomb_bc
        return self

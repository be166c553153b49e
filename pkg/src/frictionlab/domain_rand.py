"""Randomized environment/joint parameters for sim-to-real training.

Each configured field is a closed range; one environment sample draws every
field independently and uniformly. Draws come from a counter-based
generator keyed on (seed, field id), so the value of a field depends only
on the seed, never on draw order, and arbitrarily many samples can be taken
concurrently.

The static-friction range deliberately reaches down to a multiplier of 0.0:
rather than matching an identified friction value exactly, training sweeps
the whole band from frictionless up to 1.2x the identified magnitude, which
keeps early training easy and hedges against wear-induced drift.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from importlib import resources
from typing import Callable

import numpy as np

from frictionlab.errors import InvalidInputError
from frictionlab.joint import DEFAULT_DT, JointParams, simulate
from frictionlab.validation import check_finite, check_non_negative, check_positive

# fixed field ids keying the counter-based generator
_FIELD_IDS = {
    "joint_armature_mult": 0,
    "joint_damping_mult": 1,
    "joint_static_friction_mult": 2,
    "kp_mult": 3,
    "motor_strength_mult": 4,
    "ground_friction_mult": 5,
    "payload_kg": 6,
    "com_offset_m": 7,
}

_MULTIPLIER_FIELDS = (
    "joint_armature_mult", "joint_damping_mult", "joint_static_friction_mult",
    "kp_mult", "motor_strength_mult", "ground_friction_mult",
)


@dataclass(frozen=True)
class RandomizationConfig:
    """Closed sampling ranges per parameter; defaults are the shipped table2.json."""

    joint_armature_mult: tuple[float, float] = (0.8, 1.2)
    joint_damping_mult: tuple[float, float] = (0.8, 1.2)
    joint_static_friction_mult: tuple[float, float] = (0.0, 1.2)
    kp_mult: tuple[float, float] = (0.95, 1.05)
    motor_strength_mult: tuple[float, float] = (0.8, 1.2)
    ground_friction_mult: tuple[float, float] = (0.2, 2.0)
    payload_kg: tuple[float, float] = (-2.0, 3.0)
    com_offset_m: tuple[float, float] = (-0.25, 0.25)
    push_interval_s: float = 8.0
    push_velocity_mps: float = 1.0
    # set by deception_config: identified friction the multiplier applies to
    static_friction_nominal_nm: float | None = None

    def __post_init__(self):
        for name in _FIELD_IDS:
            lo, hi = getattr(self, name)
            check_finite(**{f"{name} low": lo, f"{name} high": hi})
            if lo > hi:
                raise InvalidInputError(f"{name} range [{lo}, {hi}] has low > high")
            if name in _MULTIPLIER_FIELDS and lo < 0:
                raise InvalidInputError(f"{name} multiplier must be non-negative")
            object.__setattr__(self, name, (float(lo), float(hi)))
        check_positive(push_interval_s=self.push_interval_s,
                       push_velocity_mps=self.push_velocity_mps)
        if self.static_friction_nominal_nm is not None:
            check_non_negative(static_friction_nominal_nm=self.static_friction_nominal_nm)

    @property
    def static_friction_range_nm(self) -> tuple[float, float] | None:
        """Absolute friction draw range implied by the nominal value, N*m."""
        if self.static_friction_nominal_nm is None:
            return None
        lo, hi = self.joint_static_friction_mult
        return (lo * self.static_friction_nominal_nm,
                hi * self.static_friction_nominal_nm)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["static_friction_nominal_nm"] is None:
            del d["static_friction_nominal_nm"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RandomizationConfig":
        kwargs = {}
        for name in _FIELD_IDS:
            if name in d:
                kwargs[name] = tuple(d[name])
        for name in ("push_interval_s", "push_velocity_mps", "static_friction_nominal_nm"):
            if name in d:
                kwargs[name] = d[name]
        return cls(**kwargs)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json(cls, path) -> "RandomizationConfig":
        with open(path, "r", encoding="ascii") as f:
            return cls.from_dict(json.load(f))


def table2_config() -> RandomizationConfig:
    """The bundled randomization table shipped with the package."""
    text = resources.files("frictionlab").joinpath("data/table2.json").read_text("ascii")
    return RandomizationConfig.from_dict(json.loads(text))


@dataclass(frozen=True)
class EnvironmentSample:
    """One concrete draw from a config, with the derived joint constants."""

    joint_armature_mult: float
    joint_damping_mult: float
    joint_static_friction_mult: float
    kp_mult: float
    motor_strength_mult: float
    ground_friction_mult: float
    payload_kg: float
    com_offset_m: float
    push_interval_s: float
    push_velocity_mps: float
    joint_params: JointParams
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["joint_params"] = self.joint_params.to_dict()
        return d


def _draw(seed: int, field: str, lo: float, hi: float) -> float:
    key = np.array([seed, _FIELD_IDS[field]], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return float(gen.uniform(lo, hi))


def sample(config: RandomizationConfig, nominal: JointParams, seed: int) -> EnvironmentSample:
    """Draw one environment, scaling the nominal joint constants per field.

    Deterministic in (config, seed) and field-order independent. One sample
    covers one joint for one episode; per-joint randomization uses distinct
    seeds (e.g. seed = episode * n_joints + joint index).
    """
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    draws = {name: _draw(seed, name, *getattr(config, name)) for name in _FIELD_IDS}
    derived = JointParams(
        inertia_I=nominal.inertia_I * draws["joint_armature_mult"],
        viscous_B=nominal.viscous_B * draws["joint_damping_mult"],
        coulomb_bc=nominal.coulomb_bc * draws["joint_static_friction_mult"],
        motor_strength_k=nominal.motor_strength_k * draws["motor_strength_mult"],
        kp=nominal.kp * draws["kp_mult"],
        kd=nominal.kd,
        tau_max=nominal.tau_max,
    )
    return EnvironmentSample(
        joint_armature_mult=draws["joint_armature_mult"],
        joint_damping_mult=draws["joint_damping_mult"],
        joint_static_friction_mult=draws["joint_static_friction_mult"],
        kp_mult=draws["kp_mult"],
        motor_strength_mult=draws["motor_strength_mult"],
        ground_friction_mult=draws["ground_friction_mult"],
        payload_kg=draws["payload_kg"],
        com_offset_m=draws["com_offset_m"],
        push_interval_s=config.push_interval_s,
        push_velocity_mps=config.push_velocity_mps,
        joint_params=derived,
        seed=seed,
    )


def deception_config(identified_bc: float) -> RandomizationConfig:
    """Widened static-friction randomization around an identified value.

    Returns the standard table with the friction multiplier range [0.0, 1.2]
    anchored to ``identified_bc``, so draws sweep from frictionless joints up
    to 20% above the identified magnitude instead of pinning the exact value.
    """
    check_non_negative(identified_bc=identified_bc)
    return replace(table2_config(), static_friction_nominal_nm=float(identified_bc))


def damping_equivalence_check(p1: JointParams, p2: JointParams,
                              target_fn: Callable[[float], float], duration: float,
                              dt: float = DEFAULT_DT) -> float:
    """Max |angle difference| between two parameterizations of one joint.

    Requires the two sets to share everything except the (viscous_B, kd)
    split. When B + k_motor*kd agrees between them the returned value is
    exactly 0.0 on unsaturated runs: only total damping enters the motion.
    """
    shared = ("inertia_I", "kp", "motor_strength_k", "coulomb_bc", "tau_max")
    for name in shared:
        if getattr(p1, name) != getattr(p2, name):
            raise InvalidInputError(
                f"parameter sets must share {name}: {getattr(p1, name)} != {getattr(p2, name)}")
    t1 = simulate(p1, target_fn, duration, dt)
    t2 = simulate(p2, target_fn, duration, dt)
    return float(np.max(np.abs(t1.theta - t2.theta)))

"""Uniformly sampled joint trajectories and their CSV serialization.

A trajectory stores one row per integrator step: time, commanded target,
angle, angular velocity, PD torque, and friction torque. Rows live on the
exact grid ``t[i] == i * dt``. CSV files are written with shortest
round-trip decimal representations, so write -> read reproduces every
float bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from frictionlab.errors import InvalidInputError
from frictionlab.validation import check_array_finite, check_positive

CSV_HEADER = "t,target,theta,theta_dot,tau_pd,tau_friction"

_COLUMNS = ("t", "target", "theta", "theta_dot", "tau_pd", "tau_friction")


@dataclass(frozen=True)
class Trajectory:
    """Time series of a single simulated (or measured) joint."""

    dt: float
    t: np.ndarray
    target: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    tau_pd: np.ndarray
    tau_friction: np.ndarray

    def __post_init__(self):
        check_positive(dt=self.dt)
        arrays = {name: np.asarray(getattr(self, name), dtype=float) for name in _COLUMNS}
        n = arrays["t"].shape[0]
        if n == 0:
            raise InvalidInputError("trajectory must contain at least one row")
        for name, arr in arrays.items():
            if arr.ndim != 1 or arr.shape[0] != n:
                raise InvalidInputError(f"column {name} must be 1-D with {n} rows")
            check_array_finite(name, arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not np.array_equal(arrays["t"], np.arange(n) * self.dt):
            raise InvalidInputError("timestamps must advance by exactly dt from 0")

    def __len__(self) -> int:
        return self.t.shape[0]

    def with_theta(self, theta: np.ndarray) -> "Trajectory":
        """Copy of this trajectory with the angle column replaced."""
        return Trajectory(self.dt, self.t, self.target, theta,
                          self.theta_dot, self.tau_pd, self.tau_friction)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write(CSV_HEADER + "\n")
            for i in range(len(self)):
                f.write(",".join(
                    repr(float(getattr(self, name)[i])) for name in _COLUMNS) + "\n")

    @classmethod
    def from_csv(cls, path, dt: float | None = None) -> "Trajectory":
        with open(path, "r", encoding="ascii") as f:
            header = f.readline().strip()
            if header != CSV_HEADER:
                raise InvalidInputError(
                    f"bad trajectory header {header!r}, expected {CSV_HEADER!r}")
            rows = []
            for lineno, line in enumerate(f, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != len(_COLUMNS):
                    raise InvalidInputError(f"line {lineno}: expected {len(_COLUMNS)} fields")
                try:
                    rows.append([float(p) for p in parts])
                except ValueError as exc:
                    raise InvalidInputError(f"line {lineno}: non-numeric field") from exc
        if not rows:
            raise InvalidInputError("trajectory CSV has no data rows")
        cols = np.array(rows, dtype=float).T
        if dt is None:
            if len(rows) < 2:
                raise InvalidInputError("cannot infer dt from a single-row CSV; pass dt")
            dt = float(cols[0][1])
        return cls(dt, *cols)

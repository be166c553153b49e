"""Feed-forward torque regressor over joint position/velocity history.

Feature windows follow an asymmetric layout: positions include the current
sample (theta_t ... theta_{t-H}) while velocities start one step back
(thetadot_{t-1} ... thetadot_{t-H}), giving 2H + 1 features. The regression
target is the net actuator torque tau_pd + tau_friction at the window's
anchor step.

The network is implemented natively (numpy forward/backward, mini-batch SGD
with classical momentum) so training is bit-for-bit reproducible from a
seed and analytic gradients can be checked against finite differences.
Default architecture: two softsign hidden layers of width 32, linear output,
z-scored features and target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from frictionlab.errors import InvalidInputError, TrainingDivergenceError
from frictionlab.trajectory import Trajectory
from frictionlab.validation import check_array_finite, check_finite

DEFAULT_HISTORY = 3
DEFAULT_HIDDEN = (32, 32)


def _softsign(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.abs(x))


def _softsign_deriv(x: np.ndarray) -> np.ndarray:
    d = 1.0 + np.abs(x)
    return 1.0 / (d * d)


_ACTIVATIONS = {"softsign": (_softsign, _softsign_deriv)}


@dataclass(frozen=True)
class FeatureWindow:
    """One regression input: H+1 positions (newest first) and H velocities."""

    positions: tuple    # theta_t, theta_{t-1}, ..., theta_{t-H}
    velocities: tuple   # thetadot_{t-1}, ..., thetadot_{t-H}

    def __post_init__(self):
        if len(self.positions) != len(self.velocities) + 1:
            raise InvalidInputError(
                "window needs H+1 positions and H velocities, got "
                f"{len(self.positions)} and {len(self.velocities)}")
        for v in (*self.positions, *self.velocities):
            check_finite(window_value=v)

    @property
    def history(self) -> int:
        return len(self.velocities)

    def to_array(self) -> np.ndarray:
        return np.array([*self.positions, *self.velocities], dtype=float)


@dataclass(frozen=True)
class Normalization:
    """Per-feature and target z-score statistics; zero stds are floored to 1."""

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float

    @classmethod
    def fit(cls, features: np.ndarray, targets: np.ndarray) -> "Normalization":
        fstd = features.std(axis=0)
        fstd = np.where(fstd == 0.0, 1.0, fstd)
        tstd = float(targets.std())
        return cls(features.mean(axis=0), fstd, float(targets.mean()),
                   tstd if tstd != 0.0 else 1.0)

    def normalize_features(self, x: np.ndarray) -> np.ndarray:
        return (x - self.feature_mean) / self.feature_std

    def denormalize_features(self, xn: np.ndarray) -> np.ndarray:
        return xn * self.feature_std + self.feature_mean

    def normalize_target(self, y):
        return (y - self.target_mean) / self.target_std

    def denormalize_target(self, yn):
        return yn * self.target_std + self.target_mean


@dataclass(frozen=True)
class ActuatorDataset:
    """Windows, torque targets, and the normalization fitted over them."""

    features: np.ndarray   # (n, 2H+1)
    targets: np.ndarray    # (n,)
    history: int
    norm: Normalization

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise InvalidInputError("dataset must contain at least one window")
        if self.features.shape[1] != 2 * self.history + 1:
            raise InvalidInputError(
                f"feature width {self.features.shape[1]} inconsistent with "
                f"H={self.history}")
        if self.targets.shape != (self.features.shape[0],):
            raise InvalidInputError("targets must be one scalar per window")
        check_array_finite("features", self.features)
        check_array_finite("targets", self.targets)

    def __len__(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_arrays(cls, features: np.ndarray, targets: np.ndarray) -> "ActuatorDataset":
        features = np.asarray(features, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if features.ndim != 2 or features.shape[1] % 2 == 0:
            raise InvalidInputError("features must be (n, 2H+1)")
        history = (features.shape[1] - 1) // 2
        return cls(features, targets, history, Normalization.fit(features, targets))


def mixture_target(seed: int, components: int = 4,
                   omega_min: float = 2.5 * np.pi, omega_max: float = 5.0 * np.pi,
                   accel_min: float = 10.0, accel_max: float = 40.0):
    """Smooth mixture of sine excitations for synthetic data generation.

    Component frequencies are log-uniform in [omega_min, omega_max]; each
    amplitude is chosen so its angular-acceleration amplitude A*omega^2 is
    uniform in [accel_min, accel_max]. Keeping that demand above
    b_c / I means the tracking joint reverses through friction cleanly
    instead of latching for long stretches, which is what makes the torque
    a learnable function of the angle history.
    """
    if components < 1:
        raise InvalidInputError(f"components must be >= 1, got {components}")
    rng = np.random.default_rng(seed)
    omega = np.exp(rng.uniform(np.log(omega_min), np.log(omega_max), components))
    accel = rng.uniform(accel_min, accel_max, components)
    amp = accel / (omega * omega)
    phase = rng.uniform(0.0, 2.0 * np.pi, components)

    def target(t: float) -> float:
        return float(np.sum(amp * np.sin(omega * t + phase)))

    return target


def build_windows(traj: Trajectory, history: int = DEFAULT_HISTORY) -> ActuatorDataset:
    """Slice a trajectory into overlapping windows with torque targets."""
    if history < 1:
        raise InvalidInputError(f"history must be >= 1, got {history}")
    n = len(traj)
    if n <= history:
        raise InvalidInputError(
            f"trajectory has {n} rows; need more than H={history}")
    anchors = np.arange(history, n)
    position_cols = [traj.theta[anchors - k] for k in range(history + 1)]
    velocity_cols = [traj.theta_dot[anchors - k] for k in range(1, history + 1)]
    features = np.stack(position_cols + velocity_cols, axis=1)
    targets = traj.tau_pd[anchors] + traj.tau_friction[anchors]
    return ActuatorDataset(features, targets, history, Normalization.fit(features, targets))


def merge_datasets(datasets: list[ActuatorDataset]) -> ActuatorDataset:
    """Concatenate window sets (equal H) and refit normalization."""
    if not datasets:
        raise InvalidInputError("no datasets to merge")
    history = datasets[0].history
    if any(d.history != history for d in datasets):
        raise InvalidInputError("datasets disagree on history length")
    features = np.concatenate([d.features for d in datasets], axis=0)
    targets = np.concatenate([d.targets for d in datasets], axis=0)
    return ActuatorDataset(features, targets, history, Normalization.fit(features, targets))


class ActuatorNetModel:
    """Dense network plus the normalization it was trained with.

    ``dims`` runs input -> hidden... -> 1; hidden layers use the named
    activation, the output layer is linear. Prediction is a pure function of
    the window.
    """

    def __init__(self, dims: tuple[int, ...], activation: str,
                 weights: list[np.ndarray], biases: list[np.ndarray],
                 norm: Normalization):
        if activation not in _ACTIVATIONS:
            raise InvalidInputError(f"unknown activation {activation!r}")
        if dims[-1] != 1:
            raise InvalidInputError("output dimension must be 1")
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise InvalidInputError("one weight and bias matrix per layer required")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise InvalidInputError(
                    f"layer {i} shapes {w.shape}/{b.shape} inconsistent with dims {dims}")
        self.dims = tuple(int(d) for d in dims)
        self.activation = activation
        self.weights = weights
        self.biases = biases
        self.norm = norm

    @classmethod
    def initialize(cls, input_dim: int, hidden: tuple[int, ...], norm: Normalization,
                   seed: int, activation: str = "softsign") -> "ActuatorNetModel":
        rng = np.random.default_rng(seed)
        dims = (input_dim, *hidden, 1)
        weights, biases = [], []
        for i in range(len(dims) - 1):
            scale = np.sqrt(2.0 / (dims[i] + dims[i + 1]))
            weights.append(rng.normal(0.0, scale, size=(dims[i], dims[i + 1])))
            biases.append(np.zeros(dims[i + 1]))
        return cls(dims, activation, weights, biases, norm)

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    def _forward_normalized(self, xn: np.ndarray) -> np.ndarray:
        act, _ = _ACTIVATIONS[self.activation]
        h = xn
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                h = act(h)
        return h[:, 0]

    def predict(self, windows) -> np.ndarray | float:
        """Torque prediction for one window or a batch of rows."""
        if isinstance(windows, FeatureWindow):
            return float(self.predict(windows.to_array()[None, :])[0])
        x = np.asarray(windows, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise InvalidInputError(
                f"expected windows of width {self.input_dim}, got shape {x.shape}")
        check_array_finite("windows", x)
        yn = self._forward_normalized(self.norm.normalize_features(x))
        y = self.norm.denormalize_target(yn)
        return float(y[0]) if single else y

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "normalization": {
                "feature_mean": self.norm.feature_mean.tolist(),
                "feature_std": self.norm.feature_std.tolist(),
                "target_mean": self.norm.target_mean,
                "target_std": self.norm.target_std,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActuatorNetModel":
        norm = Normalization(
            np.array(d["normalization"]["feature_mean"], dtype=float),
            np.array(d["normalization"]["feature_std"], dtype=float),
            float(d["normalization"]["target_mean"]),
            float(d["normalization"]["target_std"]))
        return cls(tuple(d["dims"]), d["activation"],
                   [np.array(w, dtype=float) for w in d["weights"]],
                   [np.array(b, dtype=float) for b in d["biases"]], norm)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            json.dump(self.to_dict(), f, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json(cls, path) -> "ActuatorNetModel":
        with open(path, "r", encoding="ascii") as f:
            return cls.from_dict(json.load(f))


def predict(model: ActuatorNetModel, window) -> float:
    """Torque for a single window (array of width 2H+1 or FeatureWindow)."""
    if isinstance(window, FeatureWindow):
        return model.predict(window)
    arr = np.asarray(window, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError("predict takes one window; use model.predict for batches")
    return float(model.predict(arr))


def _loss_and_grads_normalized(model: ActuatorNetModel, xn: np.ndarray,
                               yn: np.ndarray):
    """MSE on the normalized scale and its gradients w.r.t. every parameter.

    Overflow is allowed to propagate as inf/nan; the trainer detects it via
    the loss and raises a divergence error, so the warnings are muted here.
    """
    act, dact = _ACTIVATIONS[model.activation]
    last = len(model.weights) - 1
    with np.errstate(over="ignore", invalid="ignore"):
        pre, post = [], [xn]
        h = xn
        for i, (w, b) in enumerate(zip(model.weights, model.biases)):
            z = h @ w + b
            pre.append(z)
            h = act(z) if i != last else z
            post.append(h)
        residual = post[-1][:, 0] - yn
        n = xn.shape[0]
        loss = float(np.mean(residual * residual))

        grad_w = [None] * len(model.weights)
        grad_b = [None] * len(model.biases)
        delta = (2.0 / n) * residual[:, None]
        for i in range(last, -1, -1):
            grad_w[i] = post[i].T @ delta
            grad_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ model.weights[i].T) * dact(pre[i - 1])
    return loss, grad_w, grad_b


def loss_and_gradients(model: ActuatorNetModel, features: np.ndarray,
                       targets: np.ndarray):
    """Raw-unit inputs; loss and gradients are computed on the z-scored scale.

    Exposed so gradient correctness can be verified against central finite
    differences on the very same quantity the trainer descends.
    """
    xn = model.norm.normalize_features(np.asarray(features, dtype=float))
    yn = model.norm.normalize_target(np.asarray(targets, dtype=float))
    return _loss_and_grads_normalized(model, xn, yn)


def train(data: ActuatorDataset, epochs: int = 200, batch_size: int = 64,
          learning_rate: float = 1e-3, momentum: float = 0.9, seed: int = 0,
          hidden: tuple[int, ...] = DEFAULT_HIDDEN,
          holdout_fraction: float = 0.1) -> tuple[ActuatorNetModel, float]:
    """Fit the regressor by mini-batch SGD with momentum.

    The dataset is split 90/10 by a seeded shuffle; optimization runs on the
    train part and the returned loss is the raw-unit MSE on the held-out
    part (the z-scored training objective is the same quantity up to the
    fixed target variance). Deterministic given the seed.
    """
    if epochs < 1 or batch_size < 1:
        raise InvalidInputError("epochs and batch_size must be >= 1")
    rng = np.random.default_rng(seed)
    n = len(data)
    order = rng.permutation(n)
    n_holdout = max(1, int(round(holdout_fraction * n))) if n > 1 else 0
    holdout_idx = order[:n_holdout]
    train_idx = order[n_holdout:]
    if train_idx.size == 0:
        train_idx = order

    xn = data.norm.normalize_features(data.features)
    yn = data.norm.normalize_target(data.targets)

    model = ActuatorNetModel.initialize(data.features.shape[1], hidden, data.norm,
                                        seed=seed)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]

    for epoch in range(epochs):
        perm = rng.permutation(train_idx.size)
        shuffled = train_idx[perm]
        for s in range(0, shuffled.size, batch_size):
            batch = shuffled[s:s + batch_size]
            loss, grad_w, grad_b = _loss_and_grads_normalized(
                model, xn[batch], yn[batch])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(
                    f"non-finite training loss at epoch {epoch}", epoch=epoch)
            for i in range(len(model.weights)):
                vel_w[i] = momentum * vel_w[i] - learning_rate * grad_w[i]
                vel_b[i] = momentum * vel_b[i] - learning_rate * grad_b[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]

    eval_idx = holdout_idx if holdout_idx.size else train_idx
    pred = model.predict(data.features[eval_idx])
    holdout_loss = float(np.mean((pred - data.targets[eval_idx]) ** 2))
    if not np.isfinite(holdout_loss):
        raise TrainingDivergenceError(
            f"non-finite held-out loss after epoch {epochs - 1}", epoch=epochs - 1)
    return model, holdout_loss


def evaluate(model: ActuatorNetModel, data: ActuatorDataset) -> tuple[float, float]:
    """(MSE, R^2) of the model over the dataset's true torques."""
    pred = model.predict(data.features)
    residual = pred - data.targets
    mse = float(np.mean(residual * residual))
    ss_res = float(np.sum(residual * residual))
    ss_tot = float(np.sum((data.targets - data.targets.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else float("-inf")
    else:
        r2 = 1.0 - ss_res / ss_tot
    return mse, r2


def linear_baseline_mse(data: ActuatorDataset, train_idx: np.ndarray,
                        eval_idx: np.ndarray) -> float:
    """Held-out MSE of the best affine predictor fitted by normal equations."""
    x = np.hstack([data.features[train_idx],
                   np.ones((train_idx.size, 1))])
    y = data.targets[train_idx]
    gram = x.T @ x
    try:
        coef = np.linalg.solve(gram, x.T @ y)
    except np.linalg.LinAlgError:
        coef = np.linalg.lstsq(x, y, rcond=None)[0]
    xe = np.hstack([data.features[eval_idx], np.ones((eval_idx.size, 1))])
    residual = xe @ coef - data.targets[eval_idx]
    return float(np.mean(residual * residual))


class ActuatorNetRegressor(BaseEstimator, RegressorMixin):
    """sklearn-style facade: fit(X, y) on raw window arrays in N*m.

    ``X`` rows are feature windows of width 2H+1; ``score`` inherits the R^2
    definition used by :func:`evaluate`.
    """

    def __init__(self, hidden_width=32, epochs=200, batch_size=64,
                 learning_rate=1e-3, momentum=0.9, holdout_fraction=0.1, seed=0):
        self.hidden_width = hidden_width
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.holdout_fraction = holdout_fraction
        self.seed = seed

    def fit(self, X, y):
        data = ActuatorDataset.from_arrays(X, y)
        self.model_, self.holdout_loss_ = train(
            data, epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, momentum=self.momentum,
            seed=self.seed, hidden=(self.hidden_width, self.hidden_width),
            holdout_fraction=self.holdout_fraction)
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("fit the regressor before predicting")
        return self.model_.predict(np.asarray(X, dtype=float))

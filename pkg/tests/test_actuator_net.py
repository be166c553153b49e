import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from frictionlab.actuator_net import (ActuatorDataset, ActuatorNetModel,
                                      ActuatorNetRegressor, FeatureWindow,
                                      Normalization, build_windows, evaluate,
                                      linear_baseline_mse, loss_and_gradients,
                                      merge_datasets, mixture_target, predict, train)
from frictionlab.errors import InvalidInputError, TrainingDivergenceError
from frictionlab.joint import JointParams, JointState, simulate
from frictionlab.trajectory import Trajectory


def ramp_trajectory(n=11, dt=1e-3):
    """Distinct values everywhere so window slicing is fully observable."""
    t = np.arange(n) * dt
    theta = np.arange(n, dtype=float)
    theta_dot = np.arange(n, dtype=float) * 10.0
    tau_pd = np.arange(n, dtype=float) * 100.0
    tau_f = np.arange(n, dtype=float) * 1000.0
    return Trajectory(dt, t, np.zeros(n), theta, theta_dot, tau_pd, tau_f)


class TestBuildWindows:
    def test_sample_count(self):
        data = build_windows(ramp_trajectory(11), history=3)
        assert len(data) == 8

    def test_feature_width(self):
        data = build_windows(ramp_trajectory(11), history=3)
        assert data.features.shape[1] == 7

    def test_window_layout_positions_include_now_velocities_lag(self):
        data = build_windows(ramp_trajectory(11), history=3)
        # first anchor is row 3: positions 3,2,1,0; velocities for rows 2,1,0
        assert np.array_equal(data.features[0], [3, 2, 1, 0, 20, 10, 0])
        # target is net torque at the anchor: tau_pd + tau_friction
        assert data.targets[0] == 300.0 + 3000.0

    def test_equilibrium_trajectory_constant(self, saturn):
        traj = simulate(saturn, lambda t: 0.1, 0.05, 1e-3,
                        initial=JointState(0.1, 0.0))
        data = build_windows(traj, history=3)
        assert np.all(data.targets == 0.0)
        assert np.all(data.features == data.features[0])

    def test_too_short_rejected(self):
        with pytest.raises(InvalidInputError):
            build_windows(ramp_trajectory(3), history=3)

    def test_merge_requires_same_history(self):
        a = build_windows(ramp_trajectory(11), history=3)
        b = build_windows(ramp_trajectory(11), history=2)
        with pytest.raises(InvalidInputError):
            merge_datasets([a, b])
        merged = merge_datasets([a, a])
        assert len(merged) == 2 * len(a)


class TestNormalization:
    @given(st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=25, deadline=None)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(scale=10.0 ** rng.integers(-3, 4), size=(20, 5))
        y = rng.normal(scale=10.0 ** rng.integers(-3, 4), size=20)
        norm = Normalization.fit(x, y)
        assert np.allclose(norm.denormalize_features(norm.normalize_features(x)), x,
                           rtol=1e-12, atol=1e-12)
        assert np.allclose(norm.denormalize_target(norm.normalize_target(y)), y,
                           rtol=1e-12, atol=1e-12)

    def test_constant_columns_do_not_blow_up(self):
        x = np.ones((4, 3))
        y = np.zeros(4)
        norm = Normalization.fit(x, y)
        assert np.all(norm.normalize_features(x) == 0.0)
        assert np.all(norm.normalize_target(y) == 0.0)


class TestPredict:
    def test_zero_network_predicts_zero(self):
        norm = Normalization(np.zeros(7), np.ones(7), 0.0, 1.0)
        model = ActuatorNetModel((7, 4, 1), "softsign",
                                 [np.zeros((7, 4)), np.zeros((4, 1))],
                                 [np.zeros(4), np.zeros(1)], norm)
        window = FeatureWindow(positions=(0.5, 0.4, 0.3, 0.2),
                               velocities=(1.0, 2.0, 3.0))
        assert predict(model, window) == 0.0

    def test_single_linear_layer_copies_first_feature(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 7))
        y = rng.normal(size=30)
        norm = Normalization.fit(x, y)
        w = np.zeros((7, 1))
        w[0, 0] = 1.0
        model = ActuatorNetModel((7, 1), "softsign", [w], [np.zeros(1)], norm)
        row = x[3]
        expected = norm.denormalize_target(norm.normalize_features(row)[0])
        assert predict(model, row) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch_rejected(self):
        norm = Normalization(np.zeros(7), np.ones(7), 0.0, 1.0)
        model = ActuatorNetModel((7, 4, 1), "softsign",
                                 [np.zeros((7, 4)), np.zeros((4, 1))],
                                 [np.zeros(4), np.zeros(1)], norm)
        with pytest.raises(InvalidInputError):
            model.predict(np.zeros(5))

    def test_window_length_validation(self):
        with pytest.raises(InvalidInputError):
            FeatureWindow(positions=(1.0, 2.0), velocities=(1.0, 2.0))


class TestTrain:
    def test_constant_dataset_converges(self):
        features = np.tile(np.array([0.1, 0.2, 0.3]), (64, 1))
        targets = np.full(64, 1.5)
        data = ActuatorDataset.from_arrays(features, targets)
        model, loss = train(data, epochs=150, batch_size=16, learning_rate=0.05,
                            momentum=0.9, seed=0, hidden=(8,))
        assert loss < 1e-8
        assert model.predict(features[:1])[0] == pytest.approx(1.5, abs=1e-3)

    def test_same_seed_identical_weights(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(200, 7))
        y = x @ rng.normal(size=7) + 0.1 * rng.normal(size=200)
        data = ActuatorDataset.from_arrays(x, y)
        m1, l1 = train(data, epochs=5, seed=9)
        m2, l2 = train(data, epochs=5, seed=9)
        assert l1 == l2
        for w1, w2 in zip(m1.weights, m2.weights):
            assert np.array_equal(w1, w2)
        for b1, b2 in zip(m1.biases, m2.biases):
            assert np.array_equal(b1, b2)

    def test_divergence_reports_epoch(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(128, 3))
        y = rng.normal(size=128)
        data = ActuatorDataset.from_arrays(x, y)
        with pytest.raises(TrainingDivergenceError) as err:
            train(data, epochs=50, learning_rate=1e9, seed=0)
        assert err.value.epoch >= 0

    def test_loss_non_increasing_on_constant_fit(self):
        features = np.tile(np.array([0.5, -0.5, 0.2]), (32, 1))
        targets = np.full(32, 2.0)
        data = ActuatorDataset.from_arrays(features, targets)
        losses = []
        for epochs in (1, 5, 25, 100):
            _, loss = train(data, epochs=epochs, batch_size=32, learning_rate=0.02,
                            momentum=0.9, seed=0, hidden=(4,))
            losses.append(loss)
        assert all(b <= a * (1.0 + 1e-9) for a, b in zip(losses, losses[1:]))


class TestGradients:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 5))
        y = rng.normal(size=6)
        norm = Normalization.fit(x, y)
        model = ActuatorNetModel.initialize(5, (4, 3), norm, seed=7)
        loss, grad_w, grad_b = loss_and_gradients(model, x, y)
        h = 1e-6
        worst = 0.0
        for arrs, grads in ((model.weights, grad_w), (model.biases, grad_b)):
            for layer, grad in zip(arrs, grads):
                for idx in np.ndindex(layer.shape):
                    orig = layer[idx]
                    layer[idx] = orig + h
                    up, _, _ = loss_and_gradients(model, x, y)
                    layer[idx] = orig - h
                    down, _, _ = loss_and_gradients(model, x, y)
                    layer[idx] = orig
                    fd = (up - down) / (2.0 * h)
                    denom = max(abs(fd), abs(grad[idx]), 1e-8)
                    worst = max(worst, abs(fd - grad[idx]) / denom)
        assert worst < 1e-5


class TestEvaluate:
    def test_mean_predictor_scores_zero_r2(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(100, 3))
        y = rng.normal(size=100)
        data = ActuatorDataset.from_arrays(x, y)
        norm = Normalization(x.mean(axis=0), np.where(x.std(axis=0) == 0, 1, x.std(axis=0)),
                             float(y.mean()), 1.0)
        model = ActuatorNetModel((3, 1), "softsign", [np.zeros((3, 1))],
                                 [np.zeros(1)], norm)
        mse, r2 = evaluate(model, data)
        assert r2 == pytest.approx(0.0, abs=1e-12)

    def test_perfect_predictor(self):
        # single linear layer solving a linear target exactly
        rng = np.random.default_rng(6)
        x = rng.normal(size=(50, 5))
        coef = np.array([1.0, -2.0, 0.5, 3.0, -1.5])
        y = x @ coef
        norm = Normalization.fit(x, y)
        # weights on the normalized scale reproducing the affine map
        w = (coef * norm.feature_std / norm.target_std)[:, None]
        bias = (x.mean(axis=0) @ coef - norm.target_mean) / norm.target_std
        model = ActuatorNetModel((5, 1), "softsign", [w], [np.array([bias])], norm)
        mse, r2 = evaluate(model, data=ActuatorDataset.from_arrays(x, y))
        assert mse < 1e-20
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_frictionless_net_reproduces_pd_torque(self, saturn):
        # [oracle: simulator with b_c = 0] net must track the torque to < 2% of std
        frictionless = JointParams(saturn.inertia_I, saturn.viscous_B, 0.0,
                                   saturn.motor_strength_k, saturn.kp, saturn.kd,
                                   saturn.tau_max)
        traj = simulate(frictionless, mixture_target(5), 20.0 + 3e-3, 1e-3)
        data = build_windows(traj, 3)
        model, holdout = train(data, epochs=500, seed=0)
        assert math.sqrt(holdout) < 0.02 * data.targets.std()


class TestSerialization:
    def test_model_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(40, 7))
        y = rng.normal(size=40)
        data = ActuatorDataset.from_arrays(x, y)
        model, _ = train(data, epochs=3, seed=0)
        path = tmp_path / "model.json"
        model.to_json(path)
        back = ActuatorNetModel.from_json(path)
        assert back.dims == model.dims
        assert np.array_equal(back.predict(x), model.predict(x))


class TestRegressorFacade:
    def test_fit_predict_score(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(400, 7))
        y = x @ rng.normal(size=7)
        reg = ActuatorNetRegressor(epochs=60, learning_rate=5e-3, seed=0)
        reg.fit(x, y)
        pred = reg.predict(x)
        assert pred.shape == (400,)
        assert reg.score(x, y) > 0.9

    def test_not_fitted_raises(self):
        with pytest.raises(NotFittedError):
            ActuatorNetRegressor().predict(np.zeros((1, 7)))

    def test_sklearn_params_protocol(self):
        reg = ActuatorNetRegressor(epochs=12, seed=4)
        assert reg.get_params()["epochs"] == 12
        assert clone(reg).get_params() == reg.get_params()

    def test_beats_linear_on_friction_data(self, saturn):
        traj = simulate(saturn, mixture_target(7), 20.0 + 3e-3, 1e-3)
        data = build_windows(traj, 3)
        model, holdout = train(data, epochs=600, seed=0)
        rng = np.random.default_rng(0)
        order = rng.permutation(len(data))
        n_holdout = max(1, int(round(0.1 * len(data))))
        lin = linear_baseline_mse(data, order[n_holdout:], order[:n_holdout])
        assert holdout < lin

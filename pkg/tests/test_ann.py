import numpy as np
import pytest

from oracles import finite_difference_gradient
from rainclaims.ann import (
    AnnModel,
    AnnTrainConfig,
    ann_forward,
    ann_gradient,
    ann_predict,
    ann_train,
    sigmoid,
)
from rainclaims.errors import AnnDivergenceError
from rainclaims.svr import Scaler


def identity_scaler(m):
    return Scaler(
        x_mean=np.zeros(m),
        x_std=np.ones(m),
        y_mean=0.0,
        y_std=1.0,
        x_const=np.zeros(m, dtype=bool),
        y_const=False,
    )


def make_model(rng, m=4, h=2, scale=1.0):
    return AnnModel(
        hidden_w=rng.normal(size=(m, h)) * scale,
        hidden_b=rng.normal(size=h) * scale,
        out_w=rng.normal(size=h) * scale,
        out_b=float(rng.normal()) * scale,
        scaler=identity_scaler(m),
    )


class TestForward:
    def test_zero_network(self):
        model = AnnModel(
            hidden_w=np.zeros((4, 2)),
            hidden_b=np.zeros(2),
            out_w=np.zeros(2),
            out_b=0.0,
            scaler=identity_scaler(4),
        )
        assert ann_forward(model, np.zeros(4)) == 0.0

    def test_hand_evaluation(self):
        # one hidden unit fed only by the first input, which is zero:
        # output = 1 + 2 * sigmoid(0) = 2
        model = AnnModel(
            hidden_w=np.array([[1.0], [0.0], [0.0], [0.0]]),
            hidden_b=np.zeros(1),
            out_w=np.array([2.0]),
            out_b=1.0,
            scaler=identity_scaler(4),
        )
        x = np.array([0.0, 3.0, -1.0, 2.0])
        assert ann_forward(model, x) == pytest.approx(2.0, rel=1e-14)

    def test_constant_head(self):
        rng = np.random.default_rng(0)
        model = AnnModel(
            hidden_w=rng.normal(size=(3, 2)),
            hidden_b=rng.normal(size=2),
            out_w=np.zeros(2),
            out_b=0.7,
            scaler=identity_scaler(3),
        )
        for _ in range(5):
            assert ann_forward(model, rng.normal(size=3)) == pytest.approx(0.7)

    def test_dimension_mismatch(self):
        model = make_model(np.random.default_rng(1))
        with pytest.raises(ValueError):
            ann_forward(model, np.zeros(3))

    def test_hidden_activations_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(2)
        model = make_model(rng)
        for _ in range(50):
            x = rng.normal(size=4)
            z = sigmoid(model.scaler.transform_x(x) @ model.hidden_w + model.hidden_b)
            assert np.all(z > 0.0) and np.all(z < 1.0)


class TestGradient:
    def test_zero_gradient_at_exact_fit(self):
        rng = np.random.default_rng(3)
        model = make_model(rng)
        x = rng.normal(size=4)
        y = ann_forward(model, x)
        grad = ann_gradient(model, x, y)
        assert np.allclose(grad.hidden_w, 0) and np.allclose(grad.out_w, 0)
        assert grad.out_b == 0.0

    def test_output_bias_gradient_is_error(self):
        rng = np.random.default_rng(4)
        model = make_model(rng)
        x = rng.normal(size=4)
        y = 0.3
        grad = ann_gradient(model, x, y)
        assert grad.out_b == pytest.approx(ann_forward(model, x) - y, rel=1e-12)

    def test_matches_finite_differences(self):
        # independent oracle: re-implement the forward pass locally and probe
        # each weight with central differences
        rng = np.random.default_rng(5)
        failures = 0
        for _ in range(50):
            model = make_model(rng, m=int(rng.integers(1, 5)), h=int(rng.integers(1, 4)),
                               scale=0.8)
            x = rng.normal(size=model.n_features)
            y = float(rng.normal())
            w1 = model.hidden_w.copy()
            b1 = model.hidden_b.copy()
            w2 = model.out_w.copy()
            b2 = np.array([model.out_b])

            def loss():
                z = 1.0 / (1.0 + np.exp(-(x @ w1 + b1)))
                return 0.5 * float(z @ w2 + b2[0] - y) ** 2

            fd = finite_difference_gradient(loss, [w1, b1, w2, b2], h=1e-5)
            grad = ann_gradient(model, x, y)
            for got, want in zip((grad.hidden_w, grad.hidden_b, grad.out_w,
                                  np.array([grad.out_b])), fd):
                denom = max(1.0, float(np.max(np.abs(want))))
                if np.max(np.abs(got - want)) / denom >= 1e-5:
                    failures += 1
                    break
        assert failures == 0


class TestTraining:
    def test_recovers_linear_target(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(-2, 2, size=(80, 1))
        y = 2.0 * x[:, 0]
        model = ann_train(x, y, hidden=2, config=AnnTrainConfig(epochs=15000, learning_rate=0.2, seed=0))
        preds = ann_predict(model, x)
        scaled_rmse = np.sqrt(np.mean((preds - y) ** 2)) / model.scaler.y_std
        assert scaled_rmse < 0.05

    def test_zero_learning_rate_is_noop(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(12, 3))
        y = rng.normal(size=12)
        trained = ann_train(x, y, hidden=2, config=AnnTrainConfig(learning_rate=0.0, epochs=50, seed=1))
        init_rng = np.random.default_rng(1)
        w1 = init_rng.uniform(-0.5, 0.5, size=(3, 2))
        np.testing.assert_array_equal(trained.hidden_w, w1)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(20, 2))
        y = rng.normal(size=20)
        config = AnnTrainConfig(epochs=200, seed=5)
        a = ann_train(x, y, hidden=3, config=config)
        b = ann_train(x, y, hidden=3, config=config)
        np.testing.assert_array_equal(a.hidden_w, b.hidden_w)
        np.testing.assert_array_equal(a.loss_history, b.loss_history)

    def test_loss_non_increasing_at_small_rate(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(-2, 2, size=(60, 1))
        y = 2.0 * x[:, 0]
        model = ann_train(x, y, hidden=2, config=AnnTrainConfig(epochs=800, learning_rate=1e-3, seed=2))
        assert np.all(np.diff(model.loss_history) <= 1e-12)

    def test_divergence_reports_epoch(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(30, 2)) * 50
        y = rng.normal(size=30) * 50
        with pytest.raises(AnnDivergenceError) as err:
            ann_train(x, y, hidden=2, config=AnnTrainConfig(learning_rate=1e9, epochs=200, seed=3))
        assert err.value.epoch >= 0

    def test_minibatch_runs(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        model = ann_train(x, y, hidden=2,
                          config=AnnTrainConfig(epochs=100, batch_size=8, seed=4))
        assert np.isfinite(model.loss_history).all()

    def test_descale_round_trip(self):
        rng = np.random.default_rng(12)
        x = rng.normal(100.0, 25.0, size=(40, 2))
        y = rng.normal(5000.0, 800.0, size=40)
        model = ann_train(x, y, hidden=2, config=AnnTrainConfig(epochs=10, seed=6))
        xs = model.scaler.transform_x(x)
        z = sigmoid(xs @ model.hidden_w + model.hidden_b)
        manual = model.scaler.inverse_y(z @ model.out_w + model.out_b)
        np.testing.assert_allclose(ann_predict(model, x), manual, rtol=1e-12)

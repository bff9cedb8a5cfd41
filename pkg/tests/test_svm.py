import numpy as np
import pytest

from oracles import svm_dual_oracle
from scatterprint.errors import ValidationError
from scatterprint.svm import (
    LINEAR_KERNEL,
    Kernel,
    MulticlassSvmModel,
    decision_value,
    decision_values,
    dual_objective,
    load_svm,
    predict,
    save_svm,
    train_binary,
    train_multiclass,
)


def _alphas_for(model, x):
    """Recover the dual variable of each training row (0 if not stored)."""
    alphas = np.zeros(len(x))
    for i, xi in enumerate(x):
        hits = np.flatnonzero((model.support_vectors == xi).all(axis=1))
        if hits.size:
            alphas[i] = abs(model.dual_coefs[hits[0]])
    return alphas


def _random_problem(rng):
    while True:
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        x = rng.normal(size=(n, d)) * rng.uniform(0.5, 2.0)
        y = rng.choice([-1.0, 1.0], size=n)
        if (y > 0).any() and (y < 0).any():
            return x, y


class TestBinaryTraining:
    def test_symmetric_pair(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        model = train_binary(x, y, penalty=1.0)
        np.testing.assert_allclose(np.abs(model.dual_coefs), [0.5, 0.5], atol=1e-9)
        assert model.bias == pytest.approx(0.0, abs=1e-9)
        assert decision_value(model, np.array([3.0])) == pytest.approx(3.0, abs=1e-8)
        assert decision_value(model, np.array([0.0])) == pytest.approx(0.0, abs=1e-8)

    def test_xor_soft_margin(self):
        x = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0])
        model = train_binary(x, y, penalty=1.0)
        # the unique optimum puts every point at the box bound
        np.testing.assert_allclose(np.abs(model.dual_coefs), 1.0, atol=1e-9)
        assert dual_objective(model) == pytest.approx(4.0, abs=1e-9)
        oracle_value, _ = svm_dual_oracle(x, y, 1.0)
        assert dual_objective(model) == pytest.approx(oracle_value, abs=1e-3)

    def test_objective_matches_oracle(self, rng):
        for trial in range(25):
            x, y = _random_problem(rng)
            penalty = [0.1, 1.0, 10.0][trial % 3]
            model = train_binary(x, y, penalty=penalty)
            oracle_value, _ = svm_dual_oracle(x, y, penalty)
            assert dual_objective(model) == pytest.approx(oracle_value, abs=1e-3)

    def test_dual_feasibility_and_kkt(self, rng):
        for trial in range(15):
            x, y = _random_problem(rng)
            penalty = [0.1, 1.0, 10.0][trial % 3]
            model = train_binary(x, y, penalty=penalty)
            alphas = _alphas_for(model, x)
            assert np.all(alphas >= 0.0) and np.all(alphas <= penalty + 1e-12)
            # dual_coefs are alpha_i * y_i, so their sum is the equality constraint
            assert abs(model.dual_coefs.sum()) <= 1e-6
            margins = y * decision_values(model, x)
            for margin, alpha in zip(margins, alphas):
                if alpha <= 1e-12:
                    assert margin >= 1.0 - 1e-3
                elif alpha >= penalty - 1e-12:
                    assert margin <= 1.0 + 1e-3
                else:
                    assert margin == pytest.approx(1.0, abs=1e-3)

    def test_free_support_vector_margin(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        model = train_binary(x, y, penalty=1.0)
        for sv, coef in zip(model.support_vectors, model.dual_coefs):
            assert 0 < abs(coef) < 1.0
            assert np.sign(coef) * decision_value(model, sv) == pytest.approx(1.0, abs=1e-3)

    def test_linear_weight_recovery(self, rng):
        x, y = _random_problem(rng)
        model = train_binary(x, y, penalty=1.0)
        weights = model.dual_coefs @ model.support_vectors
        probe = rng.normal(size=x.shape[1])
        assert decision_value(model, probe) == pytest.approx(
            weights @ probe + model.bias, abs=1e-8
        )

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError):
            train_binary(np.zeros((3, 2)), np.ones(3))

    def test_nonpositive_penalty_rejected(self):
        x = np.array([[0.0], [1.0]])
        y = np.array([-1.0, 1.0])
        with pytest.raises(ValidationError):
            train_binary(x, y, penalty=0.0)

    def test_bad_labels_rejected(self):
        with pytest.raises(ValidationError):
            train_binary(np.zeros((2, 1)), np.array([0.0, 1.0]))

    def test_update_cap_raises_training_error(self, rng):
        from scatterprint.errors import TrainingError

        x = rng.normal(size=(30, 2))
        y = np.where(rng.random(30) > 0.5, 1.0, -1.0)
        y[0], y[1] = 1.0, -1.0
        with pytest.raises(TrainingError, match="KKT violation"):
            train_binary(x, y, penalty=10.0, max_updates=1)

    def test_lru_cache_matches_dense(self, rng):
        x = rng.normal(size=(20, 3))
        y = np.where(x[:, 0] + 0.2 * rng.normal(size=20) > 0, 1.0, -1.0)
        if not ((y > 0).any() and (y < 0).any()):
            y[0] = -y[0]
        dense = train_binary(x, y, penalty=1.0, dense_limit=4096)
        cached = train_binary(x, y, penalty=1.0, dense_limit=4)
        np.testing.assert_array_equal(dense.support_vectors, cached.support_vectors)
        np.testing.assert_array_equal(dense.dual_coefs, cached.dual_coefs)
        assert dense.bias == cached.bias

    def test_custom_kernel(self, rng):
        quadratic = Kernel("custom", func=lambda a, b: (1.0 + a @ b) ** 2)
        x = rng.normal(size=(8, 2))
        y = np.where(x[:, 0] ** 2 + x[:, 1] ** 2 > 1.0, 1.0, -1.0)
        if not ((y > 0).any() and (y < 0).any()):
            y[0] = -y[0]
        model = train_binary(x, y, kernel=quadratic, penalty=5.0)
        # sampled symmetry of the kernel itself
        for _ in range(10):
            a, b = rng.normal(size=2), rng.normal(size=2)
            assert quadratic.func(a, b) == pytest.approx(quadratic.func(b, a), abs=1e-12)
        margins = y * decision_values(model, x)
        alphas = _alphas_for(model, x)
        for margin, alpha in zip(margins, alphas):
            if 1e-12 < alpha < 5.0 - 1e-12:
                assert margin == pytest.approx(1.0, abs=1e-3)


class TestDecision:
    def test_length_mismatch(self):
        x = np.array([[-1.0, 0.0], [1.0, 0.0]])
        y = np.array([-1.0, 1.0])
        model = train_binary(x, y)
        with pytest.raises(ValidationError):
            decision_value(model, np.zeros(3))


def _clusters(rng, centers, per_class=8, spread=0.15):
    xs, ys = [], []
    for label, center in enumerate(centers):
        xs.append(center + spread * rng.normal(size=(per_class, len(center))))
        ys.append(np.full(per_class, label))
    return np.vstack(xs), np.concatenate(ys)


class TestMulticlass:
    def test_three_separable_clusters(self, rng):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([4.0, 0.0]), np.array([0.0, 4.0])])
        model = train_multiclass(x, labels, penalty=1.0)
        assert len(model.models) == 3
        assert list(model.classes) == [0, 1, 2]
        np.testing.assert_array_equal(predict(model, x), labels)
        assert predict(model, np.array([0.1, 3.9])) == 2

    def test_two_class_degenerates_to_binary(self, rng):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([3.0, 3.0])])
        multi = train_multiclass(x, labels, penalty=1.0)
        binary = train_binary(x, np.where(labels == 1, 1.0, -1.0), penalty=1.0)
        probes = rng.normal(size=(40, 2)) * 3.0
        by_sign = (decision_values(binary, probes) > 0).astype(int)
        np.testing.assert_array_equal(predict(multi, probes), by_sign)

    def test_tie_breaks_to_smaller_label(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        shared = train_binary(x, y)
        model = MulticlassSvmModel(classes=np.array([3, 7]), models=[shared, shared])
        assert predict(model, np.array([0.5])) == 3

    def test_argmax_matches_per_class_oracle(self, rng):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([2.5, 0.0]), np.array([1.2, 2.2])], per_class=4)
        penalty = 1.0
        model = train_multiclass(x, labels, penalty=penalty)
        probes = rng.normal(size=(10, 2)) * 2.0
        oracle_margins = []
        for cls in (0, 1, 2):
            y = np.where(labels == cls, 1.0, -1.0)
            _, alpha = svm_dual_oracle(x, y, penalty)
            coef = alpha * y
            weights = coef @ x
            free = (alpha > 1e-6) & (alpha < penalty - 1e-6)
            gram_margin = y - x @ weights
            bias = gram_margin[free].mean()
            oracle_margins.append(probes @ weights + bias)
        oracle_pred = np.argmax(np.column_stack(oracle_margins), axis=1)
        np.testing.assert_array_equal(predict(model, probes), oracle_pred)

    def test_positive_scaling_leaves_predictions(self, rng):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([3.0, 0.0]), np.array([0.0, 3.0])])
        probes = rng.normal(size=(25, 2)) * 2.0 + 1.0
        base = predict(train_multiclass(x, labels, penalty=1.0), probes)
        scaled = predict(train_multiclass(3.7 * x, labels, penalty=1.0), 3.7 * probes)
        np.testing.assert_array_equal(base, scaled)

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError):
            train_multiclass(np.zeros((3, 2)), np.zeros(3))


class TestPersistence:
    def test_roundtrip(self, rng, tmp_path):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([3.0, 0.0]), np.array([0.0, 3.0])], per_class=4)
        model = train_multiclass(x, labels, penalty=2.0)
        path = tmp_path / "model.svm1"
        save_svm(path, model)
        loaded = load_svm(path)
        assert list(loaded.classes) == list(model.classes)
        probes = rng.normal(size=(12, 2)) * 2.0
        np.testing.assert_array_equal(predict(loaded, probes), predict(model, probes))
        for a, b in zip(loaded.models, model.models):
            np.testing.assert_array_equal(a.support_vectors, b.support_vectors)
            np.testing.assert_array_equal(a.dual_coefs, b.dual_coefs)
            assert a.bias == b.bias
            assert a.penalty == b.penalty

    def test_byte_deterministic(self, rng, tmp_path):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([2.0, 2.0])], per_class=3)
        model = train_multiclass(x, labels)
        a, b = tmp_path / "a.svm1", tmp_path / "b.svm1"
        save_svm(a, model)
        save_svm(b, model)
        assert a.read_bytes() == b.read_bytes()

    def test_noncanonical_labels_rejected(self, rng, tmp_path):
        x, labels = _clusters(rng, [np.array([0.0, 0.0]), np.array([2.0, 2.0])], per_class=3)
        model = train_multiclass(x, labels + 5)
        with pytest.raises(ValidationError):
            save_svm(tmp_path / "x.svm1", model)

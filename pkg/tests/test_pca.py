import numpy as np
import pytest

from oracles import pca_oracle
from scatterprint.errors import ValidationError
from scatterprint.pca import (
    choose_k,
    fit_pca,
    load_pca,
    project,
    retained_variance,
    save_pca,
    truncate,
)
from scatterprint.scattering import FeatureVector


class TestFit:
    def test_symmetric_pair(self):
        model = fit_pca(np.array([[1.0, 0.0], [-1.0, 0.0]]), 1)
        np.testing.assert_allclose(model.mean, [0.0, 0.0], atol=1e-15)
        assert model.eigenvalues[0] == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(model.basis[0], [1.0, 0.0], atol=1e-12)

    def test_accepts_feature_vectors(self, rng):
        features = [FeatureVector(rng.random(6)) for _ in range(5)]
        model = fit_pca(features, 2)
        assert model.n_components == 2
        assert model.dim == 6

    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            m = int(rng.integers(3, 21))
            d = int(rng.integers(2, 31))
            data = rng.normal(size=(m, d)) * rng.uniform(0.5, 3.0)
            model = fit_pca(data, min(m - 1, d))
            mean_o, eig_o, basis_o = pca_oracle(data)
            np.testing.assert_allclose(model.mean, mean_o, atol=1e-8)
            np.testing.assert_allclose(model.eigenvalues, eig_o, atol=1e-8)
            np.testing.assert_allclose(model.basis, basis_o, atol=1e-7)

    def test_component_range_names_maximum(self, rng):
        data = rng.normal(size=(5, 10))
        with pytest.raises(ValidationError, match="maximum achievable.*4"):
            fit_pca(data, 5)
        with pytest.raises(ValidationError):
            fit_pca(data, 0)

    def test_too_few_vectors(self):
        with pytest.raises(ValidationError):
            fit_pca(np.array([[1.0, 2.0]]), 1)

    def test_full_feature_dimensions(self, rng):
        # the default operating point: 782-long features, 200 kept components
        data = rng.normal(size=(250, 782))
        model = fit_pca(data, 200)
        assert model.n_components == 200
        assert model.basis.shape == (249, 782)
        assert project(model, data).shape == (250, 200)


class TestProject:
    def test_mean_projects_to_zero(self, rng):
        data = rng.normal(size=(8, 5))
        model = fit_pca(data, 3)
        np.testing.assert_allclose(project(model, model.mean), 0.0, atol=1e-12)

    def test_symmetric_pair_projection(self):
        model = fit_pca(np.array([[1.0, 0.0], [-1.0, 0.0]]), 1)
        np.testing.assert_allclose(project(model, np.array([1.0, 0.0])), [1.0], atol=1e-12)

    def test_matches_explicit_dot_products(self, rng):
        data = rng.normal(size=(10, 7))
        model = fit_pca(data, 4)
        vec = rng.normal(size=7)
        expected = np.array(
            [model.basis[j] @ (vec - model.mean) for j in range(4)]
        )
        np.testing.assert_allclose(project(model, vec), expected, atol=1e-10)

    def test_batch_projection(self, rng):
        data = rng.normal(size=(9, 6))
        model = fit_pca(data, 2)
        batch = project(model, data)
        assert batch.shape == (9, 2)
        np.testing.assert_allclose(batch[3], project(model, data[3]))

    def test_length_mismatch(self, rng):
        model = fit_pca(rng.normal(size=(5, 4)), 2)
        with pytest.raises(ValidationError):
            project(model, np.zeros(5))


class TestVarianceBookkeeping:
    def test_full_rank_ratio_is_one(self, rng):
        model = fit_pca(rng.normal(size=(8, 4)), 2)
        assert retained_variance(model, model.rank) == 1.0

    def test_simple_ratio(self):
        data = np.array(
            [[np.sqrt(1.5), 0.0], [-np.sqrt(1.5), 0.0], [0.0, np.sqrt(0.5)], [0.0, -np.sqrt(0.5)]]
        )
        model = fit_pca(data, 2)
        np.testing.assert_allclose(model.eigenvalues, [3.0, 1.0], atol=1e-12)
        assert retained_variance(model, 1) == pytest.approx(0.75)
        assert choose_k(model, 0.7) == 1
        assert choose_k(model, 0.76) == 2

    def test_matches_oracle_ratios(self, rng):
        data = rng.normal(size=(12, 6))
        model = fit_pca(data, 6)
        _, eig_o, _ = pca_oracle(data)
        for k in range(1, model.rank + 1):
            assert retained_variance(model, k) == pytest.approx(
                eig_o[:k].sum() / eig_o.sum(), abs=1e-10
            )

    def test_choose_k_scan_matches(self, rng):
        data = rng.normal(size=(15, 8))
        model = fit_pca(data, 8)
        for eps in (0.5, 0.9, 0.95, 0.99, 1.0):
            scan = next(
                k for k in range(1, model.rank + 1) if retained_variance(model, k) >= eps
            )
            assert choose_k(model, eps) == scan

    def test_choose_k_epsilon_one_full_rank(self, rng):
        model = fit_pca(rng.normal(size=(6, 3)), 3)
        assert choose_k(model, 1.0) == model.rank

    def test_out_of_range(self, rng):
        model = fit_pca(rng.normal(size=(5, 3)), 2)
        with pytest.raises(ValidationError):
            retained_variance(model, 0)
        with pytest.raises(ValidationError):
            choose_k(model, 0.0)

    def test_zero_variance_training_set(self):
        model = fit_pca(np.ones((4, 3)), 1)
        assert retained_variance(model, 1) == 1.0
        assert choose_k(model, 0.95) == 1


class TestInvariants:
    def test_basis_orthonormal(self, rng):
        model = fit_pca(rng.normal(size=(20, 10)), 5)
        gram = model.basis @ model.basis.T
        np.testing.assert_allclose(gram, np.eye(model.rank), atol=1e-8)

    def test_projections_uncorrelated_with_variance_lambda(self, rng):
        data = rng.normal(size=(15, 9))
        model = fit_pca(data, min(14, 9))
        full = truncate(model, model.rank)
        projected = project(full, data)
        scatter_matrix = projected.T @ projected
        off = scatter_matrix - np.diag(np.diag(scatter_matrix))
        assert np.abs(off).max() <= 1e-6 * np.diag(scatter_matrix).max()
        np.testing.assert_allclose(
            np.diag(scatter_matrix), model.eigenvalues, rtol=1e-8
        )

    def test_full_rank_roundtrip(self, rng):
        data = rng.normal(size=(10, 6))
        model = fit_pca(data, min(9, 6))
        full = truncate(model, model.rank)
        coords = project(full, data)
        rebuilt = model.mean + coords @ full.basis[: full.n_components]
        np.testing.assert_allclose(rebuilt, data, rtol=1e-6, atol=1e-9)


class TestPersistence:
    def test_roundtrip(self, tmp_path, rng):
        model = fit_pca(rng.normal(size=(12, 7)), 4)
        path = tmp_path / "model.pca1"
        save_pca(path, model)
        loaded = load_pca(path)
        np.testing.assert_array_equal(loaded.mean, model.mean)
        np.testing.assert_array_equal(loaded.eigenvalues, model.eigenvalues)
        np.testing.assert_array_equal(loaded.basis, model.basis)
        assert loaded.n_components == model.n_components

    def test_byte_deterministic(self, tmp_path, rng):
        model = fit_pca(rng.normal(size=(6, 4)), 2)
        a, b = tmp_path / "a.pca1", tmp_path / "b.pca1"
        save_pca(a, model)
        save_pca(b, model)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic(self, tmp_path):
        bad = tmp_path / "bad.pca1"
        bad.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(OSError):
            load_pca(bad)

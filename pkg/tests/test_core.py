import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lig import (DegenerateCovarianceError, invert_cov, is_positive_definite,
                 repair_covariance, sigma)


class TestSigma:
    def test_zero_displacement(self):
        assert sigma([0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0]) == 0.0

    def test_identity_unit_offsets(self):
        assert sigma([0.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0]) == pytest.approx(1.0)

    def test_scaled_diagonal(self):
        assert sigma([0.0, 0.0], [2.0, 0.0, 2.0], [2.0, 0.0]) == pytest.approx(1.0)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateCovarianceError):
            sigma([0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 0.0])

    def test_indefinite_can_be_negative(self):
        # det < 0: the quadratic form takes both signs over the plane
        s = sigma([0.0, 0.0], [1.0, 2.0, 1.0], [1.0, -1.0])
        assert s < 0


class TestIsPositiveDefinite:
    def test_identity(self):
        assert is_positive_definite([1.0, 0.0, 1.0], 1e-6)

    def test_negative_det(self):
        assert not is_positive_definite([1.0, 2.0, 1.0], 1e-6)

    def test_negative_leading_minor(self):
        assert not is_positive_definite([-1.0, 0.0, 1.0], 1e-6)

    def test_vectorized(self):
        covs = np.array([[1.0, 0.0, 1.0], [1.0, 2.0, 1.0], [-1.0, 0.0, 1.0]])
        np.testing.assert_array_equal(
            is_positive_definite(covs, 1e-6), [True, False, False]
        )


class TestRepairCovariance:
    def test_identity_on_pd(self):
        np.testing.assert_array_equal(
            repair_covariance(np.array([1.0, 0.0, 1.0]), 1e-4), [1.0, 0.0, 1.0]
        )

    def test_clamps_leading_minor(self):
        np.testing.assert_allclose(
            repair_covariance(np.array([-1.0, 0.0, 1.0]), 1e-4), [1e-4, 0.0, 1.0]
        )

    def test_caps_off_diagonal(self):
        # expected value computed as (1 - eps) * sqrt(a * c) = 0.9999
        out = repair_covariance(np.array([1.0, 5.0, 1.0]), 1e-4)
        np.testing.assert_allclose(out, [1.0, 0.9999, 1.0])
        # direct 2x2 eigenvalue oracle confirms positive definiteness
        eigs = np.linalg.eigvalsh([[out[0], out[1]], [out[1], out[2]]])
        assert np.all(eigs > 0)

    @given(st.tuples(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)))
    @settings(max_examples=300)
    def test_idempotent(self, triple):
        x = repair_covariance(np.array(triple), 1e-4)
        np.testing.assert_array_equal(repair_covariance(x, 1e-4), x)

    @given(st.tuples(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)))
    @settings(max_examples=300)
    def test_result_is_pd_by_eigenvalues(self, triple):
        a, b, c = repair_covariance(np.array(triple), 1e-4)
        eigs = np.linalg.eigvalsh([[a, b], [b, c]])
        assert np.all(eigs > 0)


class TestInvertCov:
    def test_diagonal(self):
        inv, det = invert_cov(np.array([2.0, 0.0, 2.0]))
        np.testing.assert_allclose(inv, [0.5, 0.0, 0.5])
        assert det == pytest.approx(4.0)

    def test_identity(self):
        inv, det = invert_cov(np.array([1.0, 0.0, 1.0]))
        np.testing.assert_allclose(inv, [1.0, 0.0, 1.0])
        assert det == pytest.approx(1.0)

    def test_product_is_identity(self):
        cov = np.array([2.0, 1.0, 2.0])
        inv, det = invert_cov(cov)
        assert det == pytest.approx(3.0)
        sig = np.array([[cov[0], cov[1]], [cov[1], cov[2]]])
        isig = np.array([[inv[0], inv[1]], [inv[1], inv[2]]])
        np.testing.assert_allclose(sig @ isig, np.eye(2), atol=1e-6)
        np.testing.assert_allclose(inv, [2 / 3, -1 / 3, 2 / 3])

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateCovarianceError):
            invert_cov(np.array([1.0, 1.0, 1.0]))

    def test_double_inverse_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            a, c = rng.uniform(0.5, 5.0, 2)
            b = rng.uniform(-0.9, 0.9) * np.sqrt(a * c)
            cov = np.array([a, b, c])
            cond = np.linalg.cond([[a, b], [b, c]])
            if cond >= 1e4:
                continue
            inv, _ = invert_cov(cov)
            back, _ = invert_cov(inv)
            np.testing.assert_allclose(back, cov, rtol=1e-6)


def test_sigma_positive_for_pd_cov():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, c = rng.uniform(0.01, 5.0, 2)
        b = rng.uniform(-0.99, 0.99) * np.sqrt(a * c)
        cov = np.array([a, b, c])
        if not is_positive_definite(cov, 1e-6):
            continue
        p = rng.normal(0, 10, 2)
        if np.allclose(p, 0):
            continue
        assert sigma([0.0, 0.0], cov, p) > 0

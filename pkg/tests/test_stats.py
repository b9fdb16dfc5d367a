import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gridstealth as gs
from gridstealth.errors import ParameterError, ShapeError
from gridstealth.stats import check_covariance, covariance_sqrt, derive_seed, make_rng

from conftest import random_pd, scalar_model


def test_toeplitz_zero_rho_is_identity():
    np.testing.assert_array_equal(gs.toeplitz_covariance(3, 0.0), np.eye(3))


def test_toeplitz_half():
    expected = [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]]
    np.testing.assert_array_equal(gs.toeplitz_covariance(3, 0.5), expected)


@pytest.mark.parametrize("rho", [1.0, -0.1, 1.5])
def test_toeplitz_rejects_rho(rho):
    with pytest.raises(ParameterError, match="invalid correlation strength"):
        gs.toeplitz_covariance(2, rho)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 64), rho=st.floats(0.0, 0.999))
def test_toeplitz_positive_definite(n, rho):
    assert np.linalg.eigvalsh(gs.toeplitz_covariance(n, rho))[0] > 1e-12


def test_measurement_covariance_scalar():
    m = scalar_model()
    np.testing.assert_array_equal(gs.measurement_covariance(m), [[2.0]])
    np.testing.assert_array_equal(gs.measurement_covariance(m, np.array([[1.0]])), [[3.0]])


def test_measurement_covariance_shape_error():
    with pytest.raises(ShapeError, match="shape error"):
        gs.measurement_covariance(scalar_model(), np.eye(2))


def test_snr_examples(jac30):
    assert gs.snr_db(scalar_model(sigma_sq=0.1)) == pytest.approx(10.0, abs=1e-12)
    # tr(H Sxx H^T) = M with sigma^2 = 1
    H = np.eye(3)
    assert gs.snr_db(gs.ObservationModel(H, np.eye(3), 1.0)) == pytest.approx(0.0, abs=1e-12)
    m1 = gs.ObservationModel.toeplitz(jac30, 0.3, 10.0)
    m2 = gs.ObservationModel(jac30, m1.sigma_xx, 2 * m1.sigma_sq)
    assert gs.snr_db(m1) - gs.snr_db(m2) == pytest.approx(10 * np.log10(2), abs=1e-9)


@pytest.mark.parametrize("target, expected", [(0.0, 1.0), (10.0, 0.1), (20.0, 0.01)])
def test_noise_variance_for_snr(target, expected):
    assert gs.noise_variance_for_snr(np.eye(4), np.eye(4), target) == pytest.approx(expected, rel=1e-12)


def test_noise_variance_degenerate_signal():
    with pytest.raises(ParameterError, match="degenerate signal"):
        gs.noise_variance_for_snr(np.zeros((3, 2)), np.eye(2), 10.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), m=st.integers(1, 8), n=st.integers(1, 6),
       snr=st.floats(-20, 40))
def test_snr_round_trip(seed, m, n, snr):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((m, n))
    sxx = random_pd(rng, n)
    model = gs.ObservationModel(H, sxx, gs.noise_variance_for_snr(H, sxx, snr))
    assert abs(gs.snr_db(model) - snr) < 1e-9


def test_observation_model_rejects_bad_noise():
    with pytest.raises(ParameterError):
        gs.ObservationModel(np.eye(2), np.eye(2), 0.0)
    with pytest.raises(ShapeError):
        gs.ObservationModel(np.eye(2), np.eye(3), 1.0)


def test_check_covariance():
    with pytest.raises(ParameterError, match="symmetric"):
        check_covariance([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ParameterError, match="positive semi-definite"):
        check_covariance([[1.0, 0.0], [0.0, -1.0]])
    # round-off sized negative eigenvalue is accepted
    a = np.diag([1.0, -1e-12])
    assert check_covariance(a) is not None


def test_sample_gaussian_zero_covariance():
    s = gs.sample_gaussian(np.zeros((3, 3)), 50, seed=1)
    assert s.samples.shape == (50, 3)
    assert np.all(s.samples == 0.0)


def test_sample_gaussian_deterministic():
    cov = gs.toeplitz_covariance(4, 0.7)
    a = gs.sample_gaussian(cov, 100, seed=2**64 - 1)
    b = gs.sample_gaussian(cov, 100, seed=2**64 - 1)
    assert a.samples.tobytes() == b.samples.tobytes()
    c = gs.sample_gaussian(cov, 100, seed=3)
    assert not np.array_equal(a.samples, c.samples)


def test_sample_gaussian_fill_order():
    # row i, column j uses the (i*n + j)-th standard normal of the stream
    z = make_rng(5).standard_normal(12).reshape(4, 3)
    np.testing.assert_allclose(gs.sample_gaussian(np.eye(3), 4, 5).samples, z, atol=1e-15)


def test_sample_gaussian_prefix_property():
    cov = gs.toeplitz_covariance(3, 0.4)
    small = gs.sample_gaussian(cov, 10, 9).samples
    large = gs.sample_gaussian(cov, 40, 9).samples
    np.testing.assert_array_equal(small, large[:10])


def test_sample_gaussian_law_of_large_numbers():
    s = gs.sample_gaussian(np.eye(2), 10000, seed=123)
    np.testing.assert_allclose(gs.sample_covariance(s), np.eye(2), atol=0.1)


def test_sample_gaussian_singular_covariance():
    v = np.array([[1.0], [2.0], [-1.0]])
    s = gs.sample_gaussian(v @ v.T, 2000, seed=4).samples
    # all draws lie on the span of v
    resid = s - np.outer(s @ v[:, 0] / 6.0, v[:, 0])
    assert np.abs(resid).max() < 1e-10


def test_sample_covariance_examples():
    np.testing.assert_array_equal(gs.sample_covariance(np.array([[1.0], [-1.0]])), [[2.0]])
    np.testing.assert_array_equal(gs.sample_covariance(np.zeros((5, 3))), np.zeros((3, 3)))
    with pytest.raises(ParameterError, match="insufficient samples"):
        gs.sample_covariance(np.ones((1, 3)))


def test_sample_covariance_has_no_mean_removal():
    x = np.array([[1.0], [1.0], [1.0]])
    np.testing.assert_array_equal(gs.sample_covariance(x), [[1.5]])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), k=st.integers(2, 30), n=st.integers(1, 8))
def test_sample_covariance_psd(seed, k, n):
    x = np.random.default_rng(seed).standard_normal((k, n)) * 10
    s = gs.sample_covariance(x)
    assert np.allclose(s, s.T)
    assert np.linalg.eigvalsh(s)[0] >= -1e-9 * max(1.0, np.abs(s).max())


def test_sample_covariance_positive_definite_at_k_equals_n():
    n = 29
    cov = gs.toeplitz_covariance(n, 0.5)
    hits = sum(
        np.linalg.eigvalsh(gs.sample_covariance(gs.sample_gaussian(cov, n, derive_seed(7, t))))[0] > 0
        for t in range(100)
    )
    assert hits == 100


def test_covariance_sqrt_squares_back():
    cov = gs.toeplitz_covariance(5, 0.9)
    r = covariance_sqrt(cov)
    np.testing.assert_allclose(r @ r, cov, atol=1e-12)


def test_derive_seed_wraps():
    assert derive_seed(2**64 - 1, 1) == 0

import math

import numpy as np
import pytest

from darkport.fitting import (
    FitInputError,
    InvalidFitError,
    NormalizedFringe,
    _jacobian,
    _model,
    fit_sinusoid,
    normalize,
    propagate,
    visibility_from_fit,
)
from darkport.interferometer import SagnacModel
from darkport.photonsim import ScanConfig, simulate_interferogram


class FakeInterferogram:
    def __init__(self, phase, d1, d2):
        self.phase_rad = np.asarray(phase, dtype=float)
        self.counts_d1 = np.asarray(d1, dtype=float)
        self.counts_d2 = np.asarray(d2, dtype=float)


def make_fringe(params, n=100, sigma=1e-3, x_max=4.0 * math.pi):
    x = np.linspace(0.0, x_max, n)
    y = _model(x, np.asarray(params, dtype=float))
    return x, y, NormalizedFringe(phase=x, ratio=y,
                                  sigma=np.full(n, sigma), detector=1)


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(31)
    x = np.linspace(0.0, 4.0 * math.pi, 25)
    h = 1e-6
    for _ in range(20):
        params = np.array([rng.uniform(0.05, 0.5), rng.uniform(0.5, 2.0),
                           rng.uniform(0.0, math.pi), rng.uniform(0.1, 0.6)])
        jac = _jacobian(x, params)
        for k in range(4):
            dp = np.zeros(4)
            dp[k] = h
            num = (_model(x, params + dp) - _model(x, params - dp)) / (2.0 * h)
            assert np.allclose(jac[:, k], num, rtol=1e-6, atol=1e-8)


def test_noiseless_round_trip():
    truth = (0.076, 1.0, 0.3, 0.462)
    _, _, fringe = make_fringe(truth)
    fit = fit_sinusoid(fringe)
    assert fit.converged
    assert abs(fit.amplitude - truth[0]) < 1e-6 * truth[0]
    assert abs(fit.frequency - truth[1]) < 1e-6
    assert abs(fit.phase - truth[2]) < 1e-6
    assert abs(fit.offset - truth[3]) < 1e-6 * truth[3]
    assert not fit.low_signal


def test_phase_conventions_are_equivalent():
    # sin^2 is pi-periodic in p and even under (f, p) -> (-f, -p); both
    # parameterizations must fit to the same canonical representative
    base = (0.2, 1.3, 0.7, 0.3)
    _, _, fringe1 = make_fringe(base)
    _, _, fringe2 = make_fringe((0.2, 1.3, 0.7 + math.pi, 0.3))
    fit1 = fit_sinusoid(fringe1)
    fit2 = fit_sinusoid(fringe2)
    assert abs(fit1.phase - fit2.phase) < 1e-6
    assert 0.0 <= fit1.phase < math.pi
    assert abs(fit1.visibility.value - fit2.visibility.value) < 1e-9


def test_fit_visibility_equals_contrast():
    # V = A/(A+2B) is (max-min)/(max+min) of the model curve
    truth = (0.11, 0.9, 0.25, 0.37)
    x, y, fringe = make_fringe(truth, n=400, x_max=8.0 * math.pi)
    fit = fit_sinusoid(fringe)
    contrast = (y.max() - y.min()) / (y.max() + y.min())
    assert abs(fit.visibility.value - contrast) < 1e-6


def test_fit_on_poisson_data_is_unbiased_enough():
    scan = ScanConfig(rng_seed=57)
    model = SagnacModel(visibility_v=0.9992774)
    truth = 0.03800891802248566  # sqrt(1 - v^2)
    pulls = []
    for k in range(60):
        ig = simulate_interferogram(model, scan, seed=(57, k))
        fit = fit_sinusoid(normalize(ig))
        assert fit.converged
        v = fit.visibility
        pulls.append((v.value - truth) / v.sigma)
    pulls = np.asarray(pulls)
    assert abs(np.mean(pulls)) < 0.5
    assert 0.6 < np.std(pulls) < 1.4


def test_covariance_is_symmetric_positive():
    _, _, fringe = make_fringe((0.076, 1.0, 0.3, 0.462), sigma=2e-3)
    fit = fit_sinusoid(fringe)
    cov = fit.covariance
    assert cov.shape == (4, 4)
    assert np.allclose(cov, cov.T, rtol=1e-10)
    eigvals = np.linalg.eigvalsh(cov)
    assert eigvals.min() >= -1e-18


def test_flat_data_converges_low_signal():
    n = 50
    fringe = NormalizedFringe(phase=np.linspace(0, 4 * math.pi, n),
                              ratio=np.full(n, 0.5),
                              sigma=np.full(n, 1e-3), detector=1)
    fit = fit_sinusoid(fringe)
    assert fit.converged
    assert fit.low_signal
    assert abs(fit.amplitude) < 1e-6
    assert abs(fit.offset - 0.5) < 1e-9


def test_normalize_basic():
    phase = np.linspace(0.0, 4.0 * math.pi, 12)
    ig = FakeInterferogram(phase, np.full(12, 30.0), np.full(12, 30.0))
    fringe = normalize(ig)
    assert np.allclose(fringe.ratio, 0.5)
    assert np.allclose(fringe.sigma, np.sqrt(0.25 / 60.0))
    assert fringe.n_excluded == 0
    assert fringe.n_points == 12
    assert fringe.detector == 1


def test_normalize_detector_two_is_complementary():
    phase = np.linspace(0.0, 4.0 * math.pi, 10)
    d1 = np.arange(10.0) + 5.0
    d2 = np.full(10, 20.0)
    f1 = normalize(FakeInterferogram(phase, d1, d2), detector=1)
    f2 = normalize(FakeInterferogram(phase, d1, d2), detector=2)
    assert np.allclose(f1.ratio + f2.ratio, 1.0)
    assert f2.detector == 2
    with pytest.raises(ValueError):
        normalize(FakeInterferogram(phase, d1, d2), detector=3)


def test_normalize_floors_sigma_at_saturated_points():
    phase = np.linspace(0.0, 4.0 * math.pi, 10)
    d1 = np.full(10, 40.0)
    d2 = np.zeros(10)
    fringe = normalize(FakeInterferogram(phase, d1, d2))
    assert np.allclose(fringe.ratio, 1.0)
    assert np.allclose(fringe.sigma, 1.0 / 42.0)


def test_normalize_excludes_zero_total_steps():
    phase = np.linspace(0.0, 4.0 * math.pi, 12)
    d1 = np.full(12, 25.0)
    d2 = np.full(12, 25.0)
    d1[[2, 7]] = 0.0
    d2[[2, 7]] = 0.0
    fringe = normalize(FakeInterferogram(phase, d1, d2))
    assert fringe.n_points == 10
    assert fringe.n_excluded == 2
    assert not np.isin(phase[[2, 7]], fringe.phase).any()


def test_normalize_rejects_too_few_points():
    phase = np.linspace(0.0, 4.0 * math.pi, 12)
    d1 = np.zeros(12)
    d2 = np.zeros(12)
    d1[:7] = 10.0
    with pytest.raises(FitInputError):
        normalize(FakeInterferogram(phase, d1, d2))


def test_normalized_fringe_validation():
    x = np.linspace(0, 7, 10)
    with pytest.raises(ValueError):
        NormalizedFringe(phase=x, ratio=np.full(10, 1.5), sigma=np.full(10, 0.1))
    with pytest.raises(ValueError):
        NormalizedFringe(phase=x, ratio=np.full(10, 0.5), sigma=np.zeros(10))
    with pytest.raises(ValueError):
        NormalizedFringe(phase=x, ratio=np.full(9, 0.5), sigma=np.full(10, 0.1))


def test_visibility_from_fit_examples():
    _, _, fringe = make_fringe((0.076, 1.0, 0.3, 0.462))
    fit = fit_sinusoid(fringe)
    v = visibility_from_fit(fit)
    assert math.isclose(v.value, 0.076 / (0.076 + 2 * 0.462), rel_tol=1e-6)
    assert v.sigma > 0.0
    assert v == fit.visibility


def test_visibility_extremes():
    _, _, dark = make_fringe((0.5, 1.0, 0.3, 0.0))
    fit = fit_sinusoid(dark)
    assert math.isclose(fit.visibility.value, 1.0, rel_tol=1e-6)
    _, _, flat = make_fringe((0.0, 1.0, 0.3, 0.5))
    fit = fit_sinusoid(flat)
    assert fit.visibility.value < 1e-6


def test_visibility_rejects_zero_denominator():
    _, _, fringe = make_fringe((0.076, 1.0, 0.3, 0.462))
    fit = fit_sinusoid(fringe)
    from dataclasses import replace
    broken = replace(fit, amplitude=0.0, offset=0.0)
    with pytest.raises(InvalidFitError):
        visibility_from_fit(broken)


def test_propagate_examples():
    assert propagate(np.array([1.0]), np.array([[1.0]])) == 1.0
    assert propagate(np.zeros(3), np.eye(3)) == 0.0
    got = propagate(np.array([1.0, 2.0]), np.diag([0.04, 0.09]))
    assert math.isclose(got, math.sqrt(0.04 + 4 * 0.09), rel_tol=1e-12)
    with pytest.raises(ValueError):
        propagate(np.array([1.0, 2.0]), np.eye(3))
    with pytest.warns(UserWarning):
        assert propagate(np.array([1.0]), np.array([[-1e-12]])) == 0.0


def test_fit_sigma_tracks_residual_scatter():
    # the covariance is scaled by reduced chi^2, so doubling the actual
    # noise (same realization, same declared sigma) doubles sigma_A up to
    # the nonlinearity of the model
    rng = np.random.default_rng(33)
    x = np.linspace(0.0, 4.0 * math.pi, 100)
    y = _model(x, np.array([0.076, 1.0, 0.3, 0.462]))
    e = rng.normal(scale=1e-3, size=x.size)
    s = np.full(x.size, 1e-3)
    f1 = NormalizedFringe(phase=x, ratio=y + e, sigma=s, detector=1)
    f2 = NormalizedFringe(phase=x, ratio=y + 2.0 * e, sigma=s, detector=1)
    s1 = fit_sinusoid(f1).sigma_amplitude
    s2 = fit_sinusoid(f2).sigma_amplitude
    assert math.isclose(s2 / s1, 2.0, rel_tol=0.05)


def test_fit_result_model_reproduces_curve():
    truth = (0.076, 1.0, 0.3, 0.462)
    x, y, fringe = make_fringe(truth)
    fit = fit_sinusoid(fringe)
    assert np.allclose(fit.model(x), y, atol=1e-7)
    assert fit.residual_norm < 1e-6
    assert fit.n_points == len(x)

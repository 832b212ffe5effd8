"""Fringe normalization and sinusoid fitting.

The model is A sin^2(f x + p) + B fitted by weighted Levenberg-Marquardt
(damped Gauss-Newton with Marquardt diagonal scaling).  Weights come from
the binomial error of the normalized count ratio, and the covariance is
rescaled by the reduced chi-square so the reported sigmas stay honest when
the noise model is off.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .interferometer import VisibilityValue

__all__ = [
    "FitInputError",
    "InvalidFitError",
    "NormalizedFringe",
    "FitResult",
    "normalize",
    "fit_sinusoid",
    "visibility_from_fit",
    "propagate",
]

MAX_ITERATIONS = 200
RELATIVE_TOL = 1e-10
DAMPING_INIT = 1e-3
DAMPING_STEP = 10.0
DAMPING_MAX = 1e12


class FitInputError(ValueError):
    """Data unusable for fitting (too few points with counts)."""


class InvalidFitError(ValueError):
    """A fit result that cannot yield a visibility (A + 2B <= 0)."""


@dataclass(frozen=True)
class NormalizedFringe:
    """Count ratio d/(d1+d2) versus phase, with binomial sigmas.

    Zero-total points carry no information and are dropped before this
    object is built; n_excluded records how many.
    """

    phase: np.ndarray
    ratio: np.ndarray
    sigma: np.ndarray
    detector: int = 1
    n_excluded: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", np.asarray(self.phase, dtype=float))
        object.__setattr__(self, "ratio", np.asarray(self.ratio, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        n = self.phase.shape[0]
        if self.ratio.shape != (n,) or self.sigma.shape != (n,):
            raise ValueError("phase, ratio, and sigma must have identical length")
        if np.any(self.ratio < 0.0) or np.any(self.ratio > 1.0):
            raise ValueError("ratios must lie in [0, 1]")
        if np.any(self.sigma <= 0.0):
            raise ValueError("sigmas must be positive")

    @property
    def n_points(self) -> int:
        return self.phase.shape[0]


@dataclass(frozen=True)
class FitResult:
    """Fitted A sin^2(f x + p) + B with covariance in (A, f, p, B) order.

    A >= 0, f >= 0, and p in [0, pi) by convention (the sign and phase
    degeneracies of sin^2 are folded away); low_signal marks amplitudes
    within 2 sigma of zero.
    """

    amplitude: float
    frequency: float
    phase: float
    offset: float
    covariance: np.ndarray
    visibility: VisibilityValue
    converged: bool
    iterations: int
    residual_norm: float
    n_points: int
    low_signal: bool

    @property
    def sigma_amplitude(self) -> float:
        return math.sqrt(max(self.covariance[0, 0], 0.0))

    @property
    def sigma_frequency(self) -> float:
        return math.sqrt(max(self.covariance[1, 1], 0.0))

    @property
    def sigma_phase(self) -> float:
        return math.sqrt(max(self.covariance[2, 2], 0.0))

    @property
    def sigma_offset(self) -> float:
        return math.sqrt(max(self.covariance[3, 3], 0.0))

    def model(self, x: np.ndarray) -> np.ndarray:
        s = np.sin(self.frequency * np.asarray(x, dtype=float) + self.phase)
        return self.amplitude * s * s + self.offset


def normalize(ig, detector: int = 1) -> NormalizedFringe:
    """Normalize one detector's counts to the per-step total.

    The binomial sigma sqrt(r (1-r) / n) is floored at 1/(n+2) so points
    that happen to land at ratio 0 or 1 keep a finite weight.
    """
    if detector not in (1, 2):
        raise ValueError(f"detector must be 1 or 2, got {detector!r}")
    d1 = np.asarray(ig.counts_d1, dtype=float)
    d2 = np.asarray(ig.counts_d2, dtype=float)
    phase = np.asarray(ig.phase_rad, dtype=float)
    total = d1 + d2
    keep = total > 0
    n_usable = int(np.count_nonzero(keep))
    if n_usable < 8:
        raise FitInputError(
            f"need at least 8 points with nonzero total counts, got {n_usable}")
    n = total[keep]
    num = d1[keep] if detector == 1 else d2[keep]
    r = num / n
    sigma = np.maximum(np.sqrt(r * (1.0 - r) / n), 1.0 / (n + 2.0))
    return NormalizedFringe(phase=phase[keep], ratio=r, sigma=sigma,
                            detector=detector, n_excluded=int(len(total) - n_usable))


def _model(x: np.ndarray, params: np.ndarray) -> np.ndarray:
    a, f, p, b = params
    s = np.sin(f * x + p)
    return a * s * s + b


def _jacobian(x: np.ndarray, params: np.ndarray) -> np.ndarray:
    a, f, p, b = params
    arg = f * x + p
    s = np.sin(arg)
    s2 = np.sin(2.0 * arg)
    return np.column_stack([s * s, a * x * s2, a * s2, np.ones_like(x)])


def _chi2(x: np.ndarray, y: np.ndarray, w: np.ndarray, params: np.ndarray) -> float:
    r = y - _model(x, params)
    return float(np.sum(w * r * r))


def _init_params(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    b0 = float(np.min(y))
    a0 = float(np.max(y) - np.min(y))
    # dominant nonzero spectral peak of the detrended ratio; the fringe
    # oscillates at 2f, so bin k of an n-point grid maps to f = pi k / (n dx)
    n = len(x)
    dx = (x[-1] - x[0]) / (n - 1)
    spectrum = np.abs(np.fft.rfft(y - np.mean(y)))
    k = int(np.argmax(spectrum[1:])) + 1 if len(spectrum) > 1 else 1
    f0 = math.pi * k / (n * dx)
    best = None
    for p0 in np.linspace(0.0, math.pi, 16, endpoint=False):
        trial = np.array([a0, f0, p0, b0])
        c = _chi2(x, y, w, trial)
        if best is None or c < best[0]:
            best = (c, trial)
    return best[1]


def _renormalize(params: np.ndarray, cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold the sign and phase degeneracies of A sin^2(f x + p) + B away.

    Each rewrite is an exact reparameterization, so the covariance is
    transported with the corresponding linear map.
    """
    a, f, p, b = params
    if a < 0.0:
        # -|A| sin^2(t) + B = |A| sin^2(t + pi/2) + (B - |A|)
        t = np.array([[-1.0, 0.0, 0.0, 0.0],
                      [0.0, 1.0, 0.0, 0.0],
                      [0.0, 0.0, 1.0, 0.0],
                      [1.0, 0.0, 0.0, 1.0]])
        a, p, b = -a, p + 0.5 * math.pi, b + params[0]
        cov = t @ cov @ t.T
    if f < 0.0:
        t = np.diag([1.0, -1.0, -1.0, 1.0])
        f, p = -f, -p
        cov = t @ cov @ t.T
    p = math.fmod(p, math.pi)
    if p < 0.0:
        p += math.pi
    return np.array([a, f, p, b]), cov


def fit_sinusoid(fringe: NormalizedFringe) -> FitResult:
    """Weighted Levenberg-Marquardt fit of the fringe.

    Starts from B = min, A = max - min, f from the discrete spectrum, and a
    phase grid over [0, pi); stops when an accepted step reduces the
    weighted squared residual by less than 1e-10 relative, or after 200
    iterations (then converged=False; no exception).
    """
    x, y = fringe.phase, fringe.ratio
    w = 1.0 / (fringe.sigma * fringe.sigma)
    if fringe.n_points < 8:
        raise FitInputError(f"need at least 8 points, got {fringe.n_points}")

    params = _init_params(x, y, w)
    chi2 = _chi2(x, y, w, params)
    damping = DAMPING_INIT
    converged = False
    iterations = 0
    for _ in range(MAX_ITERATIONS):
        iterations += 1
        resid = y - _model(x, params)
        jac = _jacobian(x, params)
        jw = jac * w[:, None]
        hess = jw.T @ jac
        grad = jw.T @ resid
        # Marquardt scaling; zero-curvature directions (flat data makes the
        # f and p columns vanish at A = 0) get unit damping so the solve
        # stays regular and those components simply do not move
        scale = np.diag(hess).copy()
        scale[scale <= 0.0] = 1.0
        try:
            step = np.linalg.solve(hess + damping * np.diag(scale), grad)
        except np.linalg.LinAlgError:
            damping *= DAMPING_STEP
            if damping > DAMPING_MAX:
                break
            continue
        trial = params + step
        chi2_trial = _chi2(x, y, w, trial)
        if chi2_trial <= chi2:
            reduction = chi2 - chi2_trial
            params, chi2 = trial, chi2_trial
            damping = max(damping / DAMPING_STEP, 1e-15)
            if reduction <= RELATIVE_TOL * max(chi2, 1e-300):
                converged = True
                break
        else:
            damping *= DAMPING_STEP
            if damping > DAMPING_MAX:
                break

    jac = _jacobian(x, params)
    jw = jac * w[:, None]
    hess = jw.T @ jac
    dof = fringe.n_points - 4
    chi2_red = chi2 / dof if dof > 0 else 1.0
    try:
        cov = np.linalg.inv(hess) * chi2_red
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(hess) * chi2_red

    params, cov = _renormalize(params, cov)
    a, f, p, b = (float(q) for q in params)
    sigma_a = math.sqrt(max(cov[0, 0], 0.0))
    visibility = _visibility(a, b, cov)
    return FitResult(amplitude=a, frequency=f, phase=p, offset=b,
                     covariance=cov, visibility=visibility, converged=converged,
                     iterations=iterations, residual_norm=math.sqrt(chi2),
                     n_points=fringe.n_points, low_signal=a <= 2.0 * sigma_a)


def _visibility(a: float, b: float, cov: np.ndarray) -> VisibilityValue:
    denom = a + 2.0 * b
    if denom <= 0.0:
        raise InvalidFitError(f"A + 2B must be positive, got {denom!r}")
    value = a / denom
    grad = np.array([2.0 * b / (denom * denom), -2.0 * a / (denom * denom)])
    cov_ab = np.array([[cov[0, 0], cov[0, 3]], [cov[3, 0], cov[3, 3]]])
    sigma = propagate(grad, cov_ab)
    # fit noise can push B a hair negative on bright data; the fringe
    # contrast itself is still bounded
    return VisibilityValue(value=min(max(value, 0.0), 1.0), sigma=sigma)


def visibility_from_fit(fit: FitResult) -> VisibilityValue:
    """Visibility A/(A+2B) with the sigma propagated from the (A, B) block."""
    return _visibility(fit.amplitude, fit.offset, fit.covariance)


def propagate(gradient: np.ndarray, covariance: np.ndarray) -> float:
    """First-order uncertainty sqrt(g^T C g).

    Tiny negative quadratic forms (numerical) are clamped to zero with a
    warning rather than raised.
    """
    g = np.asarray(gradient, dtype=float)
    c = np.asarray(covariance, dtype=float)
    if c.shape != (g.shape[0], g.shape[0]):
        raise ValueError(f"gradient of length {g.shape[0]} needs a matching square "
                         f"covariance, got shape {c.shape}")
    q = float(g @ c @ g)
    if q < 0.0:
        warnings.warn(f"clamping negative quadratic form {q!r} to zero", stacklevel=2)
        q = 0.0
    return math.sqrt(q)

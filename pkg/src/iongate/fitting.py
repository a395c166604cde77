"""Curve fitting for the scan experiments.

Two models are needed: the duration scan follows a sum of two cosines at
twice the carrier rates under a common exponential envelope,

    P(t) = c + exp(-t / tau) * (a cos(2 w1 t) + b cos(2 w2 t)),   w1 > w2,

fitted by weighted nonlinear least squares with the two frequencies seeded
from the discrete Fourier transform of the mean-subtracted data; the phase
scan follows a plain sinusoid

    P(phi) = c + (C / 2) cos(phi - phi0),

which is linear in (c, A, B) after the harmonic substitution and is solved
in closed form.  Parameter uncertainties come from the residual-scaled
curvature at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, FitError

_MIN_DOUBLE_SINE_POINTS = 30
_MIN_FRINGE_POINTS = 8
_MIN_BEATS = 3.0
_SECOND_PEAK_FLOOR = 0.05


@dataclass
class FitResult:
    """Named parameter estimates with one-sigma uncertainties."""

    params: dict[str, tuple[float, float]]
    rss: float
    converged: bool
    extras: dict = field(default_factory=dict)

    def value(self, name: str) -> float:
        return self.params[name][0]

    def sigma(self, name: str) -> float:
        return self.params[name][1]


def _weights(sigma: np.ndarray | None, n: int) -> np.ndarray:
    if sigma is None:
        return np.ones(n)
    sigma = np.asarray(sigma, dtype=float)
    if np.all(sigma == 0.0):
        return np.ones(n)
    if np.any(sigma <= 0.0):
        raise DomainError("per-point uncertainties must all be positive (or all zero)")
    return 1.0 / sigma


def fit_fringe(curve) -> FitResult:
    """Closed-form sinusoid fit; reports offset, contrast in [0, 1], and phase."""
    phi = np.asarray(curve.x, dtype=float)
    y = np.asarray(curve.p_down, dtype=float)
    if phi.size < _MIN_FRINGE_POINTS:
        raise DomainError(f"fringe fit needs at least {_MIN_FRINGE_POINTS} points")
    w = _weights(curve.sigma, phi.size)
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    beta, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
    resid = (y - design @ beta) * w
    rss = float(resid @ resid)
    dof = max(phi.size - 3, 1)
    cov = np.linalg.inv((design * w[:, None]).T @ (design * w[:, None])) * (rss / dof)
    offset, a_cos, a_sin = beta
    amp = math.hypot(a_cos, a_sin)
    contrast = min(2.0 * amp, 1.0)
    phase = math.atan2(a_sin, a_cos)
    sig = np.sqrt(np.diag(cov))
    if amp > 1e-300:
        grad_c = np.array([0.0, 2.0 * a_cos / amp, 2.0 * a_sin / amp])
        sigma_contrast = float(np.sqrt(grad_c @ cov @ grad_c))
        grad_p = np.array([0.0, -a_sin / amp**2, a_cos / amp**2])
        sigma_phase = float(np.sqrt(grad_p @ cov @ grad_p))
    else:
        sigma_contrast = float(2.0 * max(sig[1], sig[2]))
        sigma_phase = math.pi
    params = {
        "offset": (float(offset), float(sig[0])),
        "contrast": (float(contrast), sigma_contrast),
        "phase": (float(phase), sigma_phase),
    }
    return FitResult(params, rss, True)


def _double_sine(t, c, a, b, tau, w1, w2):
    env = np.exp(-t / tau)
    return c + env * (a * np.cos(2.0 * w1 * t) + b * np.cos(2.0 * w2 * t))


def _dft_peak_frequencies(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Two dominant angular rates from the padded DFT of the detrended data."""
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-6 * dt[0]:
        raise DomainError("DFT initialization requires uniformly spaced scan times")
    n_pad = 8 * t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), n=n_pad))
    freqs = np.fft.rfftfreq(n_pad, dt[0])
    spec[0] = 0.0
    k1 = int(np.argmax(spec))
    # blank out the main lobe of the first peak before looking for the second
    lobe = max(2, int(round(2 * n_pad / t.size)))
    masked = spec.copy()
    masked[max(0, k1 - lobe) : k1 + lobe + 1] = 0.0
    k2 = int(np.argmax(masked))
    if masked[k2] < _SECOND_PEAK_FLOOR * spec[k1]:
        raise FitError(
            "second frequency component indistinct; the data look single-frequency"
        )

    def refine(k: int, mags: np.ndarray) -> float:
        if 0 < k < mags.size - 1:
            denom = mags[k - 1] - 2 * mags[k] + mags[k + 1]
            if denom != 0:
                return k + 0.5 * (mags[k - 1] - mags[k + 1]) / denom
        return float(k)

    f1 = refine(k1, spec) * (freqs[1] - freqs[0])
    f2 = refine(k2, masked) * (freqs[1] - freqs[0])
    # model frequency convention: cos(2 w t) oscillates at w / pi cycles per second
    w_hi, w_lo = sorted((math.pi * f1, math.pi * f2), reverse=True)
    return w_hi, w_lo


def fit_double_sine_decay(curve) -> FitResult:
    """Weighted NLS fit of the two-frequency decaying-oscillation model.

    Raises FitError when the data have no resolvable second frequency, span
    fewer than two beat periods, or the optimizer fails to converge.
    """
    t = np.asarray(curve.x, dtype=float)
    y = np.asarray(curve.p_down, dtype=float)
    if t.size < _MIN_DOUBLE_SINE_POINTS:
        raise DomainError(
            f"double-sine fit needs at least {_MIN_DOUBLE_SINE_POINTS} points, got {t.size}"
        )
    w = _weights(curve.sigma, t.size)
    span = float(t[-1] - t[0])
    w1_0, w2_0 = _dft_peak_frequencies(t, y)
    beats = span * (w1_0 - w2_0) / math.pi
    if beats < _MIN_BEATS:
        raise FitError(
            f"scan spans only {beats:.2f} beat periods; at least {_MIN_BEATS} are needed"
        )

    def linear_amplitudes(tau: float) -> tuple[np.ndarray, float]:
        design = np.column_stack(
            [
                np.ones_like(t),
                np.exp(-t / tau) * np.cos(2.0 * w1_0 * t),
                np.exp(-t / tau) * np.cos(2.0 * w2_0 * t),
            ]
        )
        beta, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
        r = (y - design @ beta) * w
        return beta, float(r @ r)

    best_tau, best_beta, best_rss = None, None, np.inf
    for tau_try in (span / 8, span / 4, span / 2, span, 2 * span, 8 * span):
        beta, rss = linear_amplitudes(tau_try)
        if rss < best_rss:
            best_tau, best_beta, best_rss = tau_try, beta, rss

    x0 = np.array([best_beta[0], best_beta[1], best_beta[2], best_tau, w1_0, w2_0])
    nyquist = math.pi / float(np.min(np.diff(t)))
    lower = [-1.0, -2.0, -2.0, span / 100.0, 0.0, 0.0]
    upper = [2.0, 2.0, 2.0, 1e4 * span, nyquist, nyquist]
    x0 = np.clip(x0, lower, upper)

    def residual(theta):
        return (_double_sine(t, *theta) - y) * w

    res = least_squares(
        residual, x0, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15,
        max_nfev=5000,
    )
    if res.status <= 0:
        raise FitError(f"double-sine fit did not converge: {res.message}")
    c, a, b, tau, w1, w2 = res.x
    if w1 < w2:
        w1, w2, a, b = w2, w1, b, a
    if span * (w1 - w2) / math.pi < _MIN_BEATS:
        raise FitError(
            "fitted frequencies are too close for the scan span to separate them"
        )
    dof = max(t.size - 6, 1)
    rss = float(2.0 * res.cost)
    jac = res.jac
    try:
        cov = np.linalg.inv(jac.T @ jac) * (rss / dof)
    except np.linalg.LinAlgError:
        raise FitError("singular curvature at the double-sine optimum") from None
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    # order the covariance rows to the (possibly swapped) parameter order
    order = [0, 1, 2, 3, 4, 5] if res.x[4] >= res.x[5] else [0, 2, 1, 3, 5, 4]
    cov = cov[np.ix_(order, order)]
    sig = sig[order]
    ratio = w1 / w2
    grad = np.zeros(6)
    grad[4] = 1.0 / w2
    grad[5] = -w1 / (w2 * w2)
    sigma_ratio = float(np.sqrt(grad @ cov @ grad))
    params = {
        "offset": (float(c), float(sig[0])),
        "amp_fast": (float(a), float(sig[1])),
        "amp_slow": (float(b), float(sig[2])),
        "tau": (float(tau), float(sig[3])),
        "omega_fast": (float(w1), float(sig[4])),
        "omega_slow": (float(w2), float(sig[5])),
        "ratio": (float(ratio), sigma_ratio),
    }
    return FitResult(params, rss, bool(res.status > 0), extras={"nfev": res.nfev})

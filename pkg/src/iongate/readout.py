"""Fluorescence readout: photon-count histograms and bright-fraction estimation.

Each detection window yields a photon count drawn from Poisson(lambda_bright)
when the ion projects onto the bright spin-down manifold and from
Poisson(lambda_dark) otherwise, so a histogram over repeated shots follows
the two-component mixture

    P(k) = p * Poisson(k; lambda_bright) + (1 - p) * Poisson(k; lambda_dark).

The bright fraction p is recovered by maximum likelihood.  The likelihood is
strictly concave in p, so the score equation has at most one root in (0, 1);
the estimate is found by a bracketed Newton iteration and its uncertainty
from the observed Fisher information, with the estimate clamped to [0, 1] at
the boundaries.  A variant fits against empirical reference histograms
instead of the parametric Poisson components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .errors import DomainError, UnidentifiableError

_P_TOL = 1e-12
_SMOOTHING = 1.0  # add-one smoothing on reference histogram bins


@dataclass(frozen=True)
class DetectorModel:
    """Mean photon numbers per detection window for the two spin states."""

    lambda_bright: float = 30.0
    lambda_dark: float = 2.0
    window: float = 200e-6  # informational; the means already include it

    def __post_init__(self):
        if not self.lambda_bright > self.lambda_dark >= 0.0:
            raise DomainError("detector requires lambda_bright > lambda_dark >= 0")
        if self.window <= 0:
            raise DomainError("detection window must be positive")


class CountHistogram:
    """Frequency table of photon counts; bin index equals the photon number."""

    __slots__ = ("counts",)

    def __init__(self, counts):
        arr = np.asarray(counts)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("histogram counts must form a non-empty 1-D array")
        if np.any(arr < 0) or not np.all(arr == np.floor(arr)):
            raise DomainError("histogram counts must be non-negative integers")
        arr = arr.astype(np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_samples(cls, samples) -> "CountHistogram":
        samples = np.asarray(samples, dtype=np.int64)
        if samples.size == 0:
            raise DomainError("cannot build a histogram from zero samples")
        return cls(np.bincount(samples))

    @classmethod
    def from_pairs(cls, pairs) -> "CountHistogram":
        """Build from (bin, count) records in any order."""
        pairs = list(pairs)
        if not pairs:
            raise DomainError("cannot build a histogram from zero records")
        if any(b < 0 for b, _ in pairs):
            raise DomainError("photon-number bins must be non-negative")
        counts = np.zeros(max(int(b) for b, _ in pairs) + 1, dtype=np.int64)
        for b, c in pairs:
            counts[int(b)] += int(c)
        return cls(counts)

    def to_pairs(self) -> list[tuple[int, int]]:
        """Non-empty (bin, count) records in ascending bin order."""
        return [(int(b), int(c)) for b, c in enumerate(self.counts) if c > 0]

    def to_json_dict(self) -> dict:
        return {"total_shots": self.total, "bins": [list(p) for p in self.to_pairs()]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "CountHistogram":
        hist = cls.from_pairs([(int(b), int(c)) for b, c in d["bins"]])
        if "total_shots" in d and int(d["total_shots"]) != hist.total:
            raise DomainError("histogram bins do not sum to the declared total_shots")
        return hist

    def __eq__(self, other):
        if not isinstance(other, CountHistogram):
            return NotImplemented
        a, b = self.counts, other.counts
        width = max(a.size, b.size)
        return bool(
            np.array_equal(np.pad(a, (0, width - a.size)), np.pad(b, (0, width - b.size)))
        )

    def __repr__(self):
        return f"CountHistogram(total={self.total}, bins={self.counts.size})"


def simulate_histogram(p_down: float, shots: int, det: DetectorModel, seed) -> CountHistogram:
    """Simulate one detection histogram; deterministic for a given seed."""
    if not 0.0 <= p_down <= 1.0:
        raise DomainError(f"p_down must lie in [0, 1], got {p_down}")
    if shots < 1:
        raise DomainError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    bright = rng.random(shots) < p_down
    lam = np.where(bright, det.lambda_bright, det.lambda_dark)
    return CountHistogram.from_samples(rng.poisson(lam))


def _mixture_mle(freqs: np.ndarray, pmf_bright: np.ndarray, pmf_dark: np.ndarray):
    """ML mixture weight and Fisher uncertainty for arbitrary component pmfs."""
    diff = pmf_bright - pmf_dark

    def score(p: float) -> float:
        return float(np.sum(freqs * diff / (pmf_dark + p * diff)))

    if score(0.0) <= 0.0:
        p_hat = 0.0
    elif score(1.0) >= 0.0:
        p_hat = 1.0
    else:
        lo, hi = 0.0, 1.0
        p_hat = 0.5
        for _ in range(200):
            s = score(p_hat)
            if s > 0.0:
                lo = p_hat
            else:
                hi = p_hat
            curv = float(np.sum(freqs * (diff / (pmf_dark + p_hat * diff)) ** 2))
            step = s / curv if curv > 0 else 0.0
            nxt = p_hat + step
            if not lo < nxt < hi:
                nxt = 0.5 * (lo + hi)
            if abs(nxt - p_hat) < _P_TOL:
                p_hat = nxt
                break
            p_hat = nxt
    info = float(np.sum(freqs * (diff / (pmf_dark + p_hat * diff)) ** 2))
    sigma = 1.0 / np.sqrt(info) if info > 0 else np.inf
    return float(p_hat), float(sigma)


def estimate_p_down(hist: CountHistogram, det: DetectorModel) -> tuple[float, float]:
    """ML estimate of the bright fraction under the Poisson mixture model."""
    if det.lambda_bright == det.lambda_dark:
        raise UnidentifiableError("equal bright and dark means leave p unidentifiable")
    bins = np.nonzero(hist.counts)[0]
    freqs = hist.counts[bins].astype(float)
    pmf_b = poisson.pmf(bins, det.lambda_bright)
    pmf_d = poisson.pmf(bins, det.lambda_dark)
    return _mixture_mle(freqs, pmf_b, pmf_d)


def estimate_from_references(
    hist: CountHistogram, ref_bright: CountHistogram, ref_dark: CountHistogram
) -> tuple[float, float]:
    """ML estimate against empirical bright and dark reference histograms.

    Reference bins get add-one smoothing over the common support so the
    likelihood stays finite wherever the data have counts.
    """
    width = max(hist.counts.size, ref_bright.counts.size, ref_dark.counts.size)

    def padded(h: CountHistogram) -> np.ndarray:
        return np.pad(h.counts, (0, width - h.counts.size)).astype(float)

    data = padded(hist)
    raw_b, raw_d = padded(ref_bright), padded(ref_dark)
    observed = data > 0
    if not np.any((raw_b + raw_d)[observed] > 0):
        raise UnidentifiableError(
            "data histogram shares no support with either reference histogram"
        )
    pmf_b = (raw_b + _SMOOTHING) / (ref_bright.total + _SMOOTHING * width)
    pmf_d = (raw_d + _SMOOTHING) / (ref_dark.total + _SMOOTHING * width)
    bins = np.nonzero(data)[0]
    return _mixture_mle(data[bins], pmf_b[bins], pmf_d[bins])


def expected_sigma(p: float, shots: int, det: DetectorModel) -> float:
    """Predicted ML uncertainty at a true bright fraction, from Fisher information."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    top = int(np.ceil(det.lambda_bright + 10.0 * np.sqrt(det.lambda_bright) + 20.0))
    ks = np.arange(top + 1)
    pmf_b = poisson.pmf(ks, det.lambda_bright)
    pmf_d = poisson.pmf(ks, det.lambda_dark)
    diff = pmf_b - pmf_d
    mix = pmf_d + p * diff
    good = mix > 0
    info = shots * float(np.sum(diff[good] ** 2 / mix[good]))
    return 1.0 / np.sqrt(info)

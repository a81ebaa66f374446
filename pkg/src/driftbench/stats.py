"""Two-sample statistics on single-feature value vectors.

Everything here is a pure function of its inputs. Samples may be any
sequence of finite reals; they are copied into float64 arrays and never
mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# Degenerate-scale cut-off for the normalized Wasserstein distance.
MIN_SCALE = 1e-12

# far below double rounding of p, so dropping the next term never shows
_KS_TERM_EPS = 1e-18
_KS_MAX_TERMS = 100


@dataclass(frozen=True)
class TestOutcome:
    """Result of one per-feature two-sample test.

    Attributes:
        statistic: KS distance D in [0, 1], or the (normalized) Wasserstein distance.
        p_value: Asymptotic p-value; only set for the KS test.
        drifted: Whether the test rejected at the caller's threshold.
        degenerate_scale: The reference sample had (near) zero spread, so the
            Wasserstein statistic was left unnormalized.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    statistic: float
    p_value: Optional[float]
    drifted: bool
    degenerate_scale: bool = False

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "drifted": self.drifted,
            "degenerate_scale": self.degenerate_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestOutcome":
        return cls(d["statistic"], d["p_value"], d["drifted"], d.get("degenerate_scale", False))


def as_sample(values: Sequence[float], name: str = "sample") -> np.ndarray:
    """Validate a sample and return it as a 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"empty sample ({name})")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite value in {name}")
    return arr


def ecdf_eval(sample: Sequence[float], x: float) -> float:
    """Fraction of ``sample`` values that are <= ``x``."""
    arr = np.sort(as_sample(sample))
    return int(np.searchsorted(arr, x, side="right")) / arr.size


def _ecdf_pair(a: np.ndarray, b: np.ndarray):
    """Both ECDFs evaluated at every point of the merged sorted sample.

    ``side="right"`` counts every tied value before evaluating, so the step
    at a repeated value is taken in one go.
    """
    a = np.sort(a)
    b = np.sort(b)
    merged = np.sort(np.concatenate([a, b]))
    cdf_a = np.searchsorted(a, merged, side="right") / a.size
    cdf_b = np.searchsorted(b, merged, side="right") / b.size
    return merged, cdf_a, cdf_b


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    a = as_sample(a, "a")
    b = as_sample(b, "b")
    _, cdf_a, cdf_b = _ecdf_pair(a, b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_p_value(d: float, n1: int, n2: int) -> float:
    """Asymptotic two-sided p-value of the two-sample KS distance ``d``.

    Sums the Kolmogorov series 2 * sum_k (-1)^(k-1) exp(-2 k^2 lambda^2)
    with lambda = d * sqrt(n1 n2 / (n1 + n2)). No small-sample correction.
    Below lambda = 1 that series needs many terms of size ~1 and loses
    accuracy, so the equivalent form
    1 - sqrt(2 pi) / lambda * sum_k exp(-(2k - 1)^2 pi^2 / (8 lambda^2))
    is used there instead.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("sample sizes must be >= 1")
    lam = d * math.sqrt(n1 * n2 / (n1 + n2))
    if lam < 0.04:
        # the Kolmogorov cdf is below 1e-300 here
        return 1.0
    if lam < 1.0:
        c = -(math.pi ** 2) / (8.0 * lam * lam)
        terms = []
        for k in range(1, _KS_MAX_TERMS + 1):
            term = math.exp(c * (2 * k - 1) ** 2)
            terms.append(term)
            if term < _KS_TERM_EPS:
                break
        cdf = math.sqrt(2.0 * math.pi) / lam * math.fsum(terms)
        return min(1.0, max(0.0, 1.0 - cdf))
    terms = []
    for k in range(1, _KS_MAX_TERMS + 1):
        term = math.exp(-2.0 * k * k * lam * lam)
        terms.append(term if k % 2 == 1 else -term)
        if term < _KS_TERM_EPS:
            break
    return min(1.0, max(0.0, 2.0 * math.fsum(terms)))


def ks_two_sample(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TestOutcome:
    """Two-sample Kolmogorov-Smirnov test; ``drifted`` means p < alpha."""
    a = as_sample(a, "a")
    b = as_sample(b, "b")
    _, cdf_a, cdf_b = _ecdf_pair(a, b)
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    p = ks_p_value(d, a.size, b.size)
    return TestOutcome(statistic=d, p_value=p, drifted=p < alpha)


def wasserstein_1d(a: Sequence[float], b: Sequence[float]) -> float:
    """Wasserstein-1 distance between two empirical distributions.

    Integrates |ECDF_a - ECDF_b| exactly over the gaps of the merged support.
    """
    a = as_sample(a, "a")
    b = as_sample(b, "b")
    merged, cdf_a, cdf_b = _ecdf_pair(a, b)
    widths = np.diff(merged)
    return float(np.sum(np.abs(cdf_a[:-1] - cdf_b[:-1]) * widths))


def normalized_wasserstein(ref: Sequence[float], cur: Sequence[float], tau: float = 0.05) -> TestOutcome:
    """Wasserstein-1 distance scaled by the reference population std.

    If the reference has no spread (std < 1e-12) the raw distance is
    returned and ``degenerate_scale`` is set.
    """
    ref = as_sample(ref, "ref")
    cur = as_sample(cur, "cur")
    w1 = wasserstein_1d(ref, cur)
    scale = float(np.std(ref))
    if scale < MIN_SCALE:
        return TestOutcome(statistic=w1, p_value=None, drifted=w1 > tau, degenerate_scale=True)
    stat = w1 / scale
    return TestOutcome(statistic=stat, p_value=None, drifted=stat > tau)

"""Small statistics layer: power-law fits with bootstrap CIs and censored means."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

CI_LEVEL = 0.95


@dataclass(frozen=True)
class FitReport:
    """Result of a log-log least-squares fit ``y = c * x**exponent``.

    ``ci`` is the percentile bootstrap interval at ``level``, widened if
    needed so that it always contains ``exponent``.
    """

    exponent: float
    prefactor: float
    ci: tuple[float, float]
    residuals: tuple[float, ...]
    n_points: int
    bootstrap_n: int
    level: float = CI_LEVEL
    resampling: str = "points"
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def contains(self, value: float) -> bool:
        return self.ci[0] <= value <= self.ci[1]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        d["residuals"] = list(self.residuals)
        d["warnings"] = list(self.warnings)
        return d


def _loglog_fit(lx: np.ndarray, ly: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def fit_power_law(points: Sequence[tuple[float, float]], bootstrap_n: int = 1000, *,
                  samples: Sequence[Sequence[float]] | None = None,
                  rng: np.random.Generator | int | None = 0,
                  level: float = CI_LEVEL) -> FitReport:
    """Fit ``ln y = a ln x + b`` and bootstrap the exponent ``a``.

    Parameters
    ----------
    points
        ``(x, y)`` pairs, at least three, all strictly positive.
    bootstrap_n
        Number of bootstrap replicates (0 gives a degenerate CI).
    samples
        Optional raw observations per point (e.g. per-trajectory lifetimes).
        When given, ``y`` must be their mean and the bootstrap resamples
        observations within each point; otherwise points are resampled
        with replacement.
    rng
        Seed or generator for the bootstrap.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise ValueError("all x and y must be finite and strictly positive")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if bootstrap_n < 0:
        raise ValueError("bootstrap_n must be non-negative")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise ValueError("x values must not all coincide")
    a, b = _loglog_fit(lx, ly)
    resid = ly - (a * lx + b)
    rng = np.random.default_rng(rng)
    warnings: list[str] = []

    boot = np.empty(bootstrap_n)
    mode = "points"
    if samples is not None:
        mode = "samples"
        if len(samples) != len(pts):
            raise ValueError("samples must have one entry per point")
        arrs = [np.asarray(s, dtype=float) for s in samples]
        if any(len(s) < 2 for s in arrs):
            raise ValueError("each point needs at least 2 samples")
        if any(np.any(s <= 0) for s in arrs):
            raise ValueError("samples must be strictly positive")
        if any(len(s) < 30 for s in arrs):
            warnings.append("fewer than 30 samples at some point; CI unreliable")
        for k in range(bootstrap_n):
            means = [s[rng.integers(0, len(s), len(s))].mean() for s in arrs]
            boot[k] = _loglog_fit(lx, np.log(means))[0]
    else:
        n = len(pts)
        k = 0
        while k < bootstrap_n:
            idx = rng.integers(0, n, n)
            if np.ptp(lx[idx]) == 0:
                continue
            boot[k] = _loglog_fit(lx[idx], ly[idx])[0]
            k += 1
        if n < 5:
            warnings.append("bootstrap over fewer than 5 points; CI is coarse")

    if bootstrap_n:
        alpha = (1 - level) / 2
        lo, hi = np.quantile(boot, [alpha, 1 - alpha])
        lo, hi = min(float(lo), a), max(float(hi), a)
    else:
        lo = hi = a
    return FitReport(a, float(np.exp(b)), (lo, hi), tuple(float(r) for r in resid),
                     len(pts), int(bootstrap_n), level, mode, tuple(warnings))


@dataclass(frozen=True)
class LifetimeSummary:
    """Mean lifetime from possibly censored trajectories.

    ``mean`` and ``stderr`` use uncensored trajectories only.
    ``km_lower`` is the restricted mean (area under the Kaplan–Meier
    curve up to the cap), a lower bound on the true mean; ``km_upper``
    is ``inf`` whenever anything is censored.
    """

    n: int
    n_censored: int
    mean: float
    stderr: float
    km_lower: float
    km_upper: float

    def as_dict(self) -> dict:
        return asdict(self)


def kaplan_meier_mean(times, censored) -> float:
    """Restricted mean survival time (area under the KM estimator)."""
    t = np.asarray(times, dtype=float)
    c = np.asarray(censored, dtype=bool)
    if len(t) == 0:
        raise ValueError("no observations")
    order = np.lexsort((c, t))  # events before censorings at equal times
    t, c = t[order], c[order]
    at_risk = len(t) - np.arange(len(t))
    factors = np.where(c, 1.0, 1.0 - 1.0 / at_risk)
    surv = np.cumprod(factors)
    prev_surv = np.concatenate([[1.0], surv[:-1]])
    prev_t = np.concatenate([[0.0], t[:-1]])
    return float(np.sum(prev_surv * (t - prev_t)))


def summarize_lifetimes(times, censored=None) -> LifetimeSummary:
    t = np.asarray(times, dtype=float)
    c = np.zeros(len(t), bool) if censored is None else np.asarray(censored, dtype=bool)
    if len(t) != len(c):
        raise ValueError("times and censored differ in length")
    if len(t) == 0:
        raise ValueError("no observations")
    done = t[~c]
    mean = float(done.mean()) if len(done) else float("nan")
    se = float(done.std(ddof=1) / np.sqrt(len(done))) if len(done) > 1 else float("nan")
    km = kaplan_meier_mean(t, c)
    upper = km if not c.any() else float("inf")
    return LifetimeSummary(len(t), int(c.sum()), mean, se, km, upper)


def bootstrap_mean_ci(x, bootstrap_n: int = 1000, rng=0, level: float = CI_LEVEL) -> tuple[float, float]:
    """Percentile bootstrap CI of the mean of ``x``."""
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    rng = np.random.default_rng(rng)
    idx = rng.integers(0, len(x), (bootstrap_n, len(x)))
    means = x[idx].mean(axis=1)
    alpha = (1 - level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    return float(lo), float(hi)

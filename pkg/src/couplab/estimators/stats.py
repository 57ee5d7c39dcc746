"""Interval estimates and log-linear decay fits."""

from __future__ import annotations

import numpy as np
from scipy import stats


class FitDegenerateError(ValueError):
    """Too few positive points survive censoring for a log-linear fit."""


def wilson(successes, n, level: float = 0.95):
    """Wilson score interval ``(lo, hi)`` for a binomial proportion; (0, 1) when n = 0."""
    successes = np.asarray(successes, dtype=float)
    n = np.asarray(n, dtype=float)
    z = stats.norm.ppf(0.5 + level / 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = successes / n
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = np.where((n > 0) & (successes > 0), np.clip(centre - half, 0, 1), 0.0)
    hi = np.where((n > 0) & (successes < n), np.clip(centre + half, 0, 1), 1.0)
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def mean_se(x, axis=0):
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    return x.mean(axis=axis), x.std(axis=axis, ddof=1) / np.sqrt(n)


def exp_fit(times, values, weights=None):
    """Fit ``v = c exp(-beta t)`` by weighted least squares on ``log v``.

    Non-positive values are censored.  Returns ``(c, beta, r2)``; the
    standard error of beta is available from :func:`exp_fit_full`.
    """
    c, beta, r2, _ = exp_fit_full(times, values, weights)
    return c, beta, r2


def exp_fit_full(times, values, weights=None):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    w = np.ones_like(t) if weights is None else np.asarray(weights, dtype=float)
    keep = (v > 0) & np.isfinite(v) & (w > 0)
    if keep.sum() < 3:
        raise FitDegenerateError(f"need at least 3 positive values, got {int(keep.sum())}")
    t, y, w = t[keep], np.log(v[keep]), w[keep]
    A = np.stack([np.ones_like(t), -t], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = y - A @ coef
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = np.sum(w * (y - ybar) ** 2)
    ss_res = np.sum(w * resid ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(len(t) - 2, 1)
    cov = np.linalg.pinv((A * w[:, None]).T @ A) * (ss_res / dof)
    return float(np.exp(coef[0])), float(coef[1]), float(r2), float(np.sqrt(max(cov[1, 1], 0.0)))

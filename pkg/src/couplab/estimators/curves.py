"""Decay curves of coupled pairs: total-variation style and bounded-Lipschitz style."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..coupling.engine import SchedulerConfig
from ..coupling.episodes import EpisodeResult, simulate_pair
from ..dynamics.cgl import sobolev_norm
from .stats import FitDegenerateError, exp_fit, wilson

EQ_TOL = 1e-9


@dataclass
class DecayCurve:
    times: np.ndarray
    values: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    c: Optional[float] = None
    beta: Optional[float] = None
    r2: Optional[float] = None
    note: str = ""

    @property
    def half_widths(self):
        return np.maximum(self.hi - self.values, self.values - self.lo)

    def fit(self, t_min: float = 0.0):
        keep = self.times >= t_min
        try:
            self.c, self.beta, self.r2 = exp_fit(self.times[keep], self.values[keep])
        except FitDegenerateError as exc:
            self.note = str(exc)
        return self

    def to_dict(self):
        return {"times": self.times.tolist(), "values": self.values.tolist(),
                "ci": [self.lo.tolist(), self.hi.tolist()],
                "fitted": {"c": self.c, "beta": self.beta, "r2": self.r2}, "note": self.note}

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "value", "ci_lo", "ci_hi"])
        for row in zip(self.times, self.values, self.lo, self.hi):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def tv_curve_from_episodes(res: EpisodeResult, tol: float = EQ_TOL, fit_from: float = 0.0) -> DecayCurve:
    """P(u1(t) != u2(t)) at block ends; this bounds the total variation distance of the laws."""
    apart = res.dist > tol
    n = apart.shape[0]
    s = apart.sum(axis=0)
    lo, hi = wilson(s, np.full_like(s, n))
    return DecayCurve(res.times, s / n, lo, hi).fit(fit_from)


def tv_decay_curve(model, u01, u02, cfg: SchedulerConfig, nsamples: int, seed: int, workers: int = 1,
                   tol: float = EQ_TOL, fit_from: float = 0.0):
    res = simulate_pair(model, u01, u02, cfg, nsamples, seed, workers)
    return tv_curve_from_episodes(res, tol, fit_from), res


@dataclass(frozen=True)
class TestFunctional:
    """A bounded Lipschitz functional with its bounds (|psi|_Lipb = lip + sup)."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lip: float
    sup: float

    __test__ = False  # not a pytest class

    @property
    def lipb(self):
        return self.lip + self.sup


def default_panel(model) -> list:
    """Five bounded Lipschitz functionals of the state (real or spectral)."""
    if np.iscomplexobj(np.zeros(0, model.dtype)):
        n = lambda u: np.sqrt(np.sum(np.abs(u) ** 2, axis=-1))
        return [
            TestFunctional("tanh_norm", lambda u: np.tanh(n(u)), 1.0, 1.0),
            TestFunctional("re_a1", lambda u: np.tanh(u[..., 0].real), 1.0, 1.0),
            TestFunctional("im_a1", lambda u: np.sin(u[..., 0].imag), 1.0, 1.0),
            TestFunctional("abs_a2", lambda u: np.arctan(np.abs(u[..., 1])), 1.0, np.pi / 2),
            TestFunctional("bump", lambda u: 1.0 / (1.0 + n(u) ** 2), 0.65, 1.0),
        ]
    x = lambda u: u[..., 0]
    y = lambda u: u[..., -1]
    return [
        TestFunctional("tanh_x", lambda u: np.tanh(x(u)), 1.0, 1.0),
        TestFunctional("sin_y", lambda u: np.sin(y(u)), 1.0, 1.0),
        TestFunctional("cos_x_plus_y", lambda u: np.cos(x(u) + y(u)), np.sqrt(2.0), 1.0),
        TestFunctional("bump", lambda u: 1.0 / (1.0 + np.sum(u * u, axis=-1)), 0.65, 1.0),
        TestFunctional("atan_x_minus_y", lambda u: np.arctan(x(u) - y(u)), np.sqrt(2.0), np.pi / 2),
    ]


def sobolev_panel(s: float) -> list:
    """Functionals Lipschitz in the H^s metric, for spectral states."""
    n = lambda u: sobolev_norm(u, s)
    return [
        TestFunctional(f"tanh_h{s}", lambda u: np.tanh(n(u)), 1.0, 1.0),
        TestFunctional(f"sin_h{s}", lambda u: np.sin(n(u)), 1.0, 1.0),
        TestFunctional(f"bump_h{s}", lambda u: 1.0 / (1.0 + n(u) ** 2), 0.65, 1.0),
        TestFunctional(f"atan_h{s}", lambda u: np.arctan(n(u)), 1.0, np.pi / 2),
        TestFunctional(f"exp_h{s}", lambda u: np.exp(-n(u)), 1.0, 1.0),
    ]


def lipb_curve_from_episodes(res: EpisodeResult, panel: Sequence[TestFunctional],
                             fit_from: float = 0.0) -> DecayCurve:
    """max over the panel of |E psi(u1(t)) - E psi(u2(t))| / |psi|_Lipb at block ends.

    Both expectations are estimated on the same coupled pairs, so the
    estimate is the mean of pairwise differences and its error vanishes
    once pairs have coupled.
    """
    n = res.n_episodes
    vals, ses = [], []
    for psi in panel:
        d = (psi.fn(res.u1) - psi.fn(res.u2)) / psi.lipb
        vals.append(np.abs(d.mean(axis=0)))
        ses.append(d.std(axis=0, ddof=1) / np.sqrt(n))
    vals, ses = np.array(vals), np.array(ses)
    best = vals.argmax(axis=0)
    cols = np.arange(vals.shape[1])
    v, se = vals[best, cols], ses[best, cols]
    return DecayCurve(res.times, v, np.maximum(v - 3 * se, 0.0), v + 3 * se).fit(fit_from)


def lipb_decay_curve(model, u01, u02, cfg: SchedulerConfig, nsamples: int, seed: int,
                     panel: Optional[Sequence[TestFunctional]] = None, sobolev_s: Optional[float] = None,
                     workers: int = 1, fit_from: float = 0.0):
    if panel is None:
        panel = sobolev_panel(sobolev_s) if sobolev_s is not None else default_panel(model)
    res = simulate_pair(model, u01, u02, cfg, nsamples, seed, workers)
    return lipb_curve_from_episodes(res, panel, fit_from), res

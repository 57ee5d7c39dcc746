"""Additive-noise SDE on the circle R/Z: dX + f(X) dt = dW."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .base import LowHighModel, ModelContractError


@dataclass(frozen=True)
class ZeroDrift:
    def __call__(self, x):
        return np.zeros_like(x)

    lip = 0.0
    sup = 0.0


@dataclass(frozen=True)
class SineDrift:
    """f(x) = amp * sin(2 pi freq x + phase)."""

    amp: float = 1.0
    freq: int = 1
    phase: float = 0.0

    def __call__(self, x):
        return self.amp * np.sin(2 * np.pi * self.freq * x + self.phase)

    @property
    def lip(self):
        return abs(self.amp) * 2 * np.pi * abs(self.freq)

    @property
    def sup(self):
        return abs(self.amp)


def torus_dist(x, y):
    d = np.mod(np.asarray(x) - np.asarray(y), 1.0)
    return np.minimum(d, 1.0 - d)


def torus_delta(x1, x2):
    """Signed shortest displacement from x1 to x2, in [-1/2, 1/2)."""
    return np.mod(np.asarray(x2) - np.asarray(x1) + 0.5, 1.0) - 0.5


class TorusModel(LowHighModel):
    low_dim = 1
    high_dim = 0

    def __init__(self, f: Callable = ZeroDrift(), lip_f: float | None = None,
                 sup_f: float | None = None, dt: float = 1e-3, T: float = 1.0,
                 check_points: int = 257):
        if dt <= 0 or T <= 0:
            raise ModelContractError("dt and T must be positive")
        self.f = f
        self.lip_f = float(getattr(f, "lip", 0.0) if lip_f is None else lip_f)
        self.sup_f = float(getattr(f, "sup", 0.0) if sup_f is None else sup_f)
        self.dt = float(dt)
        self.T = float(T)
        grid = np.linspace(0.0, 1.0, check_points, endpoint=False)
        fx = f(grid)
        if np.max(np.abs(fx)) > self.sup_f + 1e-12:
            raise ModelContractError("sup bound of f violated on the check grid")
        slopes = np.abs(np.diff(np.append(fx, fx[0]))) / (1.0 / check_points)
        if np.max(slopes) > self.lip_f * (1 + 1e-9) + 1e-12:
            raise ModelContractError("Lipschitz bound of f violated on the check grid")

    # paths are kept in lifted coordinates inside a block; see normalize()
    def means(self, X, Y):
        return X - self.f(X) * self.dt, Y

    def noise_apply(self, X, dbeta):
        return dbeta

    def noise_solve(self, X, v):
        return v

    def noise_logdet(self, X):
        return np.zeros(X.shape[:-1])

    def high_noise_apply(self, X, deta):
        return deta

    def lyapunov(self, u):
        return np.zeros(u.shape[:-1])

    def distance(self, u1, u2):
        return torus_dist(u1[..., 0], u2[..., 0])

    def low_delta(self, X1, X2):
        return torus_delta(X1, X2)

    def lift(self, X1, X2):
        return X1 + torus_delta(X1, X2)

    def normalize(self, u):
        return np.mod(u, 1.0)


def step_torus(model: TorusModel, x, dW):
    """One Euler-Maruyama step, wrapped to [0, 1)."""
    x = np.asarray(x, dtype=float)
    return np.mod(x - model.f(x) * model.dt + dW, 1.0)


def girsanov_drift_torus(model: TorusModel, T: float, x1, x2, path):
    """Drift along the shifted path ``X~ = X(., x1) + (T - t)/T * (x2 - x1)``.

    ``path`` holds X~ on the grid t_j = j dt (lifted coordinates); the
    returned drift lives on the first n grid points.  Under the law of
    X(., x2) the noise driving X~ has this drift, so
    ``log_likelihood_ratio(d, dW)`` is the log density ratio.
    """
    path = np.asarray(path, dtype=float)
    delta = torus_delta(x1, x2)
    n = path.shape[-1] - 1
    t = model.dt * np.arange(n)
    xt = path[..., :n]
    shift = (T - t) / T * delta
    d = delta / T + model.f(xt - shift) - model.f(xt)
    bound = abs(delta) / T + 2 * model.sup_f
    if np.max(np.abs(d), initial=0.0) > bound + 1e-9:
        raise ModelContractError("shifted drift exceeds its a-priori bound")
    return d

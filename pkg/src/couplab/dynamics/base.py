"""Generic low/high-mode stochastic systems and their discretized path laws.

A model splits its state ``u`` into low modes ``X`` (hit by an invertible,
possibly state-dependent noise) and high modes ``Y``.  One time step reads

    X' = mean_low(X, Y)  + sigma_l(X) dbeta
    Y' = mean_high(X, Y) + sigma_h(X) deta

with Gaussian increments.  The transition of ``X`` given the past is
therefore Gaussian with covariance ``sigma_l sigma_l^* dt``, which makes the
path density of ``(X, deta)`` explicit and lets every density ratio used by
the coupling engine be evaluated exactly on the discretized law.

Complex noise components have independent real and imaginary parts, each
of variance ``dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ModelContractError(ValueError):
    """A model invariant (bounds, shapes, grids) is violated."""


class BlowUpError(FloatingPointError):
    """A trajectory produced non-finite or oversized values."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


BLOWUP_THRESHOLD = 1e12


class LowHighModel:
    """Interface shared by the torus, toy and CGL models (batched arrays)."""

    dt: float
    T: float
    low_dim: int
    high_dim: int
    dtype = np.float64

    # -- state layout -------------------------------------------------
    def split(self, u):
        return u[..., : self.low_dim], u[..., self.low_dim:]

    def join(self, X, Y):
        return np.concatenate([X, Y], axis=-1)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def steps_for(self, duration: float) -> int:
        return int(round(duration / self.dt))

    # -- dynamics -----------------------------------------------------
    def means(self, X, Y):
        raise NotImplementedError

    def noise_apply(self, X, dbeta):
        raise NotImplementedError

    def noise_solve(self, X, v):
        raise NotImplementedError

    def noise_logdet(self, X):
        """log |det| of sigma_l(X) as a real-linear map, per batch row."""
        raise NotImplementedError

    def high_noise_apply(self, X, deta):
        raise NotImplementedError

    # -- functionals --------------------------------------------------
    def lyapunov(self, u):
        """The Lyapunov functional H(u), per batch row."""
        return np.sum(np.abs(u) ** 2, axis=-1)

    def energy_components(self, u):
        """Weighted integrands of the running part of the energy, by name."""
        return {}

    def energy_rates(self, u):
        """Integrand of the running part of the energy, per batch row."""
        comps = self.energy_components(u)
        return sum(comps.values()) if comps else np.zeros(np.shape(u)[:-1])

    def distance(self, u1, u2):
        return np.sqrt(np.sum(np.abs(u1 - u2) ** 2, axis=-1))

    def low_delta(self, X1, X2):
        """Displacement taking X1 to X2 used for shifted couplings."""
        return X2 - X1

    def lift(self, X1, X2):
        """Representative of X2 near X1 (identity except on quotient spaces)."""
        return X2

    def normalize(self, u):
        return u

    # -- randomness ---------------------------------------------------
    @property
    def real_low_dim(self) -> int:
        return self.low_dim * (2 if np.iscomplexobj(np.zeros(0, self.dtype)) else 1)

    def _gauss(self, rng, shape):
        s = np.sqrt(self.dt)
        if np.iscomplexobj(np.zeros(0, self.dtype)):
            z = rng.standard_normal(shape + (2,))
            return s * (z[..., 0] + 1j * z[..., 1])
        return s * rng.standard_normal(shape)

    def draw_noise(self, rng, batch: int, n_steps: Optional[int] = None):
        n = self.n_steps if n_steps is None else n_steps
        dbeta = self._gauss(rng, (batch, n, self.low_dim))
        deta = self._gauss(rng, (batch, n, self.high_dim))
        return dbeta, deta


@dataclass
class PathSegment:
    """Time-discretized trajectory of a model over one window."""

    times: np.ndarray
    states: np.ndarray
    dbeta: np.ndarray
    deta: np.ndarray
    seed: Optional[tuple] = None
    low_means: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dW(self):
        return np.concatenate([self.dbeta, self.deta], axis=-1)


def _check(u, t0: float, dt: float):
    """Raise BlowUpError at the first grid time where a path leaves the finite range."""
    a = np.abs(u)
    bad = ~np.isfinite(a) | (a > BLOWUP_THRESHOLD)
    if bad.any():
        j = int(np.argmax(bad.any(axis=tuple(i for i in range(u.ndim) if i != 1))))
        t = t0 + j * dt
        raise BlowUpError(f"trajectory blew up at t={t:.6g}", t)


def simulate(model: LowHighModel, u0, dbeta, deta, t0: float = 0.0, check: bool = True):
    """Integrate from ``u0`` (batch, dim) with the given increments.

    Returns ``(X, Y, mX)``: low and high paths of shape (batch, n+1, .) and
    the low-mode means of each transition, shape (batch, n, low_dim).  With
    ``check=False`` blown-up rows are left in place (see :func:`finite_rows`).
    """
    u0 = np.asarray(u0, dtype=model.dtype)
    B, n = dbeta.shape[0], dbeta.shape[1]
    X = np.empty((B, n + 1, model.low_dim), dtype=model.dtype)
    Y = np.empty((B, n + 1, model.high_dim), dtype=model.dtype)
    mX = np.empty((B, n, model.low_dim), dtype=model.dtype)
    X[:, 0], Y[:, 0] = model.split(u0)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n):
            mx, my = model.means(X[:, j], Y[:, j])
            mX[:, j] = mx
            X[:, j + 1] = mx + model.noise_apply(X[:, j], dbeta[:, j])
            Y[:, j + 1] = my + model.high_noise_apply(X[:, j], deta[:, j])
    if check:
        _check(X, t0, model.dt)
        _check(Y, t0, model.dt)
    return X, Y, mX


def finite_rows(*paths):
    """Rows whose paths stay finite and below the blow-up threshold."""
    ok = None
    for p in paths:
        flat = np.abs(p.reshape(p.shape[0], -1))
        r = np.all(np.isfinite(flat) & (flat <= BLOWUP_THRESHOLD), axis=1)
        ok = r if ok is None else ok & r
    return ok


def phi(model: LowHighModel, X, deta, y0, t0: float = 0.0, check: bool = True):
    """High-mode reconstruction from a low-mode path and high-mode noise.

    Returns ``(Y, mX)`` where ``mX[:, j]`` is the low-mode mean the model
    would use at step ``j`` given ``(X_j, Y_j)``.  ``Y[:, j]`` only depends
    on ``X[:, :j]`` and ``deta[:, :j]``.
    """
    if X.shape[1] != deta.shape[1] + 1:
        raise ModelContractError("low-mode path and high-mode noise are on different grids")
    B, n = deta.shape[0], deta.shape[1]
    Y = np.empty((B, n + 1, model.high_dim), dtype=model.dtype)
    mX = np.empty((B, n, model.low_dim), dtype=model.dtype)
    Y[:, 0] = y0
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n):
            mx, my = model.means(X[:, j], Y[:, j])
            mX[:, j] = mx
            Y[:, j + 1] = my + model.high_noise_apply(X[:, j], deta[:, j])
    if check:
        _check(Y, t0, model.dt)
    return Y, mX


def _real_sq(z):
    return np.sum(z.real ** 2 + z.imag ** 2, axis=-1) if np.iscomplexobj(z) else np.sum(z * z, axis=-1)


def transition_logdensity(model: LowHighModel, X, mX):
    """Sum over steps of the Gaussian log density of X_{j+1} given its mean ``mX[:, j]``."""
    const = 0.5 * model.real_low_dim * np.log(2.0 * np.pi * model.dt)
    z = model.noise_solve(X[:, :-1], X[:, 1:] - mX)
    per_step = -0.5 * _real_sq(z) / model.dt - model.noise_logdet(X[:, :-1]) - const
    return np.sum(per_step, axis=1)


def noise_shift_drift(model: LowHighModel, X, mX_from, mX_to):
    """Drift ``d`` with ``log(dlaw_to/dlaw_from) = llr(d, dbeta)`` along a shared low path.

    ``d_j = sigma_l(X_j)^{-1} (mX_to_j - mX_from_j) / dt``; under the target
    law the source noise ``dbeta`` acquires drift ``d``.
    """
    return model.noise_solve(X[:, :-1], mX_to - mX_from) / model.dt


def recover_noise(model: LowHighModel, X, mX):
    """Low-mode increments dbeta that drive the path ``X`` given its means."""
    return model.noise_solve(X[:, :-1], X[:, 1:] - mX)


def log_likelihood_ratio(drift, dW, dt: float):
    """Discrete Girsanov exponent ``sum d.dW - 1/2 sum |d|^2 dt`` over the last two axes.

    For complex arrays the inner product is the real one, ``Re(conj(d) dW)``.
    """
    drift = np.asarray(drift)
    dW = np.asarray(dW)
    if drift.shape != dW.shape:
        raise ModelContractError("drift and noise grids are not aligned")
    inner = np.real(np.conj(drift) * dW)
    sq = np.abs(drift) ** 2
    axes = tuple(range(max(drift.ndim - 2, 0), drift.ndim)) if drift.ndim >= 2 else (0,)
    if drift.ndim == 0:
        return float(inner - 0.5 * sq * dt)
    out = np.sum(inner, axis=axes) - 0.5 * dt * np.sum(sq, axis=axes)
    return out if np.ndim(out) else float(out)


def simulate_path(model: LowHighModel, u0, rng, n_steps: Optional[int] = None,
                  t0: float = 0.0, seed=None) -> PathSegment:
    """Simulate a batch from ``u0`` (1-D state broadcast, or (batch, dim))."""
    u0 = np.atleast_2d(np.asarray(u0, dtype=model.dtype))
    dbeta, deta = model.draw_noise(rng, u0.shape[0], n_steps)
    X, Y, mX = simulate(model, u0, dbeta, deta, t0)
    states = model.join(X, Y)
    n = dbeta.shape[1]
    times = t0 + model.dt * np.arange(n + 1)
    return PathSegment(times, states, dbeta, deta, seed, mX)

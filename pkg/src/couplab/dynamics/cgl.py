"""Spectral Galerkin model of the stochastic complex Ginzburg-Landau equation.

    du + (eps + i) A u dt + (eta + i lam) |u|^(2 sigma) u dt = b(u) dW

on D = (0, 1) with Dirichlet data, in the sine basis e_k = sqrt(2) sin(k pi x)
with A e_k = mu_k e_k, mu_k = (k pi)^2, k = 1..M.  Low modes are k <= N.
Time stepping is an exponential Euler scheme: the linear factor is exact,
the nonlinearity explicit, the noise additive at the end of the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LowHighModel, ModelContractError

CASES = ("L2", "H1")


def eigenvalues(M: int) -> np.ndarray:
    return (np.pi * np.arange(1, M + 1)) ** 2


@dataclass(frozen=True)
class NoiseOperator:
    """Block noise b(u): state-dependent low block, diagonal high block.

    Low block: ``low_scale * (I + perturb * c(u) * S)`` with S the upper
    shift matrix and ``c(u) = m / (1 + m)``, ``m = |P_N1 u|^2``.  It depends
    only on the first N1 modes, is bounded Lipschitz, and its inverse has
    norm at most ``1 / (low_scale * (1 - perturb))``.  High block: diagonal
    amplitudes ``high_scale * mu_{N+1} / mu_k``.
    """

    N: int
    N1: int
    M: int
    low_scale: float = 1.0
    perturb: float = 0.1
    high_scale: float = 0.5

    def __post_init__(self):
        if not 1 <= self.N1 <= self.N <= self.M:
            raise ModelContractError("need 1 <= N1 <= N <= M")
        if self.low_scale < 0 or self.high_scale < 0 or not 0 <= self.perturb < 1:
            raise ModelContractError("noise amplitudes must be nonnegative and perturb in [0, 1)")

    @property
    def sigma0(self) -> float:
        return self.low_scale * (1.0 - self.perturb)

    @property
    def high_amps(self) -> np.ndarray:
        mu = eigenvalues(self.M)
        if self.N == self.M:
            return np.zeros(0)
        return self.high_scale * mu[self.N] / mu[self.N:]

    def B(self, s: float) -> float:
        """Upper bound of sup_u |b(u)|^2 in the Hilbert-Schmidt norm into H^s."""
        mu = eigenvalues(self.M)
        low = self.low_scale ** 2 * np.sum(mu[: self.N] ** s * (1.0 + self.perturb ** 2 * (np.arange(self.N) < self.N - 1)))
        high = np.sum(mu[self.N:] ** s * self.high_amps ** 2)
        return float(low + high)

    def _c(self, X):
        m = np.sum(np.abs(X[..., : self.N1]) ** 2, axis=-1)
        return m / (1.0 + m)

    def low_matrix(self, X) -> np.ndarray:
        c = self._c(X)
        eye = np.eye(self.N)
        S = np.eye(self.N, k=1)
        return self.low_scale * (eye + self.perturb * c[..., None, None] * S)

    def apply_low(self, X, dbeta):
        pc = self.perturb * self._c(X)[..., None]
        out = dbeta.copy()
        out[..., :-1] += pc * dbeta[..., 1:]
        return self.low_scale * out

    def solve_low(self, X, v):
        if self.low_scale == 0:
            raise ModelContractError("low-mode noise is switched off; densities are undefined")
        pc = self.perturb * self._c(X)
        z = np.empty_like(v)
        z[..., -1] = v[..., -1] / self.low_scale
        for i in range(self.N - 2, -1, -1):
            z[..., i] = v[..., i] / self.low_scale - pc * z[..., i + 1]
        return z

    def logdet_low(self, X):
        # unit upper-triangular factor; complex map counted as a real one
        return np.full(X.shape[:-1], 2.0 * self.N * np.log(self.low_scale))

    def apply(self, u, dW):
        """Full operator on an M-vector of increments."""
        X = u[..., : self.N]
        return np.concatenate([self.apply_low(X, dW[..., : self.N]),
                               self.high_amps * dW[..., self.N:]], axis=-1)


@dataclass
class SpectralField:
    coeffs: np.ndarray
    grid_size: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.grid_size == 0:
            self.grid_size = 4 * self.coeffs.shape[-1]
        if self.grid_size < 2 * self.coeffs.shape[-1]:
            raise ModelContractError("grid_size must be at least 2M")

    @property
    def M(self) -> int:
        return self.coeffs.shape[-1]


def sobolev_norm(field, s: float):
    """sqrt(sum_k mu_k^s |a_k|^2) for a SpectralField or coefficient array."""
    if not 0.0 <= s <= 3.0:
        raise ModelContractError("s must lie in [0, 3]")
    a = field.coeffs if isinstance(field, SpectralField) else np.asarray(field)
    mu = eigenvalues(a.shape[-1])
    return np.sqrt(np.sum(mu ** s * np.abs(a) ** 2, axis=-1))


class CollocationGrid:
    """Interior grid x_j = j/(G+1); exact sine transforms for modes 1..G."""

    def __init__(self, M: int, G: int):
        self.M, self.G = M, G
        self.x = np.arange(1, G + 1) / (G + 1)
        k = np.arange(1, M + 1)
        self.k = k
        arg = np.pi * np.outer(self.x, k)
        self.sin = np.sqrt(2.0) * np.sin(arg)            # (G, M)
        self.dcos = np.sqrt(2.0) * np.pi * k * np.cos(arg)  # derivative of the basis
        self.weight = 1.0 / (G + 1)
        self.cutoff = (2 * G) // 3

    def values(self, a):
        return a @ self.sin.T

    def gradient(self, a):
        return a @ self.dcos.T

    def project(self, v):
        return (v @ self.sin) * self.weight

    def project_full(self, v):
        """All G sine coefficients of grid values, with the 2/3-rule truncation applied."""
        kk = np.arange(1, self.G + 1)
        basis = np.sqrt(2.0) * np.sin(np.pi * np.outer(self.x, kk))
        out = (v @ basis) * self.weight
        out[..., self.cutoff:] = 0.0
        return out

    def integral(self, v):
        return np.sum(v, axis=-1) * self.weight


class CglModel(LowHighModel):
    dtype = np.complex128

    def __init__(self, eps: float = 0.5, eta: float = 0.5, lam: int = 1, sigma: float = 1.0,
                 M: int = 16, N: int = 8, N1: int = 4, noise: NoiseOperator | None = None,
                 dt: float = 1e-3, T: float = 1.0, case: str = "L2", grid_size: int | None = None,
                 nonlinear: bool = True, d: int = 1):
        if eps <= 0 or eta <= 0:
            raise ModelContractError("eps and eta must be positive")
        if lam not in (-1, 1):
            raise ModelContractError("lam must be +1 or -1")
        if case not in CASES:
            raise ModelContractError(f"case must be one of {CASES}")
        if d != 1:
            raise ModelContractError("only the one-dimensional domain (0, 1) is implemented")
        if case == "L2" and not 0 < sigma < min(2.0 / d, 1.5):
            raise ModelContractError("L2-subcritical case needs 0 < sigma < min(2/d, 3/2)")
        if case == "H1" and (lam != 1 or sigma <= 0):
            raise ModelContractError("H1-subcritical case needs lam = 1 and sigma > 0")
        if not 1 <= N1 <= N <= M:
            raise ModelContractError("need 1 <= N1 <= N <= M")
        if dt <= 0 or T <= 0:
            raise ModelContractError("dt and T must be positive")
        self.eps, self.eta, self.lam, self.sigma = float(eps), float(eta), int(lam), float(sigma)
        self.M, self.N, self.N1 = int(M), int(N), int(N1)
        self.noise = NoiseOperator(N, N1, M) if noise is None else noise
        if (self.noise.N, self.noise.N1, self.noise.M) != (self.N, self.N1, self.M):
            raise ModelContractError("noise operator dimensions do not match the model")
        self.dt, self.T, self.case, self.nonlinear, self.d = float(dt), float(T), case, nonlinear, d
        self.grid_size = 4 * M if grid_size is None else int(grid_size)
        if self.grid_size < 2 * M:
            raise ModelContractError("grid_size must be at least 2M")
        self.mu = eigenvalues(M)
        self.linear_factor = np.exp(-(self.eps + 1j) * self.mu * self.dt)
        self.grid = CollocationGrid(M, self.grid_size)
        self.low_dim = self.N
        self.high_dim = self.M - self.N
        self.sigma0 = self.noise.sigma0
        self.high_amps = self.noise.high_amps

    # -- nonlinearity --------------------------------------------------
    def nonlinearity(self, a, full: bool = False):
        """(eta + i lam) |u|^(2 sigma) u projected on the sine modes."""
        u = self.grid.values(a)
        w = (np.abs(u) ** 2) ** self.sigma * u
        proj = self.grid.project_full(w) if full else self.grid.project(w)
        return (self.eta + 1j * self.lam) * proj

    def means(self, X, Y):
        a = np.concatenate([X, Y], axis=-1)
        if self.nonlinear:
            with np.errstate(over="ignore", invalid="ignore"):
                a = a - self.dt * self.nonlinearity(a)
        m = self.linear_factor * a
        return m[..., : self.N], m[..., self.N:]

    def noise_apply(self, X, dbeta):
        return self.noise.apply_low(X, dbeta)

    def noise_solve(self, X, v):
        return self.noise.solve_low(X, v)

    def noise_logdet(self, X):
        return self.noise.logdet_low(X)

    def high_noise_apply(self, X, deta):
        return self.high_amps * deta

    # -- functionals ---------------------------------------------------
    def lp_power(self, a, p: float):
        """Integral of |u|^p over D, from grid quadrature."""
        return self.grid.integral(np.abs(self.grid.values(a)) ** p)

    def lyapunov(self, a):
        if self.case == "L2":
            return np.sum(np.abs(a) ** 2, axis=-1)
        s = self.sigma
        return 0.5 * np.sum(self.mu * np.abs(a) ** 2, axis=-1) + self.lp_power(a, 2 * s + 2) / (2 * s + 2)

    def energy_components(self, a):
        if self.case == "L2":
            return {"h1": self.eps * np.sum(self.mu * np.abs(a) ** 2, axis=-1)}
        s = self.sigma
        u = self.grid.values(a)
        du = self.grid.gradient(a)
        au2 = np.abs(u) ** 2
        h2 = np.sum(self.mu ** 2 * np.abs(a) ** 2, axis=-1)
        l4 = self.grid.integral(au2 ** (2 * s + 1))
        grad = self.grid.integral(au2 ** s * np.abs(du) ** 2)
        return {"h2": 0.5 * self.eps * h2, "l4s2": 0.5 * self.eta * l4, "grad": (self.eta + self.eps) * grad}

    def norm_H(self, a):
        return sobolev_norm(a, 0.0 if self.case == "L2" else 1.0)

    def distance(self, u1, u2):
        return self.norm_H(u1 - u2)


def step_cgl(model: CglModel, u, dW, t: float = float("nan")):
    """One exponential-Euler step; ``u`` is a SpectralField or coefficient array.

    ``t`` is the time at the start of the step, reported on blow-up.
    """
    from .base import BlowUpError, BLOWUP_THRESHOLD

    is_field = isinstance(u, SpectralField)
    a = u.coeffs if is_field else np.asarray(u, dtype=complex)
    dW = np.asarray(dW, dtype=complex)
    if dW.shape[-1] != model.M:
        raise ModelContractError("noise increment must have M components")
    with np.errstate(over="ignore", invalid="ignore"):
        nl = model.nonlinearity(a) if model.nonlinear else 0.0
        out = model.linear_factor * (a - model.dt * nl) + model.noise.apply(a, dW)
    if not np.all(np.isfinite(out)) or np.max(np.abs(out), initial=0.0) > BLOWUP_THRESHOLD:
        raise BlowUpError(f"CGL step blew up at t={t + model.dt:.6g}", t + model.dt)
    return SpectralField(out, u.grid_size) if is_field else out

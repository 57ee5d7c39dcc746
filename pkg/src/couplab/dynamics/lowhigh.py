"""Two-dimensional low/high toy system.

    dX + 2X dt + f(X, Y) dt = sigma_l(X) dbeta
    dY + 2Y dt + g(X, Y) dt = sigma_h(X) deta
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LowHighModel, ModelContractError


@dataclass(frozen=True)
class ToyCoefficients:
    """Default bounded Lipschitz coefficients.

    f = a_f sin(x) cos(y), g = a_g sin(y) + b_g cos(x),
    sigma_l = s0 + s1 / (1 + x^2), sigma_h = h0 + h1 tanh(x).
    """

    a_f: float = 0.5
    a_g: float = 0.5
    b_g: float = 0.3
    s0: float = 1.0
    s1: float = 0.5
    h0: float = 0.5
    h1: float = 0.25

    def f(self, x, y):
        return self.a_f * np.sin(x) * np.cos(y)

    def g(self, x, y):
        return self.a_g * np.sin(y) + self.b_g * np.cos(x)

    def sigma_l(self, x):
        return self.s0 + self.s1 / (1.0 + x * x)

    def sigma_h(self, x):
        return self.h0 + self.h1 * np.tanh(x)

    @property
    def lip_f(self):
        return abs(self.a_f)

    @property
    def sup_f(self):
        return abs(self.a_f)

    @property
    def sup_g(self):
        return abs(self.a_g) + abs(self.b_g)

    @property
    def lip_g_y(self):
        return abs(self.a_g)

    @property
    def sigma0(self):
        return self.s0 + min(self.s1, 0.0)


class LowHighToyModel(LowHighModel):
    low_dim = 1
    high_dim = 1

    def __init__(self, coeffs: ToyCoefficients = ToyCoefficients(), sigma0: float | None = None,
                 K0: float | None = None, dt: float = 1e-3, T: float = 1.0, check_radius: float = 6.0,
                 check_points: int = 61):
        if dt <= 0 or T <= 0:
            raise ModelContractError("dt and T must be positive")
        self.c = coeffs
        self.sigma0 = float(coeffs.sigma0 if sigma0 is None else sigma0)
        self.K0 = float((coeffs.sup_f ** 2 + coeffs.sup_g ** 2) / 4 if K0 is None else K0)
        self.lip_f = coeffs.lip_f
        self.sup_f = coeffs.sup_f
        self.dt = float(dt)
        self.T = float(T)
        g1 = np.linspace(-check_radius, check_radius, check_points)
        x, y = np.meshgrid(g1, g1, indexing="ij")
        if np.min(coeffs.sigma_l(g1)) < self.sigma0 or self.sigma0 <= 0:
            raise ModelContractError("sigma_l falls below sigma0 on the check grid")
        gy = coeffs.g(x, y)
        dy = np.abs(np.diff(gy, axis=1)) / (g1[1] - g1[0])
        if np.max(dy) > 1.0 + 1e-9:
            raise ModelContractError("g is not 1-Lipschitz in y on the check grid")
        if np.min(coeffs.f(x, y) * x + gy * y + x * x + y * y + self.K0) < -1e-12:
            raise ModelContractError("dissipativity condition fails on the check grid")

    def means(self, X, Y):
        dt = self.dt
        mx = X - (2 * X + self.c.f(X, Y)) * dt
        my = Y - (2 * Y + self.c.g(X, Y)) * dt
        return mx, my

    def noise_apply(self, X, dbeta):
        return self.c.sigma_l(X) * dbeta

    def noise_solve(self, X, v):
        return v / self.c.sigma_l(X)

    def noise_logdet(self, X):
        return np.log(np.abs(self.c.sigma_l(X[..., 0])))

    def high_noise_apply(self, X, deta):
        return self.c.sigma_h(X) * deta


def step_lowhigh(model: LowHighToyModel, state, noise):
    """One explicit Euler-Maruyama step of the toy system."""
    X, Y = np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float)
    dbeta, deta = noise
    mx, my = model.means(X, Y)
    return mx + model.c.sigma_l(X) * dbeta, my + model.c.sigma_h(X) * deta

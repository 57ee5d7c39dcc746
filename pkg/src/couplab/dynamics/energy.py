"""Running energy functionals E_u(t, t0) = H(u(t)) + integral of the dissipation rate."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .base import LowHighModel


@dataclass(frozen=True)
class EnergyLedger:
    """Energy of one trajectory (or a batch) measured from time ``t0``.

    ``terminal`` is H(u(t)); ``integrals`` maps each dissipation component to
    its trapezoid-rule integral over [t0, t]; ``rates`` are the component
    integrands at the current time, kept for the next trapezoid step.
    """

    t0: float
    t: float
    terminal: np.ndarray
    integrals: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)

    @property
    def running(self):
        return sum(self.integrals.values()) if self.integrals else np.zeros_like(self.terminal)

    @property
    def value(self):
        return self.terminal + self.running


def energy_start(model: LowHighModel, state, t0: float = 0.0) -> EnergyLedger:
    state = np.asarray(state)
    rates = model.energy_components(state)
    return EnergyLedger(t0, t0, model.lyapunov(state),
                        {k: np.zeros_like(v) for k, v in rates.items()}, rates)


def energy_update(model: LowHighModel, ledger: EnergyLedger, state, dt: float) -> EnergyLedger:
    """Advance the ledger to ``ledger.t + dt`` with the new state."""
    state = np.asarray(state)
    rates = model.energy_components(state)
    integrals = {k: ledger.integrals[k] + 0.5 * dt * (ledger.rates[k] + rates[k]) for k in rates}
    return replace(ledger, t=ledger.t + dt, terminal=model.lyapunov(state), integrals=integrals, rates=rates)


def running_integral(model: LowHighModel, states, dt: float):
    """Cumulative trapezoid integral of the total dissipation rate along ``states`` (batch, n+1, dim)."""
    r = model.energy_rates(states)
    out = np.zeros(r.shape)
    out[..., 1:] = np.cumsum(0.5 * dt * (r[..., 1:] + r[..., :-1]), axis=-1)
    return out


def energy_path(model: LowHighModel, states, dt: float):
    """E_u(t_j, t_0) along a discretized path, shape (batch, n+1)."""
    return model.lyapunov(states) + running_integral(model, states, dt)

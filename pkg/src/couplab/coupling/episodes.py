"""Episodes of the coupled pair process and empirical block probabilities."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from ..dynamics.base import LowHighModel, log_likelihood_ratio
from ..dynamics.energy import running_integral
from ..dynamics.torus import TorusModel, girsanov_drift_torus
from ..rng import map_units
from ..sampling import maximal_coupling_sample
from .engine import (COUPLED, IDENTICAL, INF, UNCOUPLED, BlockData, L0State, SchedulerConfig, l0_update,
                     run_block_coupled, run_block_identical, run_block_uncoupled)


@dataclass
class EpisodeResult:
    """Block-end record of a batch of coupled episodes (INF = -1 encodes l0 = inf)."""

    times: np.ndarray
    u1: np.ndarray        # (episodes, K+1, dim)
    u2: np.ndarray
    l0: np.ndarray        # (episodes, K+1)
    branch: np.ndarray    # (episodes, K)
    success: np.ndarray   # (episodes, K): pair stayed / became equal during block k
    energy_ok: np.ndarray  # (episodes, K)
    H: np.ndarray         # (episodes, K+1): H(u1) + H(u2)
    dist: np.ndarray      # (episodes, K+1)
    x_equal: np.ndarray   # (episodes, K+1)

    @property
    def n_episodes(self):
        return self.l0.shape[0]

    @property
    def n_blocks(self):
        return self.branch.shape[1]

    @staticmethod
    def concat(parts):
        f = EpisodeResult.__dataclass_fields__
        return EpisodeResult(parts[0].times, *(np.concatenate([getattr(p, k) for p in parts])
                                               for k in list(f)[1:]))

    def equal_states(self, tol: float = 1e-9):
        """Pairs equal at block ends (tolerance in the state norm)."""
        return self.dist <= tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "k", "l0", "H_k", "x_equal", "energy_ok", "dist"])
        for e in range(self.n_episodes):
            for k in range(self.n_blocks + 1):
                l0 = "inf" if self.l0[e, k] == INF else int(self.l0[e, k])
                eo = int(self.energy_ok[e, k - 1]) if k else 1
                w.writerow([e, k, l0, repr(float(self.H[e, k])), int(self.x_equal[e, k]), eo,
                            repr(float(self.dist[e, k]))])
        return buf.getvalue()


def default_unit_size(model: LowHighModel, cfg: SchedulerConfig) -> int:
    """Episodes per work unit; bounded so full block paths fit comfortably in memory."""
    n = model.steps_for(cfg.T) + 1
    dim = model.low_dim + model.high_dim
    per = n * dim * (2 if np.iscomplexobj(np.zeros(0, model.dtype)) else 1)
    return int(np.clip(2**24 // max(per, 1), 1, 4096))


def _broadcast(u0, n, model):
    u0 = np.asarray(u0, dtype=model.dtype)
    return np.broadcast_to(u0, (n, u0.shape[-1])).copy() if u0.ndim == 1 else u0.copy()


def run_episodes(model: LowHighModel, u01, u02, cfg: SchedulerConfig, rng) -> EpisodeResult:
    """Run a batch of episodes sequentially on one random stream."""
    u1, u2 = np.asarray(u01, dtype=model.dtype).copy(), np.asarray(u02, dtype=model.dtype).copy()
    B, dim = u1.shape
    K, n, dt = cfg.max_blocks, model.steps_for(cfg.T), model.dt
    out = dict(u1=np.empty((B, K + 1, dim), model.dtype), u2=np.empty((B, K + 1, dim), model.dtype),
               l0=np.empty((B, K + 1), int), branch=np.empty((B, K), int), success=np.zeros((B, K), bool),
               energy_ok=np.ones((B, K), bool), H=np.empty((B, K + 1)), dist=np.empty((B, K + 1)),
               x_equal=np.empty((B, K + 1), bool))
    budget_on = cfg.aleph is not None

    def record(k, l0):
        out["u1"][:, k], out["u2"][:, k] = u1, u2
        out["l0"][:, k] = l0
        out["H"][:, k] = model.lyapunov(u1) + model.lyapunov(u2)
        out["dist"][:, k] = model.distance(u1, u2)
        out["x_equal"][:, k] = np.all(model.split(u1)[0] == model.split(u2)[0], axis=-1)

    def fresh_ok(v1, v2):
        if not budget_on:
            return np.ones(B, bool)
        return (model.lyapunov(v1) <= cfg.budget(0.0, False)) & (model.lyapunov(v2) <= cfg.budget(0.0, True))

    xeq = np.all(model.split(u1)[0] == model.split(u2)[0], axis=-1)
    H0 = model.lyapunov(u1) + model.lyapunov(u2)
    state = L0State(0, np.where(xeq & (H0 <= cfg.d0) & fresh_ok(u1, u2), 0, INF), np.zeros((B, 2)))
    cum = np.zeros((B, 2))
    record(0, state.l0)

    for k in range(K):
        t0 = k * cfg.T
        ident = np.all(u1 == u2, axis=-1)
        cb = state.coupled & ~ident
        ub = ~state.coupled & ~ident
        p1 = np.empty((B, n + 1, dim), model.dtype)
        p2 = np.empty_like(p1)
        succ = np.zeros(B, bool)
        if ident.any():
            p = run_block_identical(model, u1[ident], rng, n, t0)
            p1[ident], p2[ident], succ[ident] = p, p, True
        if cb.any():
            a, b, c = run_block_coupled(model, u1[cb], u2[cb], rng, n, t0, cfg.max_iter)
            p1[cb], p2[cb], succ[cb] = a, b, c
        if ub.any():
            a, b, c = run_block_uncoupled(model, u1[ub], u2[ub], rng, n, cfg, t0)
            p1[ub], p2[ub], succ[ub] = a, b, c
        out["branch"][:, k] = np.where(ident, IDENTICAL, np.where(cb, COUPLED, UNCOUPLED))

        energy_ok = np.ones(B, bool)
        if budget_on:
            I1 = cum[:, :1] + running_integral(model, p1, dt)
            I2 = cum[:, 1:] + running_integral(model, p2, dt)
            lT = np.where(state.coupled, state.l0, 0) * cfg.T
            elapsed = t0 + dt * np.arange(n + 1)[None, :] - lT[:, None]
            E1 = model.lyapunov(p1) + I1 - state.anchor[:, :1]
            E2 = model.lyapunov(p2) + I2 - state.anchor[:, 1:]
            energy_ok = (np.all(E1 <= cfg.budget(elapsed, False), axis=1)
                         & np.all(E2 <= cfg.budget(elapsed, True), axis=1))
            cum = np.stack([I1[:, -1], I2[:, -1]], axis=1)
        out["energy_ok"][:, k] = energy_ok
        out["success"][:, k] = succ

        u1, u2 = p1[:, -1].copy(), p2[:, -1].copy()
        xeq = np.all(model.split(u1)[0] == model.split(u2)[0], axis=-1)
        stayed = succ & (cb | ident)
        block = BlockData(stayed_equal=stayed, x_equal_end=xeq,
                          H_end=model.lyapunov(u1) + model.lyapunov(u2), energy_ok=energy_ok,
                          fresh_ok=fresh_ok(u1, u2), x_differs=~xeq, anchor_end=cum.copy())
        state = l0_update(state, block, cfg.d0)
        record(k + 1, state.l0)

    return EpisodeResult(cfg.T * np.arange(K + 1), **out)


def _episode_unit(rng, start, stop, model, u01, u02, cfg):
    return run_episodes(model, u01[start:stop], u02[start:stop], cfg, rng)


def simulate_pair(model: LowHighModel, u01, u02, cfg: SchedulerConfig, n_episodes: int = 1,
                  seed: int = 0, workers: int = 1, unit_size: int | None = None) -> EpisodeResult:
    """Independent coupled episodes from ``(u01, u02)`` over ``cfg.max_blocks`` blocks.

    Initial states are 1-D (shared by all episodes) or (n_episodes, dim).
    The result does not depend on ``workers``.
    """
    u01 = _broadcast(u01, n_episodes, model)
    u02 = _broadcast(u02, n_episodes, model)
    size = default_unit_size(model, cfg) if unit_size is None else unit_size
    parts = map_units(_episode_unit, n_episodes, seed, workers=workers, unit_size=size, tag=1,
                      args=(model, u01, u02, cfg))
    return EpisodeResult.concat(parts)


# --------------------------------------------------------------------------
# torus shifted coupling, written directly with the torus Girsanov drift
# --------------------------------------------------------------------------

def _torus_paths(model: TorusModel, x0, dW):
    n = dW.shape[1]
    X = np.empty((len(x0), n + 1))
    X[:, 0] = x0
    for j in range(n):
        X[:, j + 1] = X[:, j] - model.f(X[:, j]) * model.dt + dW[:, j]
    return X


def shifted_coupling_block_torus(model: TorusModel, x1, x2, T: float, rng, size: int | None = None):
    """Maximal coupling of the line-shifted X(., x1) with X(., x2) over [0, T].

    Returns ``(Z1, Z2, coupled)``: lifted paths (Z1 unshifted, i.e. a path of
    X(., x1)) and the terminal-equality flag.  Equal starting points give the
    trivial coupling.
    """
    single = size is None
    B = 1 if single else int(size)
    x1 = np.broadcast_to(np.asarray(x1, dtype=float), (B,)).copy()
    x2 = np.broadcast_to(np.asarray(x2, dtype=float), (B,)).copy()
    n = model.steps_for(T)
    delta = model.low_delta(x1, x2)
    x2l = x1 + delta
    w = 1.0 - np.arange(n + 1) / n
    sd = np.sqrt(model.dt)

    def sample1(g, idx):
        dW = sd * g.standard_normal((len(idx), n))
        X1 = _torus_paths(model, x1[idx], dW)
        Z = X1 + w * delta[idx, None]
        Z[:, 0] = x2l[idx]
        d = np.stack([girsanov_drift_torus(model, T, x1[i], x2[i], Z[r]) for r, i in enumerate(idx)])
        return {"X1": X1, "Z": Z, "lr": log_likelihood_ratio(d[..., None], dW[..., None], model.dt)}

    def sample2(g, idx):
        dW2 = sd * g.standard_normal((len(idx), n))
        Z = _torus_paths(model, x2l[idx], dW2)
        X1 = Z - w * delta[idx, None]
        X1[:, 0] = x1[idx]
        dW1 = X1[:, 1:] - X1[:, :-1] + model.f(X1[:, :-1]) * model.dt
        d = np.stack([girsanov_drift_torus(model, T, x1[i], x2[i], Z[r]) for r, i in enumerate(idx)])
        return {"X1": X1, "Z": Z, "lr": log_likelihood_ratio(d[..., None], dW1[..., None], model.dt)}

    same = delta == 0
    z1, z2, coupled = maximal_coupling_sample(sample1, lambda p, i: np.where(same[i], 0.0, p["lr"]),
                                              sample2, rng, size=B, max_batch=max(B, 64))
    Z1, Z2 = z1["X1"], z2["Z"]
    met = np.mod(Z1[:, -1], 1.0) == np.mod(Z2[:, -1], 1.0)
    if single:
        return Z1[0], Z2[0], bool(met[0])
    return Z1, Z2, met


# --------------------------------------------------------------------------
# block probabilities
# --------------------------------------------------------------------------

def block_probabilities(res: EpisodeResult, R0: float = np.inf, K: int | None = None):
    """Transition frequencies of l0 with Wilson 95% intervals.

    ``p_minus1``: P(l0(k+1) = k+1 | l0(k) = inf, H_k <= R0);
    ``p[j]``: P(l0(k+1) = l | l0(k) = l) with j = k - l.
    """
    l0 = res.l0
    nb = res.n_blocks
    ks = np.arange(nb)
    now, nxt = l0[:, :-1], l0[:, 1:]
    unc = (now == INF) & (res.H[:, :-1] <= R0) & (res.branch != IDENTICAL)
    hit = nxt == ks[None, :] + 1
    s, m = int(np.sum(unc & hit)), int(np.sum(unc))
    out = {"p_minus1": _entry(s, m)}
    K = nb if K is None else K
    table = []
    for j in range(K):
        sel = (now != INF) & (ks[None, :] - now == j)
        s, m = int(np.sum(sel & (nxt == now))), int(np.sum(sel))
        e = _entry(s, m)
        e["k_minus_l"] = j
        table.append(e)
    out["p"] = table
    out["decoupling"] = [{"k_minus_l": e["k_minus_l"], "rate": None if e["estimate"] is None else 1 - e["estimate"],
                          "ci": [1 - e["ci"][1], 1 - e["ci"][0]]} for e in table]
    return out


def _entry(s, m):
    from ..estimators.stats import wilson  # estimators depend on this module
    lo, hi = wilson(s, m)
    return {"estimate": s / m if m else None, "ci": [lo, hi], "successes": s, "trials": m}


def estimate_block_probabilities(model: LowHighModel, cfg: SchedulerConfig, nsamples: int, seed: int,
                                 u01, u02, workers: int = 1, K: int | None = None):
    """Monte-Carlo estimates of the conditional block probabilities with Wilson intervals."""
    if nsamples < 100:
        warnings.warn(f"only {nsamples} samples; block probability intervals will be wide", RuntimeWarning)
    res = simulate_pair(model, u01, u02, cfg, nsamples, seed, workers)
    out = block_probabilities(res, cfg.R0, K)
    out["nsamples"] = nsamples
    return out, res

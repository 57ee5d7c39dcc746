"""Block-by-block coupling of two solutions and the l0 bookkeeping process.

Each block of length T is built in one of three ways:

* identical states: both solutions share all noise (trivial coupling);
* ``l0(k) <= k`` (coupled branch): the laws of the low-mode path plus
  high-mode noise started from ``(x, y1)`` and ``(x, y2)`` are maximally
  coupled, the density ratio being the Girsanov exponent of the drift that
  binds the two high-mode reconstructions;
* ``l0(k) = inf`` (uncoupled branch): shared noise on ``[0, theta]``, then one
  attempt on ``[theta, T]`` to make the low modes meet at the block end,
  by maximally coupling the law of ``X2`` with the law of the line-shifted
  ``X1 + (1 - s/T1)(x2 - x1)``.  Paths whose energy leaves the budget are
  sent to a cemetery value and never count as coupled.

Every block draws fresh randomness, so each component is, on its own, an
exact sample of the discretized model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..dynamics.base import (LowHighModel, log_likelihood_ratio, noise_shift_drift, phi, recover_noise,
                             simulate, transition_logdensity)
from ..sampling import maximal_coupling_sample

INF = -1  # l0 value meaning "not coupled"

IDENTICAL, COUPLED, UNCOUPLED = 2, 1, 0


class ConsistencyError(RuntimeError):
    """Bookkeeping flags disagree with the trajectories they describe."""


class SchedulerConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchedulerConfig:
    """Parameters of the block scheduler.

    ``aleph = None`` disables the energy budget (no cemetery, no energy
    conditions in the l0 predicate).  ``attempt_length`` is the length T1 of
    the coupling attempt in the uncoupled branch (default: the whole block).
    """

    T: float = 1.0
    d0: float = np.inf
    R0: float = np.inf
    aleph: Optional[float] = None
    B: float = 0.0
    C_N: float = 0.0
    alpha: float = 1.0
    max_blocks: int = 10
    attempt_length: Optional[float] = None
    max_iter: int = 10**6

    def __post_init__(self):
        if self.T <= 0 or self.max_blocks < 1:
            raise SchedulerConfigError("T and max_blocks must be positive")
        if self.d0 < 0 or self.R0 < self.d0:
            raise SchedulerConfigError("need 0 <= d0 <= R0")
        if self.aleph is not None and (self.aleph < 0 or self.B < 0 or self.C_N < 0 or self.alpha <= 0):
            raise SchedulerConfigError("energy budget parameters must be nonnegative")
        T1 = self.T1
        if not 0 < T1 <= self.T:
            raise SchedulerConfigError("attempt_length must lie in (0, T]")

    @property
    def T1(self) -> float:
        return self.T if self.attempt_length is None else float(self.attempt_length)

    def budget(self, t, second: bool):
        """Energy budget of the l0 predicate at elapsed time ``t`` since lT."""
        t = np.asarray(t, dtype=float)
        b = self.aleph * (t < self.T) + self.B * t
        if second:
            b = b + self.C_N * (1.0 + t ** self.alpha) * (t <= self.T)
        return b

    def to_dict(self):
        return {k: (None if v is None else (float(v) if isinstance(v, float) else v))
                for k, v in self.__dict__.items()}


# --------------------------------------------------------------------------
# l0 bookkeeping
# --------------------------------------------------------------------------

@dataclass
class L0State:
    """l0(k) for a batch of episodes; ``anchor`` holds the running energy integral at l0 T."""

    k: int
    l0: np.ndarray
    anchor: np.ndarray  # (batch, 2)

    @property
    def coupled(self):
        return self.l0 != INF


@dataclass
class BlockData:
    """Predicate data gathered over block [kT, (k+1)T]."""

    stayed_equal: np.ndarray      # (X, eta) equal on the whole block
    x_equal_end: np.ndarray       # X1 = X2 at (k+1)T
    H_end: np.ndarray             # H(u1) + H(u2) at (k+1)T
    energy_ok: np.ndarray         # energy predicate of the current l0 held over the block
    fresh_ok: np.ndarray          # energy predicate at t = 0 for the new candidate k + 1
    x_differs: Optional[np.ndarray] = None  # measured low-mode difference at block end (consistency)
    anchor_end: Optional[np.ndarray] = None


def l0_update(state: L0State, block: BlockData, d0: float) -> L0State:
    """l0(k+1) from l0(k) and the block data.

    The current l0 survives if the pair stayed equal and within budget; else
    a new coupling starts at k+1 when low modes agree, H_{k+1} <= d0 and the
    energy holds; otherwise l0(k+1) = inf.
    """
    if block.x_differs is not None and np.any(block.stayed_equal & block.x_differs):
        raise ConsistencyError("equality flag set on a pair whose low modes differ")
    if block.x_differs is not None and np.any(block.x_equal_end & block.x_differs):
        raise ConsistencyError("terminal equality flag set on differing low modes")
    keep = state.coupled & block.stayed_equal & block.energy_ok
    fresh = ~keep & block.x_equal_end & (block.H_end <= d0) & block.fresh_ok
    l0 = np.where(keep, state.l0, np.where(fresh, state.k + 1, INF))
    anchor = state.anchor.copy()
    if block.anchor_end is not None:
        anchor[fresh] = block.anchor_end[fresh]
    return L0State(state.k + 1, l0, anchor)


# --------------------------------------------------------------------------
# block constructions
# --------------------------------------------------------------------------

def _lr_binding(model, X, xi, dbeta_from, m_from, m_to):
    d = noise_shift_drift(model, X, m_from, m_to)
    return log_likelihood_ratio(d, dbeta_from, model.dt)


def run_block_coupled(model: LowHighModel, u1, u2, rng, n_steps: int, t0: float = 0.0,
                      max_iter: int = 10**6):
    """Maximal coupling of (X, eta) laws from (x, y1) and (x, y2); low modes must agree.

    Returns ``(path1, path2, coupled)`` with paths of shape (batch, n+1, dim).
    """
    u1 = np.asarray(u1, dtype=model.dtype)
    u2 = np.asarray(u2, dtype=model.dtype)
    x, y1 = model.split(u1)
    x2, y2 = model.split(u2)
    if not np.array_equal(x, x2):
        raise ConsistencyError("coupled branch entered with different low modes")

    def sample1(g, idx):
        dbeta, deta = model.draw_noise(g, len(idx), n_steps)
        X, Y1, m1 = simulate(model, u1[idx], dbeta, deta, t0)
        Y2, m2 = phi(model, X, deta, y2[idx], t0)
        return {"X": X, "eta": deta, "Y1": Y1, "Y2": Y2, "lr": _lr_binding(model, X, deta, dbeta, m1, m2)}

    def sample2(g, idx):
        dbeta, deta = model.draw_noise(g, len(idx), n_steps)
        X, Y2, m2 = simulate(model, u2[idx], dbeta, deta, t0)
        Y1, m1 = phi(model, X, deta, y1[idx], t0)
        db1 = recover_noise(model, X, m1)
        return {"X": X, "eta": deta, "Y1": Y1, "Y2": Y2, "lr": _lr_binding(model, X, deta, db1, m1, m2)}

    B = len(u1)
    z1, z2, coupled = maximal_coupling_sample(sample1, lambda p, i: p["lr"], sample2, rng, size=B,
                                              max_iter=max_iter, max_batch=max(B, 64))
    path1 = model.normalize(model.join(z1["X"], z1["Y1"]))
    path2 = model.normalize(model.join(z2["X"], z2["Y2"]))
    return path1, path2, coupled


def _attempt_energy_ok(model, path1, path2, cfg: SchedulerConfig):
    if cfg.aleph is None:
        return np.ones(path1.shape[0], dtype=bool)
    from ..dynamics.energy import energy_path
    t = model.dt * np.arange(path1.shape[1])
    lim = cfg.aleph + cfg.B * t
    ok1 = np.all(energy_path(model, path1, model.dt) <= lim, axis=1)
    ok2 = np.all(energy_path(model, path2, model.dt) <= lim, axis=1)
    return ok1 & ok2


def run_block_uncoupled(model: LowHighModel, u1, u2, rng, n_steps: int, cfg: SchedulerConfig,
                        t0: float = 0.0):
    """Shared noise on [0, theta], then a shifted maximal-coupling attempt on [theta, T].

    Returns ``(path1, path2, met)`` where ``met`` flags equal low modes at the block end.
    """
    u1 = np.asarray(u1, dtype=model.dtype)
    u2 = np.asarray(u2, dtype=model.dtype)
    B = len(u1)
    n1 = min(max(model.steps_for(cfg.T1), 1), n_steps)
    n0 = n_steps - n1
    if n0:
        dbeta, deta = model.draw_noise(rng, B, n0)
        Xa, Ya, _ = simulate(model, u1, dbeta, deta, t0)
        Xb, Yb, _ = simulate(model, u2, dbeta, deta, t0)
        head1, head2 = model.join(Xa, Ya), model.join(Xb, Yb)
        v1, v2 = head1[:, -1], head2[:, -1]
    else:
        v1, v2 = u1, u2
    ts = t0 + n0 * model.dt
    x1, y1 = model.split(v1)
    x2, y2 = model.split(v2)
    start2 = model.join(model.lift(x1, x2), y2)
    x2l = model.split(start2)[0]
    delta = x2l - x1
    w = (1.0 - np.arange(n1 + 1) / n1)[None, :, None]
    shift = w * delta[:, None, :]

    def make(idx):
        s = shift[idx]

        def to2(X1):
            Z = X1 + s
            Z[:, 0] = x2l[idx]
            return Z

        def to1(X2):
            Z = X2 - s
            Z[:, 0] = x1[idx]
            return Z
        return to2, to1

    def finish(idx, X1, Y1, m1, Z, eta, Y2, m2):
        lr = transition_logdensity(model, Z, m2) - transition_logdensity(model, X1, m1)
        p1, p2 = model.join(X1, Y1), model.join(Z, Y2)
        return {"X1": X1, "Y1": Y1, "X2": Z, "Y2": Y2, "eta": eta, "lr": lr,
                "ok": _attempt_energy_ok(model, p1, p2, cfg)}

    def sample1(g, idx):
        to2, _ = make(idx)
        dbeta, deta = model.draw_noise(g, len(idx), n1)
        X1, Y1, m1 = simulate(model, v1[idx], dbeta, deta, ts)
        Z = to2(X1)
        Y2, m2 = phi(model, Z, deta, y2[idx], ts)
        return finish(idx, X1, Y1, m1, Z, deta, Y2, m2)

    def sample2(g, idx):
        _, to1 = make(idx)
        dbeta, deta = model.draw_noise(g, len(idx), n1)
        X2, Y2, m2 = simulate(model, start2[idx], dbeta, deta, ts)
        X1 = to1(X2)
        Y1, m1 = phi(model, X1, deta, y1[idx], ts)
        return finish(idx, X1, Y1, m1, X2, deta, Y2, m2)

    z1, z2, coupled = maximal_coupling_sample(sample1, lambda p, i: p["lr"], sample2, rng, size=B,
                                              region=lambda p, i: p["ok"], max_iter=cfg.max_iter,
                                              max_batch=max(B, 64))
    tail1 = model.join(z1["X1"], z1["Y1"])
    tail2 = model.join(z2["X2"], z2["Y2"])
    if n0:
        path1 = np.concatenate([head1, tail1[:, 1:]], axis=1)
        path2 = np.concatenate([head2, tail2[:, 1:]], axis=1)
    else:
        path1, path2 = tail1, tail2
    path1 = model.normalize(path1)
    path2 = model.normalize(path2)
    met = np.all(model.split(path1[:, -1])[0] == model.split(path2[:, -1])[0], axis=-1)
    return path1, path2, met


def run_block_identical(model: LowHighModel, u, rng, n_steps: int, t0: float = 0.0):
    dbeta, deta = model.draw_noise(rng, len(u), n_steps)
    X, Y, _ = simulate(model, np.asarray(u, dtype=model.dtype), dbeta, deta, t0)
    return model.normalize(model.join(X, Y))

"""Verification batteries: exact measure identities and Girsanov consistency per model."""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from .. import measures as ms
from ..dynamics.base import (LowHighModel, log_likelihood_ratio, noise_shift_drift, phi, simulate,
                             transition_logdensity)
from ..dynamics.torus import TorusModel, girsanov_drift_torus
from ..rng import stream
from .checks import Report
from .stats import mean_se, wilson

TOL = 1e-12


def random_pair(rng, max_support: int = 64, sparsity: float = 0.3):
    """Two random probability measures on a common label set, with some zero weights."""
    n = int(rng.integers(1, max_support + 1))
    labels = tuple(range(n))
    out = []
    for _ in range(2):
        w = rng.exponential(size=n) * (rng.random(n) > sparsity * rng.random())
        if w.sum() == 0:
            w[rng.integers(n)] = 1.0
        out.append(ms.FiniteMeasure(labels, w / w.sum()))
    return out


def _subsets(n, rng, n_random=64):
    if n <= 16:
        for r in range(n + 1):
            yield from itertools.combinations(range(n), r)
    else:
        for _ in range(n_random):
            yield tuple(np.flatnonzero(rng.random(n) < 0.5))


def measure_battery(seed: int, n_instances: int = 1000, max_support: int = 64,
                    exhaustive_subsets: bool = False) -> Report:
    """Exact identities of the maximal and pushforward couplings on random instances.

    Per-subset checks are vectorised: diag(joint) - meet must vanish
    pointwise, which implies the identity for every subset; a sample of
    subsets (all of them when ``exhaustive_subsets`` and support <= 16) is
    also summed explicitly.
    """
    rng = stream(seed, 20)
    err = {"p_equal": 0.0, "gamma_meet": 0.0, "pushforward": 0.0, "marginals": 0.0, "beats_maximal": 0.0}
    for _ in range(n_instances):
        mu1, mu2 = random_pair(rng, max_support)
        tv = ms.tv_distance(mu1, mu2)
        mc = ms.maximal_coupling_exact(mu1, mu2)
        err["p_equal"] = max(err["p_equal"], abs(mc.prob_equal() - (1 - tv)))
        diag = np.diag(mc.joint)
        meet = ms.meet(mu1, mu2).on(mc.row_support)
        n = len(diag)
        err["gamma_meet"] = max(err["gamma_meet"], float(np.max(np.abs(diag - meet))))
        subsets = _subsets(n, rng) if exhaustive_subsets else (tuple(np.flatnonzero(rng.random(n) < 0.5))
                                                              for _ in range(8))
        for g in subsets:
            g = list(g)
            err["gamma_meet"] = max(err["gamma_meet"], abs(diag[g].sum() - meet[g].sum()))
        err["marginals"] = max(err["marginals"], float(np.max(np.abs(mc.joint.sum(1) - mu1.on(mc.row_support)))),
                               float(np.max(np.abs(mc.joint.sum(0) - mu2.on(mc.col_support)))))
        k = int(rng.integers(1, max(n // 2, 1) + 1))
        buckets = rng.integers(0, k, size=n)
        f0 = lambda x, b=buckets: int(b[x])
        pc = ms.pushforward_coupling(mu1, mu2, f0)
        ref = ms.maximal_coupling_exact(ms.pushforward(mu1, f0), ms.pushforward(mu2, f0))
        J = _image_joint(pc, buckets, ref)
        err["pushforward"] = max(err["pushforward"], float(np.max(np.abs(J - ref.joint))))
        err["marginals"] = max(err["marginals"], float(np.max(np.abs(pc.joint.sum(1) - mu1.on(pc.row_support)))),
                               float(np.max(np.abs(pc.joint.sum(0) - mu2.on(pc.col_support)))))
        rc = ms.random_transport_coupling(mu1, mu2, rng)
        err["beats_maximal"] = max(err["beats_maximal"], rc.prob_equal() - (1 - tv))
    passed = all(v <= TOL for v in err.values())
    return Report("measure_core", passed, err, None, {}, {"instances": n_instances, "tolerance": TOL})


def _image_joint(cm, buckets, ref):
    """Law of (f0(Z1), f0(Z2)) as a matrix indexed like ``ref`` (f0 = bucket lookup)."""
    pos = {y: i for i, y in enumerate(ref.row_support)}
    Pr = np.zeros((len(cm.row_support), len(pos)))
    Pr[np.arange(len(cm.row_support)), [pos[int(buckets[x])] for x in cm.row_support]] = 1.0
    Pc = np.zeros((len(cm.col_support), len(pos)))
    Pc[np.arange(len(cm.col_support)), [pos[int(buckets[x])] for x in cm.col_support]] = 1.0
    return Pr.T @ cm.joint @ Pc


def meet_bound_battery(seed: int, n_instances: int = 1000, max_support: int = 64) -> Report:
    """coupling_meet_lower_bound never exceeds the brute-force meet mass on A."""
    rng = stream(seed, 21)
    violations, worst, checked = 0, -np.inf, 0
    for _ in range(n_instances):
        mu1, mu2 = random_pair(rng, max_support, sparsity=0.0)
        n = len(mu1)
        A = [x for x in range(n) if rng.random() < 0.6 and mu1[x] > 0 and mu2[x] > 0]
        p = 1.0 + rng.exponential(1.0) + 1e-6
        C = ms.density_ratio_moment(mu1, mu2, A, p)
        # the statement needs C > 1; any admissible C' >= max(C, 1+) gives a valid bound
        C = max(C, 1.0 + 1e-12)
        bound = ms.coupling_meet_lower_bound(p, C, min(mu1.measure_of(A), 1.0))
        actual = ms.meet(mu1, mu2).measure_of(A)
        checked += 1
        worst = max(worst, bound - actual)
        if bound > actual + TOL:
            violations += 1
    return Report("meet_lower_bound", violations == 0, violations, None, {"worst_margin": worst},
                  {"instances": checked})


# --------------------------------------------------------------------------
# Girsanov consistency
# --------------------------------------------------------------------------

def _binding_pair(model: LowHighModel, rng, B, n, u1, u2):
    """Paths of law 1 with both density evaluations of dP2/dP1 (Gaussian kernels and Girsanov)."""
    dbeta, deta = model.draw_noise(rng, B, n)
    X, Y1, m1 = simulate(model, u1, dbeta, deta)
    Y2, m2 = phi(model, X, deta, model.split(u2)[1])
    lr_kernel = transition_logdensity(model, X, m2) - transition_logdensity(model, X, m1)
    lr_girsanov = log_likelihood_ratio(noise_shift_drift(model, X, m1, m2), dbeta, model.dt)
    return X, lr_kernel, lr_girsanov


def _torus_pair(model: TorusModel, rng, B, n, x1, x2, T):
    dW = np.sqrt(model.dt) * rng.standard_normal((B, n))
    X1 = np.empty((B, n + 1))
    X1[:, 0] = x1
    for j in range(n):
        X1[:, j + 1] = X1[:, j] - model.f(X1[:, j]) * model.dt + dW[:, j]
    delta = model.low_delta(x1, x2)
    Z = X1 + (1 - np.arange(n + 1) / n) * delta
    Z[:, 0] = x1 + delta
    d = girsanov_drift_torus(model, T, x1, x2, Z)
    lr_girsanov = log_likelihood_ratio(d[..., None], dW[..., None], model.dt)
    lr_kernel = (transition_logdensity(model, Z[..., None], (Z[:, :-1] - model.f(Z[:, :-1]) * model.dt)[..., None])
                 - transition_logdensity(model, X1[..., None], (X1[:, :-1] - model.f(X1[:, :-1]) * model.dt)[..., None]))
    return Z[..., None], lr_kernel, lr_girsanov


def girsanov_battery(model: LowHighModel, u1, u2, seed: int, *, n_steps: int | None = None,
                     n_paths: int = 10_000, n_exact: int = 100, chunk: int = 2000) -> Report:
    """Density ratio of Gaussian kernels equals exp(LLR) to 1e-10; importance-sampling identity.

    For the torus the two laws are the line-shifted X(., x1) and X(., x2); for
    the other models the laws of (X, eta) started from (x, y1) and (x, y2),
    with u2's low modes replaced by u1's.  The event is {Re X_0(T) > c} with
    c the median of X_0(T) under the second law (estimated on a pilot run).
    """
    n = model.n_steps if n_steps is None else n_steps
    T = n * model.dt
    rng = stream(seed, 22)
    u1 = np.asarray(u1, dtype=model.dtype)
    u2 = np.asarray(u2, dtype=model.dtype)
    torus = isinstance(model, TorusModel)
    if not torus:
        u2 = model.join(model.split(u1)[0], model.split(u2)[1])

    def law1(B):
        if torus:
            return _torus_pair(model, rng, B, n, float(u1[0]), float(u2[0]), T)
        return _binding_pair(model, rng, B, n, np.broadcast_to(u1, (B, len(u1))).copy(),
                             np.broadcast_to(u2, (B, len(u2))).copy())

    def law2(B):
        if torus:
            x2 = float(model.lift(u1[0], u2[0]))
            dW = np.sqrt(model.dt) * rng.standard_normal((B, n))
            X = np.empty((B, n + 1))
            X[:, 0] = x2
            for j in range(n):
                X[:, j + 1] = X[:, j] - model.f(X[:, j]) * model.dt + dW[:, j]
            return X[..., None]
        dbeta, deta = model.draw_noise(rng, B, n)
        X, _, _ = simulate(model, np.broadcast_to(u2, (B, len(u2))).copy(), dbeta, deta)
        return X

    def stat(X):
        v = X[:, -1, 0]
        return v.real if np.iscomplexobj(v) else v

    # exact agreement of the two density evaluations
    _, lk, lg = law1(n_exact)
    rel = float(np.max(np.abs(np.exp(lk) - np.exp(lg)) / np.maximum(np.exp(lk), 1e-300)))
    abs_log = float(np.max(np.abs(lk - lg)))

    c = float(np.median(stat(law2(2000))))
    w_g, g2 = [], []
    for s in range(0, n_paths, chunk):
        B = min(chunk, n_paths - s)
        X1, lk, _ = law1(B)
        w_g.append(np.exp(lk) * (stat(X1) > c))
        g2.append((stat(law2(B)) > c).astype(float))
    m1, se1 = mean_se(np.concatenate(w_g))
    m2, se2 = mean_se(np.concatenate(g2))
    z = abs(m1 - m2) / np.sqrt(se1 ** 2 + se2 ** 2)
    passed = rel <= 1e-10 and z <= 3.0
    return Report("girsanov", passed, {"weighted": m1, "direct": m2}, [se1, se2],
                  {"z_score": float(z)}, {"max_rel_density_error": rel, "max_abs_log_error": abs_log,
                                          "paths": n_paths, "steps": n, "threshold": c})


# --------------------------------------------------------------------------
# torus block coupling against its closed form
# --------------------------------------------------------------------------

def torus_block_oracle(delta: float, T: float) -> float:
    """Success probability of the shifted coupling for f = 0: 2 (1 - Phi(|delta| / (2 sqrt T)))."""
    from scipy.stats import norm
    return float(2.0 * norm.sf(abs(delta) / (2.0 * np.sqrt(T))))


def torus_block_battery(model: TorusModel, x1: float, x2: float, seed: int, *, n_episodes: int = 10_000,
                        T: Optional[float] = None) -> Report:
    """Empirical success rate of one shifted coupling block vs the closed form (f = 0 only)."""
    from ..coupling.episodes import shifted_coupling_block_torus
    T = model.T if T is None else T
    delta = float(model.low_delta(np.float64(x1), np.float64(x2)))
    _, _, met = shifted_coupling_block_torus(model, x1, x2, T, stream(seed, 23), size=n_episodes)
    p_hat = float(met.mean())
    se = float(np.sqrt(max(p_hat * (1 - p_hat), 1e-300) / n_episodes))
    oracle = torus_block_oracle(delta, T)
    z = abs(p_hat - oracle) / se
    return Report("torus_block", bool(z <= 3.0), p_hat, list(wilson(int(met.sum()), n_episodes)),
                  {"oracle": oracle, "z_score": z}, {"delta": delta, "T": T, "episodes": n_episodes})

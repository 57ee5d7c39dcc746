"""Algorithmic maximal coupling of two path laws given a density-ratio oracle.

The scheme is the classical rejection construction: draw ``Z1 ~ mu1`` and
keep it for both components with probability ``min(1, dmu2/dmu1(Z1))``;
otherwise draw ``Z2 ~ mu2`` repeatedly and keep the first draw accepted with
probability ``1 - min(1, dmu1/dmu2(Z2))``.  Both marginals are exact and
``P(Z1 = Z2)`` equals the meet mass.

Samplers work on batches.  ``sample(rng, idx)`` returns a dict of arrays
whose leading axis runs over ``idx`` (the indices of the problems being
sampled, so per-problem data such as initial conditions can be looked up),
``log_ratio(paths, idx)`` returns ``log(dmu2/dmu1)`` at those paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Paths = dict


class CouplingFailure(RuntimeError):
    """The residual rejection loop exceeded its iteration cap."""


@dataclass(frozen=True)
class DensityRatioOracle:
    """Log density ratio between two path laws.

    ``reference`` names the measure the evaluator is taken against: with
    ``reference=1`` the evaluator returns ``log(dmu2/dmu1)``, with
    ``reference=2`` it returns ``log(dmu1/dmu2)``.
    """

    evaluator: Callable[[Paths, np.ndarray], np.ndarray]
    reference: int = 1

    def log_mu2_over_mu1(self, paths: Paths, idx: np.ndarray) -> np.ndarray:
        out = np.asarray(self.evaluator(paths, idx), dtype=float)
        return out if self.reference == 1 else -out


def take(paths: Paths, sel) -> Paths:
    return {k: v[sel] for k, v in paths.items()}


def put(dst: Paths, sel, src: Paths) -> None:
    for k, v in src.items():
        dst[k][sel] = v


def concat(parts) -> Paths:
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _accept_prob(log_ratio: np.ndarray) -> np.ndarray:
    # min(1, exp(x)) with exp(+inf) and nan guarded
    return np.exp(np.minimum(np.nan_to_num(log_ratio, nan=-np.inf), 0.0))


def maximal_coupling_sample(sample1, ratio, sample2, rng: np.random.Generator, *,
                            size: Optional[int] = None, region=None,
                            max_iter: int = 10**6, max_batch: int = 4096):
    """Sample ``(z1, z2, coupled)`` from a maximal coupling of two path laws.

    ``ratio`` is a :class:`DensityRatioOracle` or a bare callable returning
    ``log(dmu2/dmu1)``.  ``region(paths, idx)``, when given, restricts the
    shared part to an event ``A``: the diagonal then carries the meet of
    ``mu1`` and ``mu2`` restricted to ``A`` and the marginals stay exact.

    With ``size=None`` a single draw is returned with the batch axis
    dropped and ``coupled`` a plain bool.
    """
    oracle = ratio if isinstance(ratio, DensityRatioOracle) else DensityRatioOracle(ratio)
    single = size is None
    n = 1 if single else int(size)
    idx = np.arange(n)

    z1 = sample1(rng, idx)
    lr = oracle.log_mu2_over_mu1(z1, idx)
    alpha = _accept_prob(lr)
    if region is not None:
        alpha = np.where(region(z1, idx), alpha, 0.0)
    coupled = rng.random(n) <= alpha
    # exact zero-probability events must never be accepted
    coupled &= alpha > 0.0

    z2 = {k: v.copy() for k, v in z1.items()}
    todo = idx[~coupled]
    draws = 0
    k = 1
    while todo.size:
        if draws >= max_iter:
            raise CouplingFailure(f"residual sampler exceeded {max_iter} draws for {todo.size} problems")
        k = int(min(k, max(1, max_batch // todo.size), max_iter - draws))
        rep = np.repeat(todo, k)
        cand = sample2(rng, rep)
        lr2 = oracle.log_mu2_over_mu1(cand, rep)
        keep_shared = _accept_prob(-lr2)
        if region is not None:
            keep_shared = np.where(region(cand, rep), keep_shared, 0.0)
        ok = rng.random(rep.size) > keep_shared
        ok = ok.reshape(todo.size, k)
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        rows = np.flatnonzero(hit)
        if rows.size:
            put(z2, todo[rows], take(cand, rows * k + first[rows]))
        draws += k
        todo = todo[~hit]
        k *= 2

    if single:
        return take(z1, 0), take(z2, 0), bool(coupled[0])
    return z1, z2, coupled

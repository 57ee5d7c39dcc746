"""Exact measure algebra and couplings on finite spaces.

Measures are stored as an ordered tuple of hashable labels plus a weight
vector.  Binary operations take the union of the two supports (first
measure's order, then new labels of the second) and treat missing labels
as zero mass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

MASS_TOL = 1e-12
NORMALIZE_TOL = 1e-9


class InvalidMeasureError(ValueError):
    """Raised for negative weights, duplicate labels or non-unit mass."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMeasure:
    support: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        support = tuple(self.support)
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1 or w.shape[0] != len(support):
            raise InvalidMeasureError("weights must be a vector matching the support")
        if len(set(support)) != len(support):
            raise InvalidMeasureError("support labels must be distinct")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidMeasureError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self):
        return len(self.support)

    def __getitem__(self, label) -> float:
        try:
            return float(self.weights[self.support.index(label)])
        except ValueError:
            return 0.0

    def measure_of(self, labels: Iterable[Hashable]) -> float:
        return float(sum(self[x] for x in set(labels)))

    def on(self, support: Sequence[Hashable]) -> np.ndarray:
        """Weights re-indexed on ``support`` (zero where absent)."""
        index = {x: i for i, x in enumerate(self.support)}
        return np.array([self.weights[index[x]] if x in index else 0.0 for x in support])

    def is_probability(self, tol: float = MASS_TOL) -> bool:
        return abs(self.mass - 1.0) <= tol

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.support), "weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FiniteMeasure":
        obj = json.loads(text)
        return cls(tuple(_hashable(x) for x in obj["labels"]), obj["weights"])


def _hashable(x):
    return tuple(_hashable(v) for v in x) if isinstance(x, list) else x


def probability(support: Sequence[Hashable], weights) -> FiniteMeasure:
    """Build a probability measure, renormalising if the mass is within 1e-9 of one."""
    mu = FiniteMeasure(tuple(support), weights)
    return as_probability(mu)


def as_probability(mu: FiniteMeasure) -> FiniteMeasure:
    m = mu.mass
    if abs(m - 1.0) > NORMALIZE_TOL:
        raise InvalidMeasureError(f"total mass {m!r} is not 1")
    if m == 1.0:
        return mu
    return FiniteMeasure(mu.support, mu.weights / m)


def _union(mu1: FiniteMeasure, mu2: FiniteMeasure):
    seen = set(mu1.support)
    support = mu1.support + tuple(x for x in mu2.support if x not in seen)
    return support, mu1.on(support), mu2.on(support)


def _aligned_probabilities(mu1, mu2):
    return _union(as_probability(mu1), as_probability(mu2))


def tv_distance(mu1: FiniteMeasure, mu2: FiniteMeasure) -> float:
    _, p, q = _aligned_probabilities(mu1, mu2)
    return float(min(1.0, 0.5 * np.sum(np.abs(p - q))))


def meet(mu1: FiniteMeasure, mu2: FiniteMeasure) -> FiniteMeasure:
    support, p, q = _aligned_probabilities(mu1, mu2)
    return FiniteMeasure(support, np.minimum(p, q))


def pos_part(mu1: FiniteMeasure, mu2: FiniteMeasure) -> FiniteMeasure:
    support, p, q = _aligned_probabilities(mu1, mu2)
    return FiniteMeasure(support, np.maximum(p - q, 0.0))


@dataclass(frozen=True)
class CouplingMatrix:
    row_support: tuple
    col_support: tuple
    joint: np.ndarray = field(repr=False)

    def __post_init__(self):
        j = np.asarray(self.joint, dtype=float).copy()
        if j.shape != (len(self.row_support), len(self.col_support)):
            raise InvalidMeasureError("joint shape does not match supports")
        if np.any(j < 0) or not np.all(np.isfinite(j)):
            raise InvalidMeasureError("joint must be finite and nonnegative")
        j.setflags(write=False)
        object.__setattr__(self, "row_support", tuple(self.row_support))
        object.__setattr__(self, "col_support", tuple(self.col_support))
        object.__setattr__(self, "joint", j)

    def first_marginal(self) -> FiniteMeasure:
        return FiniteMeasure(self.row_support, self.joint.sum(axis=1))

    def second_marginal(self) -> FiniteMeasure:
        return FiniteMeasure(self.col_support, self.joint.sum(axis=0))

    def diagonal(self) -> FiniteMeasure:
        """Mass of {Z1 = Z2 = x} for each x, as a measure on the row support."""
        cols = {x: j for j, x in enumerate(self.col_support)}
        w = [self.joint[i, cols[x]] if x in cols else 0.0 for i, x in enumerate(self.row_support)]
        return FiniteMeasure(self.row_support, w)

    def prob_equal(self) -> float:
        return self.diagonal().mass

    def check_marginals(self, mu1: FiniteMeasure, mu2: FiniteMeasure, tol: float = MASS_TOL) -> bool:
        a = np.max(np.abs(self.joint.sum(axis=1) - mu1.on(self.row_support)), initial=0.0)
        b = np.max(np.abs(self.joint.sum(axis=0) - mu2.on(self.col_support)), initial=0.0)
        return a <= tol and b <= tol

    def pushforward(self, f0: Callable[[Hashable], Hashable]) -> "CouplingMatrix":
        """Law of (f0(Z1), f0(Z2)) on the image labels."""
        rows = _image_support(self.row_support, f0)
        cols = _image_support(self.col_support, f0)
        ri = {y: i for i, y in enumerate(rows)}
        ci = {y: j for j, y in enumerate(cols)}
        out = np.zeros((len(rows), len(cols)))
        for i, x in enumerate(self.row_support):
            for j, z in enumerate(self.col_support):
                out[ri[f0(x)], ci[f0(z)]] += self.joint[i, j]
        return CouplingMatrix(rows, cols, out)

    def to_json(self) -> str:
        return json.dumps({
            "rows": list(self.row_support),
            "cols": list(self.col_support),
            "joint": self.joint.ravel().tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "CouplingMatrix":
        obj = json.loads(text)
        rows = tuple(_hashable(x) for x in obj["rows"])
        cols = tuple(_hashable(x) for x in obj["cols"])
        joint = np.asarray(obj["joint"], dtype=float).reshape(len(rows), len(cols))
        return cls(rows, cols, joint)


def _image_support(support, f0):
    out = []
    seen = set()
    for x in support:
        y = f0(x)
        if y not in seen:
            seen.add(y)
            out.append(y)
    return tuple(out)


def maximal_coupling_exact(mu1: FiniteMeasure, mu2: FiniteMeasure) -> CouplingMatrix:
    """Maximal coupling: diagonal meet plus the normalised product of the excesses."""
    support, p, q = _aligned_probabilities(mu1, mu2)
    joint = np.diag(np.minimum(p, q))
    excess1 = np.maximum(p - q, 0.0)
    excess2 = np.maximum(q - p, 0.0)
    tv = excess1.sum()
    if tv > 0.0:
        joint = joint + np.outer(excess1, excess2) / tv
    return CouplingMatrix(support, support, joint)


def coupling_meet_lower_bound(p: float, C: float, massA: float) -> float:
    """Lower bound on (mu1 ^ mu2)(A) given the (p+1)-moment bound C of the density ratio on A."""
    if not p > 1.0:
        raise DomainError("p must be > 1")
    if not C > 1.0:
        raise DomainError("C must be > 1")
    if not 0.0 <= massA <= 1.0:
        raise DomainError("massA must lie in [0, 1]")
    if massA == 0.0:
        return 0.0
    return (1.0 - 1.0 / p) * (massA**p / (p * C)) ** (1.0 / (p - 1.0))


def density_ratio_moment(mu1: FiniteMeasure, mu2: FiniteMeasure, A: Iterable[Hashable], p: float) -> float:
    """Exact value of the integral over A of (d mu1^A / d mu2^A)^(p+1) d mu2."""
    A = set(A)
    total = 0.0
    for x in A:
        a, b = mu1[x], mu2[x]
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0 or b == 0.0:
            raise DomainError("restricted measures must be equivalent on A")
        total += (a / b) ** (p + 1.0) * b
    return total


def pushforward(mu: FiniteMeasure, f0: Callable[[Hashable], Hashable]) -> FiniteMeasure:
    image = _image_support(mu.support, f0)
    idx = {y: i for i, y in enumerate(image)}
    w = np.zeros(len(image))
    for x, m in zip(mu.support, mu.weights):
        w[idx[f0(x)]] += m
    return FiniteMeasure(image, w)


def pushforward_coupling(mu1: FiniteMeasure, mu2: FiniteMeasure,
                         f0: Callable[[Hashable], Hashable]) -> CouplingMatrix:
    """Coupling of (mu1, mu2) whose image under (f0, f0) is maximal.

    Built as ``s + r``: ``s`` glues the conditional laws given f0 = y along
    the meet of the image laws, ``r`` is the normalised product of the
    conditioned excess parts.
    """
    support, p, q = _aligned_probabilities(mu1, mu2)
    labels = [f0(x) for x in support]
    image = _image_support(support, f0)
    iidx = {y: i for i, y in enumerate(image)}
    yi = np.array([iidx[y] for y in labels], dtype=int)
    nu1 = np.bincount(yi, weights=p, minlength=len(image))
    nu2 = np.bincount(yi, weights=q, minlength=len(image))
    # conditional laws given the image point; zero where the image point has no mass
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.where(nu1[yi] > 0, p / nu1[yi], 0.0)
        c2 = np.where(nu2[yi] > 0, q / nu2[yi], 0.0)
    same = yi[:, None] == yi[None, :]
    nu_meet = np.minimum(nu1, nu2)
    s = np.where(same, np.outer(c1, c2) * nu_meet[yi][:, None], 0.0)
    joint = s
    tv = np.maximum(nu1 - nu2, 0.0).sum()
    if tv > 0.0:
        r1 = c1 * np.maximum(nu1 - nu2, 0.0)[yi]
        r2 = c2 * np.maximum(nu2 - nu1, 0.0)[yi]
        joint = joint + np.outer(r1, r2) / tv
    return CouplingMatrix(support, support, joint)


def random_transport_coupling(mu1: FiniteMeasure, mu2: FiniteMeasure,
                              rng: np.random.Generator) -> CouplingMatrix:
    """A random coupling with the given marginals (northwest-corner fill on shuffled orders)."""
    support, p, q = _aligned_probabilities(mu1, mu2)
    n = len(support)
    rows = rng.permutation(n)
    cols = rng.permutation(n)
    joint = np.zeros((n, n))
    a = p[rows].copy()
    b = q[cols].copy()
    i = j = 0
    while i < n and j < n:
        m = min(a[i], b[j])
        joint[rows[i], cols[j]] += m
        a[i] -= m
        b[j] -= m
        if a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return CouplingMatrix(support, support, joint)

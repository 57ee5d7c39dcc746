"""Drifts that bind two path laws sharing a low-mode path, and the high-mode map Phi."""

from __future__ import annotations

import numpy as np

from .base import LowHighModel, ModelContractError, noise_shift_drift, phi


def phi_reconstruct(model: LowHighModel, Xpath, eta_path, u0, t0: float = 0.0):
    """High-mode path driven by a low-mode path and high-mode increments, from Q_N u0."""
    Xpath = np.asarray(Xpath, dtype=model.dtype)
    eta_path = np.asarray(eta_path, dtype=model.dtype)
    squeeze = Xpath.ndim == 2
    if squeeze:
        Xpath, eta_path = Xpath[None], eta_path[None]
    u0 = np.atleast_2d(np.asarray(u0, dtype=model.dtype))
    _, y0 = model.split(u0)
    Y, _ = phi(model, Xpath, eta_path, y0, t0)
    return Y[0] if squeeze else Y


def girsanov_drift_binding(model: LowHighModel, Zpath, xi, u1_0, u2_0, cutoff=None):
    """Drift of the low-mode noise when the high modes start from y2 instead of y1.

    Along the shared low path ``Z`` and high noise ``xi``, the low-mode means
    of the two reconstructed solutions differ; the returned ``d`` satisfies
    ``log(dP2/dP1)(Z, xi) = log_likelihood_ratio(d, dbeta1)`` where ``dbeta1``
    are the increments driving ``Z`` under the first law.  ``cutoff`` (grid
    index per batch row) zeroes the drift from that step on.
    """
    Z = np.asarray(Zpath, dtype=model.dtype)
    xi = np.asarray(xi, dtype=model.dtype)
    squeeze = Z.ndim == 2
    if squeeze:
        Z, xi = Z[None], xi[None]
    y1 = model.split(np.atleast_2d(np.asarray(u1_0, dtype=model.dtype)))[1]
    y2 = model.split(np.atleast_2d(np.asarray(u2_0, dtype=model.dtype)))[1]
    _, m1 = phi(model, Z, xi, y1)
    _, m2 = phi(model, Z, xi, y2)
    sig = getattr(model, "sigma0", None)
    if sig is not None and sig <= 0:
        raise ModelContractError("low-mode noise is singular")
    d = noise_shift_drift(model, Z, m1, m2)
    if not np.all(np.isfinite(d)):
        raise ModelContractError("low-mode noise is singular along the path")
    if cutoff is not None:
        steps = np.arange(d.shape[1])
        cut = np.broadcast_to(np.asarray(cutoff), (d.shape[0],))
        d = np.where((steps[None, :] >= cut[:, None])[..., None], 0.0, d)
    return d[0] if squeeze else d

"""Model construction from JSON-style config dictionaries, and trajectory CSV export."""

from __future__ import annotations

import csv
import io

import numpy as np

from .base import LowHighModel, ModelContractError
from .cgl import CglModel, NoiseOperator
from .lowhigh import LowHighToyModel, ToyCoefficients
from .torus import SineDrift, TorusModel, ZeroDrift


class ConfigError(ValueError):
    """A config document is malformed or names something unknown."""


_COMMON = {"model", "dt", "T", "seed"}
_ALLOWED = {
    "torus": _COMMON | {"drift"},
    "lowhigh": _COMMON | {"coeffs", "sigma0", "K0"},
    "cgl": _COMMON | {"eps", "eta", "lambda", "sigma", "M", "N", "N1", "noise", "case", "grid_size", "nonlinear"},
}

PRESETS = {
    "torus": {"model": "torus", "dt": 1e-3, "T": 1.0, "drift": {"kind": "zero"}},
    "lowhigh": {"model": "lowhigh", "dt": 1e-3, "T": 1.0},
    "cgl": {"model": "cgl", "eps": 0.5, "eta": 0.5, "lambda": 1, "sigma": 1.0, "M": 16, "N": 8, "N1": 4,
            "dt": 1e-3, "T": 1.0, "case": "L2", "noise": {"low_scale": 1.0, "perturb": 0.1, "high_scale": 0.5}},
}


def _drift(cfg):
    cfg = dict(cfg or {"kind": "zero"})
    kind = cfg.pop("kind", "zero")
    if kind == "zero":
        return ZeroDrift()
    if kind == "sine":
        return SineDrift(**cfg)
    raise ConfigError(f"unknown torus drift kind {kind!r}")


def build_model(cfg: dict) -> LowHighModel:
    """Construct a model; unknown keys and invalid parameters raise ConfigError."""
    if not isinstance(cfg, dict) or "model" not in cfg:
        raise ConfigError("model config must be an object with a 'model' key")
    name = cfg["model"]
    if name not in _ALLOWED:
        raise ConfigError(f"unknown model {name!r}")
    extra = set(cfg) - _ALLOWED[name]
    if extra:
        raise ConfigError(f"unknown keys for model {name!r}: {sorted(extra)}")
    dt, T = cfg.get("dt", 1e-3), cfg.get("T", 1.0)
    try:
        if name == "torus":
            return TorusModel(_drift(cfg.get("drift")), dt=dt, T=T)
        if name == "lowhigh":
            coeffs = ToyCoefficients(**cfg.get("coeffs", {}))
            return LowHighToyModel(coeffs, cfg.get("sigma0"), cfg.get("K0"), dt=dt, T=T)
        M, N, N1 = cfg.get("M", 16), cfg.get("N", 8), cfg.get("N1", 4)
        noise = NoiseOperator(N, N1, M, **cfg.get("noise", {}))
        return CglModel(eps=cfg.get("eps", 0.5), eta=cfg.get("eta", 0.5), lam=cfg.get("lambda", 1),
                        sigma=cfg.get("sigma", 1.0), M=M, N=N, N1=N1, noise=noise, dt=dt, T=T,
                        case=cfg.get("case", "L2"), grid_size=cfg.get("grid_size"),
                        nonlinear=cfg.get("nonlinear", True))
    except (ModelContractError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def state_columns(model: LowHighModel, K: int = 8):
    if np.iscomplexobj(np.zeros(0, model.dtype)):
        k = min(K, model.low_dim + model.high_dim)
        return [f"abs_a{j + 1}" for j in range(k)]
    dim = model.low_dim + model.high_dim
    return ["x"] if dim == 1 else ["x", "y"][:dim] if dim <= 2 else [f"u{j}" for j in range(dim)]


def trajectory_csv(model: LowHighModel, times, states, energy, K: int = 8) -> str:
    """CSV text with columns time, state components (or first K moduli), energy."""
    cols = state_columns(model, K)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", *cols, "energy"])
    states = np.asarray(states)
    vals = np.abs(states[:, : len(cols)]) if np.iscomplexobj(states) else states[:, : len(cols)]
    for t, row, e in zip(times, vals, energy):
        w.writerow([repr(float(t)), *(repr(float(v)) for v in row), repr(float(e))])
    return buf.getvalue()

"""Batch runner: ``couplab {simulate,couple,verify,report}``.

One JSON document configures a run::

    {"name": "torus-demo", "seed": 7,
     "model": {"model": "torus", "dt": 0.001, "T": 1.0},
     "scheduler": {"T": 1.0, "max_blocks": 20},
     "initial": {"u1": [0.1], "u2": [0.6]},
     "simulate": {"nsamples": 4, "horizon": 2.0, "stride": 100},
     "couple": {"episodes": 1000},
     "verify": {"checks": [{"name": "measure"}, {"name": "torus_block", "episodes": 2000}]}}

Complex components of initial states are written ``[re, im]``; states
shorter than the model dimension are padded with zeros.  Flags override
the document; ``COUPLAB_OUT`` overrides the output directory when
``--out`` is absent.  Exit codes: 0 ok, 2 config, 3 blow-up, 4 IO.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .coupling.engine import SchedulerConfig, SchedulerConfigError
from .coupling.episodes import (EpisodeResult, _episode_unit, block_probabilities, default_unit_size)
from .dynamics.base import BlowUpError, ModelContractError, simulate
from .dynamics.config import PRESETS, ConfigError, build_model, state_columns
from .dynamics.torus import TorusModel
from .estimators import batteries, checks, curves
from .estimators.checks import _jsonable
from .rng import iter_units

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO, EXIT_INTERRUPT = 0, 2, 3, 4, 130
U64 = 2**64

_TOP_KEYS = {"name", "seed", "workers", "out", "model", "scheduler", "initial", "simulate", "couple", "verify"}

DEFAULT_INITIAL = {
    "torus": ([0.1], [0.6]),
    "lowhigh": ([1.0, 1.0], [-1.0, -1.0]),
    "cgl": ([[1.0, 0.0]], [[-1.0, 0.0]]),
}


class IOFailure(RuntimeError):
    pass


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    return doc


def parse_seed(value) -> int:
    if value is None:
        raise ConfigError("a seed is required (config 'seed' or --seed)")
    try:
        seed = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}") from exc
    if isinstance(value, float) or not 0 <= seed < U64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return seed


def _model_cfg(doc):
    cfg = doc.get("model")
    if isinstance(cfg, str):
        if cfg not in PRESETS:
            raise ConfigError(f"unknown model preset {cfg!r}")
        return dict(PRESETS[cfg])
    if not isinstance(cfg, dict):
        raise ConfigError("'model' must be a preset name or an object")
    return cfg


def parse_state(value, model, name):
    dim = model.low_dim + model.high_dim
    if not isinstance(value, list):
        raise ConfigError(f"initial state {name} must be a list")
    cplx = np.iscomplexobj(np.zeros(0, model.dtype))
    out = np.zeros(dim, dtype=model.dtype)
    if len(value) > dim:
        raise ConfigError(f"initial state {name} has {len(value)} > {dim} components")
    for i, v in enumerate(value):
        if cplx and isinstance(v, list):
            if len(v) != 2:
                raise ConfigError(f"complex component {i} of {name} must be [re, im]")
            out[i] = complex(float(v[0]), float(v[1]))
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out[i] = v
        else:
            raise ConfigError(f"bad component {i} of {name}: {v!r}")
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"initial state {name} is not finite")
    return out


def parse_scheduler(cfg) -> SchedulerConfig:
    cfg = dict(cfg or {})
    fields = set(SchedulerConfig.__dataclass_fields__)
    extra = set(cfg) - fields
    if extra:
        raise ConfigError(f"unknown scheduler keys: {sorted(extra)}")
    for k in ("d0", "R0"):
        if k in cfg and cfg[k] is None:
            cfg[k] = np.inf
    try:
        return SchedulerConfig(**cfg)
    except (SchedulerConfigError, TypeError) as exc:
        raise ConfigError(f"invalid scheduler: {exc}") from exc


class Run:
    """Resolved experiment: model, scheduler, initial pair, seed, workers, output directory."""

    def __init__(self, doc: dict, args):
        self.doc = doc
        self.name = str(doc.get("name", "run"))
        self.seed = parse_seed(args.seed if args.seed is not None else doc.get("seed"))
        workers = args.workers if args.workers is not None else doc.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("workers must be a positive integer")
        self.workers = workers
        out = args.out or os.environ.get("COUPLAB_OUT") or doc.get("out")
        if not out:
            raise ConfigError("no output directory (config 'out', --out or COUPLAB_OUT)")
        self.out = Path(out)
        self.model_cfg = _model_cfg(doc)
        try:
            self.model = build_model(self.model_cfg)
        except ModelContractError as exc:
            raise ConfigError(str(exc)) from exc
        init = doc.get("initial") or {}
        d1, d2 = DEFAULT_INITIAL[self.model_cfg["model"]]
        self.u1 = parse_state(init.get("u1", d1), self.model, "u1")
        self.u2 = parse_state(init.get("u2", d2), self.model, "u2")
        self.sched = parse_scheduler(self._calibrated(doc.get("scheduler")))

    def _calibrated(self, cfg):
        """Fill d0, R0, aleph, B from a calibration run when the scheduler asks for it."""
        cfg = dict(cfg or {})
        opts = cfg.pop("calibrate", None)
        if not opts:
            return cfg
        opts = {} if opts is True else opts
        if not isinstance(opts, dict) or set(opts) - {"nsamples", "burn_in", "blocks", "quantile"}:
            raise ConfigError("scheduler.calibrate must be true or an object with nsamples/burn_in/blocks/quantile")
        measured = checks.calibrate_scheduler(self.model, self.u1, float(cfg.get("T", 1.0)),
                                              int(opts.get("nsamples", 200)), self.seed, workers=self.workers,
                                              **{k: opts[k] for k in ("burn_in", "blocks", "quantile") if k in opts})
        out = measured | cfg
        if "R0" not in cfg and out["d0"] is not None:
            out["R0"] = max(measured["R0"], out["d0"])  # R0 = max(d0, 4 K1) with the final d0
        return out

    def section(self, key):
        sec = self.doc.get(key) or {}
        if not isinstance(sec, dict):
            raise ConfigError(f"'{key}' must be an object")
        return sec

    def header(self, command):
        return {"command": command, "name": self.name, "seed": self.seed, "model": self.model_cfg}


# --------------------------------------------------------------------------
# atomic output
# --------------------------------------------------------------------------

def write_atomic(files: dict, out: Path):
    """Write ``{name: text}`` into ``out``: every file goes to a temp name first, then all are renamed."""
    try:
        out.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for name, text in files.items():
                fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
                with os.fdopen(fd, "w", newline="") as fh:
                    fh.write(text)
                staged.append((tmp, out / name))
        except BaseException:
            for tmp, _ in staged:
                Path(tmp).unlink(missing_ok=True)
            raise
        for tmp, dest in staged:
            os.replace(tmp, dest)
    except OSError as exc:
        raise IOFailure(f"cannot write outputs to {out}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _collect(gen):
    """Drain a unit generator; on interrupt keep the completed prefix."""
    parts = []
    try:
        for p in gen:
            parts.append(p)
    except KeyboardInterrupt:
        gen.close()
        return parts, False
    return parts, True


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def _simulate_unit(rng, start, stop, model, u0, n_steps, stride):
    """Checkpointed trajectories with per-component energy integrals; raises BlowUpError with its time."""
    u = u0[start:stop].copy()
    B, dt = len(u), model.dt
    comps = sorted(model.energy_components(u[:1]))
    states, H = [u.copy()], [model.lyapunov(u)]
    cum = {k: np.zeros(B) for k in comps}
    ints = {k: [np.zeros(B)] for k in comps}
    for c in range(n_steps // stride):
        t0 = c * stride * dt
        dbeta, deta = model.draw_noise(rng, B, stride)
        X, Y, _ = simulate(model, u, dbeta, deta, t0)
        p = model.join(X, Y)
        rates = model.energy_components(p)
        for k in comps:
            r = rates[k]
            cum[k] = cum[k] + np.sum(0.5 * dt * (r[:, 1:] + r[:, :-1]), axis=-1)
            ints[k].append(cum[k].copy())
        u = model.normalize(p[:, -1])
        states.append(u.copy())
        H.append(model.lyapunov(u))
    return {"states": np.stack(states, 1), "H": np.stack(H, 1),
            "ints": {k: np.stack(v, 1) for k, v in ints.items()}}


def _fmt(v):
    return repr(float(v))


def cmd_simulate(run: Run):
    sec = run.section("simulate")
    extra = set(sec) - {"nsamples", "horizon", "stride", "K", "which"}
    if extra:
        raise ConfigError(f"unknown simulate keys: {sorted(extra)}")
    model = run.model
    n = int(sec.get("nsamples", 1))
    horizon = float(sec.get("horizon", model.T))
    stride = int(sec.get("stride", 1))
    K = int(sec.get("K", 8))
    which = sec.get("which", "u1")
    if n < 1 or stride < 1 or horizon <= 0 or which not in ("u1", "u2"):
        raise ConfigError("simulate needs nsamples >= 1, stride >= 1, horizon > 0, which in {u1, u2}")
    steps = model.steps_for(horizon)
    steps += (-steps) % stride
    u0 = np.broadcast_to(run.u1 if which == "u1" else run.u2, (n, model.low_dim + model.high_dim)).copy()
    gen = iter_units(_simulate_unit, n, run.seed, workers=run.workers, unit_size=64, tag=2,
                     args=(model, u0, steps, stride))
    parts, complete = _collect(gen)
    if not parts:
        write_atomic({"summary.json": dumps(run.header("simulate") | {"complete": False, "paths": 0})}, run.out)
        return EXIT_INTERRUPT
    states = np.concatenate([p["states"] for p in parts])
    H = np.concatenate([p["H"] for p in parts])
    comps = sorted(parts[0]["ints"])
    ints = {k: np.concatenate([p["ints"][k] for p in parts]) for k in comps}
    times = model.dt * stride * np.arange(states.shape[1])
    running = sum(ints.values()) if comps else np.zeros_like(H)
    energy = H + running

    cols = state_columns(model, K)
    traj, ledger = io.StringIO(), io.StringIO()
    wt, wl = csv.writer(traj, lineterminator="\n"), csv.writer(ledger, lineterminator="\n")
    wt.writerow(["path", "time", *cols, "energy"])
    wl.writerow(["path", "time", "H", *comps, "running", "energy"])
    vals = np.abs(states[..., : len(cols)]) if np.iscomplexobj(states) else states[..., : len(cols)]
    for i in range(len(states)):
        for j, t in enumerate(times):
            wt.writerow([i, _fmt(t), *map(_fmt, vals[i, j]), _fmt(energy[i, j])])
            wl.writerow([i, _fmt(t), _fmt(H[i, j]), *(_fmt(ints[k][i, j]) for k in comps),
                         _fmt(running[i, j]), _fmt(energy[i, j])])
    summary = run.header("simulate") | {
        "complete": complete, "paths": int(len(states)), "requested_paths": n, "horizon": float(times[-1]),
        "steps": steps, "stride": stride, "start": which,
        "terminal_energy": {"mean": float(energy[:, -1].mean()), "max": float(energy[:, -1].max())}}
    write_atomic({"trajectory.csv": traj.getvalue(), "energy_ledger.csv": ledger.getvalue(),
                  "summary.json": dumps(summary)}, run.out)
    return EXIT_OK if complete else EXIT_INTERRUPT


# --------------------------------------------------------------------------
# couple
# --------------------------------------------------------------------------

def cmd_couple(run: Run):
    sec = run.section("couple")
    extra = set(sec) - {"episodes", "K", "unit_size"}
    if extra:
        raise ConfigError(f"unknown couple keys: {sorted(extra)}")
    model, cfg = run.model, run.sched
    n = int(sec.get("episodes", 100))
    if n < 1:
        raise ConfigError("couple needs episodes >= 1")
    size = int(sec.get("unit_size") or default_unit_size(model, cfg))
    u01 = np.broadcast_to(run.u1, (n, run.u1.shape[0])).copy()
    u02 = np.broadcast_to(run.u2, (n, run.u2.shape[0])).copy()
    gen = iter_units(_episode_unit, n, run.seed, workers=run.workers, unit_size=size, tag=1,
                     args=(model, u01, u02, cfg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        parts, complete = _collect(gen)
    if not parts:
        write_atomic({"summary.json": dumps(run.header("couple") | {"complete": False, "episodes": 0})}, run.out)
        return EXIT_INTERRUPT
    res = EpisodeResult.concat(parts)
    probs = block_probabilities(res, cfg.R0, sec.get("K"))
    tv = curves.tv_curve_from_episodes(res)
    summary = run.header("couple") | {
        "complete": complete, "episodes": res.n_episodes, "requested_episodes": n,
        "scheduler": cfg.to_dict(),
        "p_minus1": probs["p_minus1"], "p0": probs["p"][0] if probs["p"] else None,
        "p": probs["p"], "decoupling": probs["decoupling"],
        "coupled_fraction_final": float(np.mean(res.l0[:, -1] != -1)),
        "tv_curve": tv.to_dict()}
    write_atomic({"episodes.csv": res.to_csv(), "summary.json": dumps(summary)}, run.out)
    return EXIT_OK if complete else EXIT_INTERRUPT


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def _params(p, allowed):
    extra = set(p) - allowed - {"name"}
    if extra:
        raise ConfigError(f"unknown parameters for check {p['name']!r}: {sorted(extra)}")
    return p


def _curve_report(name, curve, min_r2, below=None, by=None):
    ok = curve.beta is not None and curve.beta > 0 and curve.r2 is not None and curve.r2 >= min_r2
    details = {"min_r2": min_r2}
    if below is not None:
        idx = min(int(by), len(curve.values) - 1) if by is not None else len(curve.values) - 1
        hit = bool(np.any(curve.values[: idx + 1] < below))
        ok = ok and hit
        details |= {"below": below, "by_block": by, "reached": hit}
    return checks.Report(name, ok, curve.values, [curve.lo, curve.hi],
                         {"c": curve.c, "beta": curve.beta, "r2": curve.r2}, details | {"note": curve.note})


def run_check(run: Run, p: dict):
    name = p.get("name")
    m, seed, w = run.model, run.seed, run.workers
    if name == "measure":
        q = _params(p, {"instances", "max_support"})
        return batteries.measure_battery(seed, q.get("instances", 1000), q.get("max_support", 64))
    if name == "meet_bound":
        q = _params(p, {"instances", "max_support"})
        return batteries.meet_bound_battery(seed, q.get("instances", 1000), q.get("max_support", 64))
    if name == "girsanov":
        q = _params(p, {"paths", "exact", "steps"})
        return batteries.girsanov_battery(m, run.u1, run.u2, seed, n_steps=q.get("steps"),
                                          n_paths=q.get("paths", 10_000), n_exact=q.get("exact", 100))
    if name == "torus_block":
        q = _params(p, {"episodes", "T"})
        if not isinstance(m, TorusModel):
            raise ConfigError("torus_block needs the torus model")
        return batteries.torus_block_battery(m, float(run.u1[0]), float(run.u2[0]), seed,
                                             n_episodes=q.get("episodes", 10_000), T=q.get("T"))
    if name == "tv_curve":
        q = _params(p, {"episodes", "fit_from", "min_r2", "below", "by_block"})
        curve, _ = curves.tv_decay_curve(m, run.u1, run.u2, run.sched, q.get("episodes", 1000), seed, w,
                                         fit_from=q.get("fit_from", 0.0))
        return _curve_report("tv_curve", curve, q.get("min_r2", 0.9), q.get("below"), q.get("by_block"))
    if name == "lipb_curve":
        q = _params(p, {"episodes", "fit_from", "min_r2", "sobolev_s"})
        curve, _ = curves.lipb_decay_curve(m, run.u1, run.u2, run.sched, q.get("episodes", 1000), seed,
                                           sobolev_s=q.get("sobolev_s"), workers=w,
                                           fit_from=q.get("fit_from", 0.0))
        return _curve_report("lipb_curve", curve, q.get("min_r2", 0.9))
    if name == "foias_prodi":
        q = _params(p, {"T", "nsamples", "aleph", "B", "stride", "min_fraction"})
        return checks.foias_prodi_verify(m, run.u1, run.u2, q.get("T", m.T), q.get("nsamples", 500), seed,
                                         aleph=q.get("aleph"), B=q.get("B"), stride=q.get("stride", 10),
                                         min_fraction=q.get("min_fraction", 0.95), workers=w)
    if name == "lyapunov":
        q = _params(p, {"t_grid", "k_grid", "nsamples", "stride", "R0"})
        rep = checks.lyapunov_verify(m, run.u1, q.get("t_grid", [0.2, 0.4, 0.6, 0.8, 1.0]), q.get("k_grid", [1]),
                                     q.get("nsamples", 1000), seed, stride=q.get("stride", 10),
                                     R0=q.get("R0"), workers=w)
        d = rep.to_dict()
        return checks.Report("lyapunov", rep.all_pass, d["curves"], None,
                             {"K1": d["K1"], "alpha": d["alpha"], "C": d["C"]},
                             {"times": d["times"], "passed": d["passed"], "hitting": d["hitting"]})
    if name == "growth_tail":
        q = _params(p, {"horizon", "nsamples", "rho_grid", "stride"})
        return checks.growth_tail_verify(m, run.u1, q.get("horizon", m.T), q.get("nsamples", 1000), seed,
                                         q.get("rho_grid", [0.5, 1.0, 2.0, 4.0]), stride=q.get("stride", 10),
                                         workers=w)
    if name == "drift_estimate":
        q = _params(p, {"T", "T0_grid", "nsamples", "aleph", "B", "stride"})
        return checks.drift_estimate_verify(m, run.u1, run.u2, q.get("T", m.T), q.get("T0_grid", [0.0, 0.25, 0.5]),
                                            q.get("nsamples", 200), seed, aleph=q.get("aleph"), B=q.get("B"),
                                            stride=q.get("stride", 10), workers=w)
    if name == "hs_tail":
        q = _params(p, {"k", "delta", "t_grid", "nsamples", "stride"})
        return checks.hs_tail_verify(m, run.u1, q.get("k", 1), q.get("delta", 0.5),
                                     q.get("t_grid", [0.2, 0.4, 0.6, 0.8, 1.0]), q.get("nsamples", 500), seed,
                                     stride=q.get("stride", 10), workers=w)
    if name == "ctrl_h_by_l2":
        q = _params(p, {"u0_list", "T_list", "nsamples", "stride"})
        u0s = [parse_state(u, m, "u0_list") for u in q.get("u0_list", [])] or [run.u1, run.u2]
        return checks.ctrl_h_by_l2_verify(m, u0s, q.get("T_list", [0.25, 0.5, 1.0]), q.get("nsamples", 200), seed,
                                          stride=q.get("stride", 10), workers=w)
    raise ConfigError(f"unknown check {name!r}")


CHECKS = ("measure", "meet_bound", "girsanov", "torus_block", "tv_curve", "lipb_curve", "foias_prodi", "lyapunov",
          "growth_tail", "drift_estimate", "hs_tail", "ctrl_h_by_l2")


def cmd_verify(run: Run, only=None):
    sec = run.section("verify")
    extra = set(sec) - {"checks"}
    if extra:
        raise ConfigError(f"unknown verify keys: {sorted(extra)}")
    sel = sec.get("checks") or []
    sel = [{"name": s} if isinstance(s, str) else s for s in sel]
    if only:
        sel = [s for s in sel if s.get("name") in only] + [{"name": o} for o in only
                                                            if o not in {s.get("name") for s in sel}]
    if not sel:
        raise UsageError("empty estimator selection")
    for s in sel:
        if not isinstance(s, dict) or s.get("name") not in CHECKS:
            raise ConfigError(f"unknown check {s!r}")
    reports, complete = [], True
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for s in sel:
                reports.append(run_check(run, s).to_dict())
    except KeyboardInterrupt:
        complete = False
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, BlowUpError)):
            raise
        raise ConfigError(f"invalid check parameters: {exc}") from exc
    summary = run.header("verify") | {"complete": complete, "pass": complete and all(r["pass"] for r in reports),
                                      "checks": reports}
    write_atomic({"report.json": dumps(summary)}, run.out)
    return EXIT_OK if complete else EXIT_INTERRUPT


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

def _rows_of(path: Path, doc: dict):
    src = path.as_posix()
    if doc.get("command") == "verify":
        for c in doc.get("checks", []):
            yield [src, "verify", c.get("name"), c.get("pass"), c.get("estimate"), c.get("ci"), c.get("fitted")]
    elif doc.get("command") == "couple":
        p0 = doc.get("p0") or {}
        yield [src, "couple", doc.get("name"), doc.get("complete"),
               {"p_minus1": doc.get("p_minus1", {}).get("estimate"), "p0": p0.get("estimate"),
                "coupled_fraction_final": doc.get("coupled_fraction_final")},
               {"p_minus1": doc.get("p_minus1", {}).get("ci"), "p0": p0.get("ci")},
               doc.get("tv_curve", {}).get("fitted")]
    elif doc.get("command") == "simulate":
        yield [src, "simulate", doc.get("name"), doc.get("complete"), doc.get("terminal_energy"), None, None]


def cmd_report(out: Path, inputs):
    paths = []
    for p in (inputs or [out]):
        p = Path(p)
        if p.is_dir():
            paths += sorted(q for q in p.rglob("*.json") if not q.name.startswith("."))
        elif p.is_file():
            paths.append(p)
        else:
            raise IOFailure(f"no such file or directory: {p}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "command", "name", "pass", "estimate", "ci", "fitted"])
    n = 0
    for p in sorted(set(paths)):
        try:
            doc = json.loads(p.read_text())
        except OSError as exc:
            raise IOFailure(f"cannot read {p}: {exc}") from exc
        except json.JSONDecodeError:
            continue
        if not isinstance(doc, dict):
            continue
        for row in _rows_of(p, doc):
            w.writerow([*row[:4], *(json.dumps(_jsonable(v), sort_keys=True) for v in row[4:])])
            n += 1
    write_atomic({"report.csv": buf.getvalue()}, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

class UsageError(ValueError):
    pass


def build_parser():
    ap = argparse.ArgumentParser(prog="couplab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "couple", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--seed", type=int, metavar="U64")
        sp.add_argument("--workers", type=int, metavar="N")
        sp.add_argument("--out", metavar="DIR")
        if name == "verify":
            sp.add_argument("--check", action="append", choices=CHECKS, help="run only these checks")
    rp = sub.add_parser("report")
    rp.add_argument("inputs", nargs="*", help="summary JSON files or directories (default: --out)")
    rp.add_argument("--out", metavar="DIR")
    rp.add_argument("--config", metavar="PATH", help="accepted for symmetry; unused")
    rp.add_argument("--seed", type=int, metavar="U64", help="unused")
    rp.add_argument("--workers", type=int, metavar="N", help="unused")
    return ap


def _fail(code, kind, message, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            out = args.out or os.environ.get("COUPLAB_OUT")
            if not out:
                raise ConfigError("report needs --out (or COUPLAB_OUT)")
            return cmd_report(Path(out), args.inputs)
        run = Run(load_config(args.config), args)
        if args.command == "simulate":
            return cmd_simulate(run)
        if args.command == "couple":
            return cmd_couple(run)
        return cmd_verify(run, args.check)
    except BlowUpError as exc:
        t = getattr(exc, "time", None)
        return _fail(EXIT_BLOWUP, "blow-up", str(exc), time=None if t is None or not np.isfinite(t) else float(t))
    except (ConfigError, UsageError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except IOFailure as exc:
        return _fail(EXIT_IO, "io", str(exc))


if __name__ == "__main__":
    sys.exit(main())

import csv
import json

import numpy as np
import pytest
from scipy import stats

from couplab.cli import main

TORUS = {"name": "torus", "seed": 7, "model": {"model": "torus", "dt": 0.01, "T": 1.0},
         "scheduler": {"T": 1.0, "max_blocks": 5}, "initial": {"u1": [0.1], "u2": [0.6]},
         "simulate": {"nsamples": 150, "horizon": 1.0, "stride": 10}, "couple": {"episodes": 200, "unit_size": 32},
         "verify": {"checks": [{"name": "measure", "instances": 50}, {"name": "torus_block", "episodes": 500}]}}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_exit_codes(tmp_path, capsys):
    cfg = write(tmp_path, TORUS | {"seed": None})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--seed", "1"]) == 2
    assert main(["simulate", "--config", cfg, "--seed", "-3"]) == 2
    cfg = write(tmp_path, TORUS | {"bogus": 1}, "bad.json")
    assert main(["couple", "--config", cfg, "--seed", "1"]) == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "config"


def test_empty_check_selection_is_usage_error(tmp_path):
    cfg = write(tmp_path, TORUS | {"verify": {"checks": []}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "v")]) == 2


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path, TORUS)
    assert main(["simulate", "--config", cfg, "--out", str(blocker / "sub")]) == 4


def test_blow_up_reports_time(tmp_path, capsys):
    doc = {"seed": 1, "model": {"model": "cgl", "M": 16, "N": 8, "N1": 4, "dt": 0.01, "case": "H1"},
           "initial": {"u1": [[30.0, 0.0]] * 3}, "simulate": {"nsamples": 2, "horizon": 1.0}}
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "blow-up" and 0 < err["time"] <= 1.0
    assert not (tmp_path / "o" / "trajectory.csv").exists()


@pytest.mark.parametrize("command", ["simulate", "couple", "verify"])
def test_outputs_independent_of_workers(tmp_path, command):
    cfg = write(tmp_path, TORUS)
    outs = []
    for w in (1, 4):
        d = tmp_path / f"w{w}"
        assert main([command, "--config", cfg, "--workers", str(w), "--out", str(d)]) == 0
        outs.append(files(d))
    assert outs[0] == outs[1]
    assert not any(name.startswith(".") or name.endswith(".tmp") for name in outs[0])


def test_seed_flag_overrides_config(tmp_path):
    cfg = write(tmp_path, TORUS)
    main(["couple", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["couple", "--config", cfg, "--seed", "8", "--out", str(tmp_path / "b")])
    main(["couple", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "c")])
    a, b, c = (files(tmp_path / x)["episodes.csv"] for x in "abc")
    assert a == c and a != b


def test_zero_noise_zero_state_is_fixed(tmp_path):
    doc = {"seed": 2, "model": {"model": "cgl", "M": 16, "N": 8, "N1": 4, "dt": 1e-3,
                                "noise": {"low_scale": 0.0, "high_scale": 0.0}},
           "initial": {"u1": []}, "simulate": {"nsamples": 3, "horizon": 0.05, "stride": 10}}
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "z")]) == 0
    with open(tmp_path / "z" / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 3 * 6
    for r in rows[1:]:
        assert all(float(v) == 0.0 for v in r[2:])


def test_driftless_torus_terminal_law_uniform(tmp_path):
    doc = TORUS | {"simulate": {"nsamples": 2000, "horizon": 1.0, "stride": 100}}
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "s")]) == 0
    with open(tmp_path / "s" / "trajectory.csv") as fh:
        rows = [r for r in csv.DictReader(fh) if float(r["time"]) == 1.0]
    x = np.array([float(r["x"]) for r in rows])
    assert len(x) == 2000 and np.all((0 <= x) & (x < 1))
    counts = np.histogram(x, bins=10, range=(0, 1))[0]
    assert stats.chisquare(counts).pvalue > 1e-3


def test_energy_ledger_columns(tmp_path):
    doc = {"seed": 4, "model": "cgl", "simulate": {"nsamples": 2, "horizon": 0.02, "stride": 10}}
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "e")]) == 0
    with open(tmp_path / "e" / "energy_ledger.csv") as fh:
        rows = list(csv.DictReader(fh))
    r = rows[-1]
    assert float(r["energy"]) == pytest.approx(float(r["H"]) + float(r["running"]))


def test_couple_summary_has_intervals(tmp_path):
    assert main(["couple", "--config", write(tmp_path, TORUS), "--out", str(tmp_path / "c")]) == 0
    s = json.loads((tmp_path / "c" / "summary.json").read_text())
    assert s["complete"] and s["episodes"] == 200
    lo, hi = s["p_minus1"]["ci"]
    assert 0 <= lo <= s["p_minus1"]["estimate"] <= hi <= 1
    assert all(len(e["ci"]) == 2 for e in s["p"])
    assert "workers" not in s


def test_report_collects_summaries(tmp_path):
    cfg = write(tmp_path, TORUS)
    main(["couple", "--config", cfg, "--out", str(tmp_path / "runs" / "c")])
    main(["verify", "--config", cfg, "--out", str(tmp_path / "runs" / "v")])
    assert main(["report", str(tmp_path / "runs"), "--out", str(tmp_path / "r")]) == 0
    with open(tmp_path / "r" / "report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["command"] for r in rows} == {"couple", "verify"}
    assert {r["name"] for r in rows if r["command"] == "verify"} == {"measure_core", "torus_block"}
    assert main(["report", str(tmp_path / "nowhere"), "--out", str(tmp_path / "r")]) == 4


def test_check_filter(tmp_path):
    cfg = write(tmp_path, TORUS)
    assert main(["verify", "--config", cfg, "--check", "measure", "--out", str(tmp_path / "v")]) == 0
    rep = json.loads((tmp_path / "v" / "report.json").read_text())
    assert [c["name"] for c in rep["checks"]] == ["measure_core"]
    assert rep["complete"] and rep["pass"]


def test_scheduler_calibration_recorded(tmp_path):
    doc = {"seed": 3, "model": {"model": "lowhigh", "dt": 0.01, "T": 0.5},
           "scheduler": {"T": 0.5, "max_blocks": 3, "d0": 5.0, "calibrate": {"nsamples": 100, "burn_in": 1.0}},
           "couple": {"episodes": 50}}
    assert main(["couple", "--config", write(tmp_path, doc), "--out", str(tmp_path / "c")]) == 0
    sched = json.loads((tmp_path / "c" / "summary.json").read_text())["scheduler"]
    assert sched["d0"] == 5.0  # explicit values win
    assert sched["aleph"] is not None and sched["R0"] >= 5.0
    doc["scheduler"]["calibrate"] = {"bogus": 1}
    assert main(["couple", "--config", write(tmp_path, doc), "--out", str(tmp_path / "d")]) == 2

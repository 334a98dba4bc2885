"""CLI contract: subcommands, config precedence, exit codes, determinism."""

import json
import time

import numpy as np
import pytest

from beamscan import PdpTensor, save_tensor
from beamscan.cli import RunConfig, main

SMOKE = ["--n-scan", "10"]


def _read(p):
    return p.read_bytes()


def test_run_config_round_trip(tmp_path):
    cfg = RunConfig(cases=[1, 8], seed=3, out=str(tmp_path), n_scan=10)
    f = tmp_path / "cfg.json"
    f.write_text(cfg.to_json())
    back = RunConfig.from_sources({}, str(f))
    assert back == cfg


def test_config_precedence(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"seed": 99, "n_scan": 7, "cases": [3]}))
    cfg = RunConfig.from_sources({"seed": 11, "out": str(tmp_path)}, str(f))
    assert cfg.seed == 11  # flag beats file
    assert cfg.n_scan == 7  # file beats default
    assert cfg.cases == [3]
    assert cfg.tx_power_dbm == 12.5  # untouched default


def test_config_rejects_unknown_keys(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"sede": 1}))
    assert main(["trace", "--config", str(f), "--out", str(tmp_path)]) == 2


def test_validation_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main(["trace", "--out", out, "--cases", "13"]) == 2
    assert main(["trace", "--out", out, "--cases", "1,x"]) == 2
    assert main(["trace", "--out", out, "--scene", str(tmp_path / "missing.scene")]) == 2
    assert main(["analyze", "--out", out]) == 2  # no tensors yet


def test_trace_writes_case_path_tables(tmp_path):
    out = tmp_path
    assert main(["trace", "--out", str(out), "--cases", "8"]) == 0
    rows = (out / "paths_case08.csv").read_text().strip().splitlines()
    assert len(rows) == 7  # header + six paths
    assert rows[1].startswith("LOS,")
    assert (out / "run_config.json").is_file()


def test_simulate_analyze_smoke_and_determinism(tmp_path):
    t0 = time.monotonic()
    out = tmp_path / "run"
    args = ["--out", str(out), "--cases", "8", *SMOKE]
    assert main(["simulate", *args]) == 0
    tensor = out / "tensor_case08.bscn"
    blocked = out / "tensor_case08_blockage.bscn"
    assert tensor.is_file() and blocked.is_file()

    # same seed, second directory: byte-identical tensors
    out2 = tmp_path / "run2"
    assert main(["simulate", "--out", str(out2), "--cases", "8", *SMOKE]) == 0
    assert _read(tensor) == _read(out2 / "tensor_case08.bscn")

    # overwrite requires --force
    assert main(["simulate", *args]) == 2
    assert main(["simulate", *args, "--force"]) == 0
    # the echo reloads into the effective config of the latest command
    echo = RunConfig.from_sources({}, str(out / "run_config.json"))
    assert echo.cases == [8] and echo.n_scan == 10

    assert main(["analyze", "--out", str(out), "--no-figures"]) == 0
    for name in ("case_summary.csv", "path_table.csv", "summary.json", "blockage_case08.csv"):
        assert (out / name).is_file(), name
    assert not list(out.glob("*.png"))
    assert not list(out.glob("*.tmp"))

    # analyzing again reproduces the reports byte for byte
    first = {n: _read(out / n) for n in ("case_summary.csv", "path_table.csv", "summary.json")}
    assert main(["analyze", "--out", str(out), "--no-figures"]) == 0
    for n, blob in first.items():
        assert _read(out / n) == blob
    assert time.monotonic() - t0 < 5.0  # smoke budget for the full chain

    doc = json.loads((out / "summary.json").read_text())
    assert [c["case"] for c in doc["cases"]] == [8]


def test_analyze_renders_figures(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--out", str(out), "--cases", "8", *SMOKE]) == 0
    assert main(["analyze", "--out", str(out)]) == 0
    for name in ("case_summary.png", "rssi_validation.png",
                 "omni_pdp_case08.png", "blockage_case08.png"):
        f = out / name
        assert f.is_file() and f.stat().st_size > 5000, name


def test_analyze_reports_no_signal(tmp_path):
    out = tmp_path / "run"
    out.mkdir()
    rng = np.random.default_rng(0)
    noise = -84.0 + 0.1 * rng.standard_normal((192, 144, 5))
    save_tensor(PdpTensor(data=noise, noise_floor_dbm=-84.0), out / "tensor_case01.bscn")
    assert main(["analyze", "--out", str(out), "--no-figures"]) == 1


def test_explicit_tensor_arguments(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--out", str(out), "--cases", "2", *SMOKE]) == 0
    other = tmp_path / "elsewhere"
    other.mkdir()
    t = out / "tensor_case02.bscn"
    assert main(["analyze", str(t), "--out", str(other), "--no-figures"]) == 0
    assert (other / "case_summary.csv").is_file()
    # a name the case pattern cannot parse is a config error
    odd = other / "whatever.bscn"
    odd.write_bytes(t.read_bytes())
    assert main(["analyze", str(odd), "--out", str(other), "--no-figures"]) == 2

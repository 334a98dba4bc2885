"""Command-line entry points: trace, simulate, analyze.

One RunConfig drives all three stages.  Values resolve flag > config file >
built-in default, the effective config of the latest command is echoed into
the output directory as run_config.json, and every artifact is written
atomically (temp file + rename).  Repeating a command with the same config
reproduces its outputs byte for byte.

    beamscan trace    --out runs/demo
    beamscan simulate --out runs/demo
    beamscan analyze  --out runs/demo

Exit codes: 0 success, 1 analysis-level failure (a case with no detectable
signal), 2 input or config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .analysis import blockage_timeseries, synthesize_omni
from .codebook import load_orientation_cases, oriented_pose, synth_codebook
from .raytracer import dump_paths_csv, trace_paths, visible_paths
from .reports import (
    analyze_case,
    write_blockage_csv,
    write_case_summary_csv,
    write_path_table_csv,
    write_summary_json,
)
from .scene import load_environment
from .sounder import SimConfig, load_tensor, save_tensor, synthesize_tensor

_TENSOR_RE = re.compile(r"tensor_case(\d+)(_blockage)?\.bscn$")


class CliError(Exception):
    """Input or configuration problem; maps to exit code 2."""


@dataclass
class RunConfig:
    """Everything a run needs, JSON round-trippable."""

    scene: str | None = None  # None = bundled reference scene
    cases: list[int] = field(default_factory=lambda: list(range(1, 13)))
    blockage_cases: list[int] = field(default_factory=lambda: [8])
    seed: int = 11
    out: str = "out"
    # sounder
    tx_power_dbm: float = 12.5
    n_dly: int = 192
    n_scan: int = 1750
    sample_period_ns: float = 0.8
    scan_period_s: float = 3.2e-3
    delay_offset_ns: float = 16.3
    noise_floor_dbm: float = -84.0
    noise_sigma_db: float = 0.1
    pulse_spread: bool = False
    # codebook
    codebook_beams: int = 12
    codebook_hpbw_deg: float = 16.0
    codebook_peak_gain_dbi: float = 12.0
    codebook_span_deg: float = 120.0
    codebook_el_hpbw_deg: float = 70.0
    codebook_el_tilt_cycle: list[float] = field(default_factory=lambda: [0.0, -20.0, 20.0])
    codebook_sidelobe_db: float = 20.0
    codebook_el_span_deg: float = 60.0
    # analysis
    guard_bins: int = 5
    peak_threshold_db: float = 3.0
    angle_tol_deg: float = 5.0
    delay_tol_bins: int = 1
    figures: bool = True

    def validate(self) -> None:
        if not self.cases:
            raise CliError("no cases selected")
        bad = [c for c in self.cases if not 1 <= c <= 12]
        if bad:
            raise CliError(f"case ids out of range 1..12: {bad}")
        if self.scene is not None and not Path(self.scene).is_file():
            raise CliError(f"scene file not found: {self.scene}")
        if self.n_scan < 1 or self.n_dly < 1:
            raise CliError("tensor dims must be >= 1")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2) + "\n"

    @classmethod
    def from_sources(cls, flag_values: dict, config_path: str | None) -> "RunConfig":
        """Defaults, then config-file values, then explicitly given flags."""
        merged = dataclasses.asdict(cls())
        if config_path is not None:
            try:
                with open(config_path, encoding="utf-8") as f:
                    loaded = json.load(f)
            except FileNotFoundError:
                raise CliError(f"config file not found: {config_path}")
            except json.JSONDecodeError as e:
                raise CliError(f"config file is not valid JSON: {config_path}: {e}")
            unknown = set(loaded) - set(merged)
            if unknown:
                raise CliError(f"unknown config keys: {sorted(unknown)}")
            merged.update(loaded)
        merged.update({k: v for k, v in flag_values.items() if v is not None})
        return cls(**merged)


def _resolve_scene(cfg: RunConfig):
    if cfg.scene is not None:
        return load_environment(cfg.scene)
    ref = resources.files("beamscan").joinpath("data/reference_scene.txt")
    with resources.as_file(ref) as p:
        return load_environment(p)


def _tables(cfg: RunConfig):
    table = synth_codebook(
        beams=cfg.codebook_beams,
        hpbw_deg=cfg.codebook_hpbw_deg,
        peak_gain_dbi=cfg.codebook_peak_gain_dbi,
        steering_span_deg=cfg.codebook_span_deg,
        el_hpbw_deg=cfg.codebook_el_hpbw_deg,
        el_tilt_cycle=tuple(cfg.codebook_el_tilt_cycle),
        sidelobe_rel_db=cfg.codebook_sidelobe_db,
        el_span_deg=cfg.codebook_el_span_deg,
    )
    return (table, table)


def _orientation_cases():
    ref = resources.files("beamscan").joinpath("data/orientation_cases.txt")
    with resources.as_file(ref) as p:
        return load_orientation_cases(p)


def _case_paths(scene, case, tx_power_dbm: float):
    tx = oriented_pose(scene.tx, case.phi_tx_deg, case.theta_tx_deg)
    rx = oriented_pose(scene.rx, case.phi_rx_deg, case.theta_rx_deg)
    return trace_paths(scene.environment, tx, rx, tx_power_dbm)


def _atomic_text(path: Path, write_fn) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        write_fn(fh)
    os.replace(tmp, path)


def _echo_config(cfg: RunConfig, out: Path) -> None:
    _atomic_text(out / "run_config.json", lambda fh: fh.write(cfg.to_json()))


def _sim_config(cfg: RunConfig, case_id: int) -> SimConfig:
    return SimConfig(
        n_dly=cfg.n_dly,
        n_scan=cfg.n_scan,
        sample_period_ns=cfg.sample_period_ns,
        scan_period_s=cfg.scan_period_s,
        delay_offset_ns=cfg.delay_offset_ns,
        noise_floor_dbm=cfg.noise_floor_dbm,
        noise_sigma_db=cfg.noise_sigma_db,
        rng_seed=cfg.seed,
        pulse_spread=cfg.pulse_spread,
        case_id=case_id,
    )


def cmd_trace(cfg: RunConfig) -> int:
    """Visible traced paths per case, one CSV each."""
    scene = _resolve_scene(cfg)
    cases = _orientation_cases()
    tables = _tables(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(cfg, out)
    for cid in cfg.cases:
        paths = _case_paths(scene, cases[cid], cfg.tx_power_dbm)
        vis = visible_paths(paths, tables)
        _atomic_text(out / f"paths_case{cid:02d}.csv", lambda fh, v=vis: dump_paths_csv(v, fh))
        print(f"case {cid}: {len(vis)} visible paths")
    return 0


def cmd_simulate(cfg: RunConfig, force: bool) -> int:
    """Measurement tensor per case; blockage variants where configured."""
    scene = _resolve_scene(cfg)
    cases = _orientation_cases()
    tables = _tables(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    targets = []
    for cid in cfg.cases:
        targets.append((cid, out / f"tensor_case{cid:02d}.bscn", None))
        if cid in cfg.blockage_cases and scene.blocker is not None:
            targets.append((cid, out / f"tensor_case{cid:02d}_blockage.bscn", scene.blocker))
    existing = [str(p) for _, p, _ in targets if p.exists()]
    if existing and not force:
        raise CliError(
            "refusing to overwrite existing tensors (use --force): " + ", ".join(existing)
        )

    _echo_config(cfg, out)
    for cid, path, traj in targets:
        paths = _case_paths(scene, cases[cid], cfg.tx_power_dbm)
        tensor = synthesize_tensor(paths, tables, _sim_config(cfg, cid), traj=traj)
        tmp = path.with_name(path.name + ".tmp")
        save_tensor(tensor, tmp)
        os.replace(tmp, path)
        print(f"wrote {path} ({path.stat().st_size / 1e6:.1f} MB)")
    return 0


def cmd_analyze(cfg: RunConfig, tensor_files: list[str]) -> int:
    """Full report bundle from simulated tensors."""
    scene = _resolve_scene(cfg)
    cases = _orientation_cases()
    tables = _tables(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    if tensor_files:
        tensor_paths = [Path(t) for t in tensor_files]
    else:
        tensor_paths = sorted(out.glob("tensor_case*.bscn"))
    if not tensor_paths:
        raise CliError(f"no tensor files found under {out} (run simulate first)")
    static, blocked = {}, {}
    for p in tensor_paths:
        m = _TENSOR_RE.search(p.name)
        if m is None:
            raise CliError(f"cannot infer a case id from tensor name: {p}")
        cid = int(m.group(1))
        if not p.is_file():
            raise CliError(f"tensor file not found: {p}")
        (blocked if m.group(2) else static)[cid] = p

    _echo_config(cfg, out)
    results = []
    failures = []
    omnis = {}
    for cid in sorted(static):
        tensor = load_tensor(static[cid])
        traced = _case_paths(scene, cases[cid], cfg.tx_power_dbm)
        vis = visible_paths(traced, tables)
        try:
            res = analyze_case(
                tensor, vis, tables, cid,
                delay_offset_ns=cfg.delay_offset_ns,
                guard_bins=cfg.guard_bins,
                peak_threshold_db=cfg.peak_threshold_db,
                delay_tol_bins=cfg.delay_tol_bins,
                angle_tol_deg=cfg.angle_tol_deg,
            )
        except ValueError as e:
            failures.append((cid, str(e)))
            print(f"case {cid}: {e}", file=sys.stderr)
            continue
        results.append(res)
        omnis[cid] = synthesize_omni(tensor)
        n_true = len(res.identified())
        print(
            f"case {cid}: k_los={res.k_los} LOS {res.power.los_fraction_pct:.1f}% "
            f"rho={res.rho_los if res.rho_los is None else round(res.rho_los, 3)} "
            f"identified={n_true}"
        )

    if results:
        _atomic_text(out / "case_summary.csv", lambda fh: write_case_summary_csv(fh, results))
        _atomic_text(out / "path_table.csv", lambda fh: write_path_table_csv(fh, results))
        _atomic_text(out / "summary.json", lambda fh: write_summary_json(fh, results))

    by_case = {r.case_id: r for r in results}
    for cid in sorted(blocked):
        if cid not in by_case:
            print(f"case {cid}: no static analysis, skipping blockage trace", file=sys.stderr)
            continue
        tensor = load_tensor(blocked[cid])
        matches = [m for ms in by_case[cid].bin_matches.values() for m in ms]
        times, series = blockage_timeseries(tensor, matches, tables)
        _atomic_text(
            out / f"blockage_case{cid:02d}.csv",
            lambda fh, t=times, s=series: write_blockage_csv(fh, t, s),
        )
        if cfg.figures:
            from .figures import fig_blockage

            fig_blockage(times, series, by_case[cid].power.p_noise_dbm,
                         out / f"blockage_case{cid:02d}.png")

    if cfg.figures and results:
        from .figures import fig_case_summary, fig_omni_pdp, fig_rssi_validation

        fig_case_summary(results, out / "case_summary.png")
        fig_rssi_validation(results, tables, out / "rssi_validation.png")
        for r in results:
            fig_omni_pdp(
                omnis[r.case_id], r.k_los, r.power.nlos_bins, r.power.p_noise_dbm,
                out / f"omni_pdp_case{r.case_id:02d}.png", r.case_id,
            )

    if failures:
        print(f"{len(failures)} case(s) failed analysis", file=sys.stderr)
        return 1
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run config; flags given here win over it")
    p.add_argument("--scene", help="scene file (default: bundled reference scene)")
    p.add_argument("--cases", help="comma-separated case ids, e.g. 1,2,8")
    p.add_argument("--seed", type=int, help="RNG seed for the simulation")
    p.add_argument("--out", help="output directory")
    p.add_argument("--guard-m", type=int, dest="guard_bins",
                   help="guard bins between noise region and LOS")
    p.add_argument("--angle-tol", type=float, dest="angle_tol_deg",
                   help="angle gate for path matching, degrees")
    p.add_argument("--peak-threshold-db", type=float, dest="peak_threshold_db",
                   help="NLOS peak threshold above the noise estimate, dB")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beamscan",
        description="directional channel-sounder simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_trace = sub.add_parser("trace", help="ray-trace the visible paths per case")
    _add_common(p_trace)

    p_sim = sub.add_parser("simulate", help="synthesize measurement tensors")
    _add_common(p_sim)
    p_sim.add_argument("--n-scan", type=int, dest="n_scan", help="scans per tensor")
    p_sim.add_argument("--force", action="store_true", help="overwrite existing tensors")

    p_an = sub.add_parser("analyze", help="run the analysis pipeline and write reports")
    _add_common(p_an)
    p_an.add_argument("tensors", nargs="*", help="tensor files (default: <out>/tensor_case*.bscn)")
    p_an.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    args = parser.parse_args(argv)

    flag_values = {
        k: getattr(args, k, None)
        for k in (
            "scene", "seed", "out", "guard_bins", "angle_tol_deg",
            "peak_threshold_db", "n_scan",
        )
    }
    if getattr(args, "cases", None):
        try:
            flag_values["cases"] = [int(c) for c in args.cases.split(",") if c.strip()]
        except ValueError:
            print(f"error: --cases must be comma-separated integers: {args.cases}",
                  file=sys.stderr)
            return 2
    if getattr(args, "no_figures", False):
        flag_values["figures"] = False

    try:
        cfg = RunConfig.from_sources(flag_values, args.config)
        cfg.validate()
        if args.command == "trace":
            return cmd_trace(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, force=args.force)
        return cmd_analyze(cfg, tensor_files=list(args.tensors))
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Report tables: per-case power summary, per-path NLOS table, blockage trace.

Three delimited layouts plus one JSON document cover a full run:

  - case summary: one row per case with the noise estimate, LOS power, and
    the LOS share of the total received power,
  - path table: one row per detected NLOS peak per case, carrying absolute
    and LOS-relative power and the identification verdict,
  - blockage trace: per-scan RSSI of every confirmed path, one column each,
  - run summary: everything the pipeline decided (estimates, gaps, rho,
    verdicts) in machine-readable form.

The bundled NLOS reference table ships as package data; its rows give the
published per-case per-path absolute and LOS-relative powers, which pin the
report arithmetic (P' = P_nlos - P_LOS in dB) in the consistency test.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .analysis import (
    PathEstimate,
    PowerReport,
    TruePathMatch,
    VERDICT_TRUE,
    correlation_rho,
    detect_los_index,
    detect_nlos_peaks,
    estimate_paths,
    extract_rssi,
    match_bin,
    power_report,
    synthesize_omni,
)
from .codebook import PatternTable
from .raytracer import RayPath, predict_rssi
from .sounder import PdpTensor

UNIDENTIFIED = "unidentified"


@dataclass(frozen=True, eq=False)
class CaseResult:
    """Everything the analysis pipeline produced for one case."""

    case_id: int
    k_los: int
    power: PowerReport
    rho_los: float | None
    bin_estimates: dict[int, list[PathEstimate]]
    bin_matches: dict[int, list[TruePathMatch]]
    traced: list[RayPath]

    def identified(self) -> list[tuple[int, TruePathMatch]]:
        """(bin, match) for every verdict=true path, delay-ordered."""
        out = []
        for b in sorted(self.bin_matches):
            for m in self.bin_matches[b]:
                if m.verdict == VERDICT_TRUE:
                    out.append((b, m))
        return out


def analyze_case(
    tensor: PdpTensor,
    traced: list[RayPath],
    tables: tuple[PatternTable, PatternTable],
    case_id: int,
    delay_offset_ns: float,
    guard_bins: int = 5,
    peak_threshold_db: float = 3.0,
    delay_tol_bins: int = 1,
    angle_tol_deg: float = 5.0,
) -> CaseResult:
    """Run the full static pipeline on one tensor.

    ``traced`` is the candidate path list the verdicts gate against
    (normally the visible set for the case's poses).
    """
    omni = synthesize_omni(tensor)
    k_los = detect_los_index(omni)
    nlos = detect_nlos_peaks(
        omni, k_los, power_report(omni, k_los, guard_bins=guard_bins).p_noise_dbm,
        threshold_db=peak_threshold_db,
    )
    rep = power_report(omni, k_los, nlos_bins=nlos, guard_bins=guard_bins)

    rho_los = None
    direct = [p for p in traced if p.interaction_label() == "direct"]
    if direct:
        rho_los = correlation_rho(
            extract_rssi(tensor, k_los), predict_rssi(traced, tables, direct[0]).values_dbm
        )

    estimates: dict[int, list[PathEstimate]] = {}
    matches: dict[int, list[TruePathMatch]] = {}
    for b in (k_los,) + rep.nlos_bins:
        ests = estimate_paths(tensor, b, tables)
        estimates[b] = ests
        if traced:
            matches[b] = match_bin(
                ests, traced, tables, tensor.sample_period_ns, delay_offset_ns,
                delay_tol_bins=delay_tol_bins, angle_tol_deg=angle_tol_deg,
            )
        else:
            matches[b] = []
    return CaseResult(
        case_id=case_id,
        k_los=k_los,
        power=rep,
        rho_los=rho_los,
        bin_estimates=estimates,
        bin_matches=matches,
        traced=list(traced),
    )


def write_case_summary_csv(fh, results: list[CaseResult]) -> None:
    """One row per case: noise, totals, LOS power and share, rho."""
    w = csv.writer(fh)
    w.writerow(
        ["case", "k_los", "p_noise_dbm", "p_rx_dbm", "p_los_dbm", "los_fraction_pct", "rho_los"]
    )
    for r in results:
        w.writerow(
            [
                r.case_id,
                r.k_los,
                f"{r.power.p_noise_dbm:.2f}",
                f"{r.power.p_rx_dbm:.2f}",
                f"{r.power.p_los_dbm:.2f}",
                f"{r.power.los_fraction_pct:.1f}",
                "" if r.rho_los is None else f"{r.rho_los:.3f}",
            ]
        )


def write_path_table_csv(fh, results: list[CaseResult]) -> None:
    """One row per detected NLOS peak per case, identified or not.

    An identified peak carries the matched interaction label; a peak whose
    estimates gate against no traced path is kept with the label
    "unidentified" rather than dropped, so the table accounts for every
    detection.
    """
    w = csv.writer(fh)
    w.writerow(["case", "path", "delay_bin", "p_nlos_dbm", "p_prime_db"])
    for r in results:
        for b, p_nlos, p_prime in zip(
            r.power.nlos_bins, r.power.p_nlos_dbm, r.power.p_prime_db
        ):
            labels = [
                m.path.interaction_label()
                for m in r.bin_matches.get(b, [])
                if m.verdict == VERDICT_TRUE
            ] or [UNIDENTIFIED]
            for lbl in labels:
                w.writerow([r.case_id, lbl, b, f"{p_nlos:.2f}", f"{p_prime:.2f}"])


def write_blockage_csv(fh, times_s: np.ndarray, series) -> None:
    """Per-scan RSSI, one column per confirmed path."""
    w = csv.writer(fh)
    w.writerow(["time_s"] + [s.label for s in series])
    for j, t in enumerate(times_s):
        w.writerow([f"{t:.4f}"] + [f"{s.rssi_dbm[j]:.2f}" for s in series])


def _estimate_json(e: PathEstimate) -> dict:
    return {
        "phi_tx_deg": e.omega_hat.phi_tx,
        "theta_tx_deg": e.omega_hat.theta_tx,
        "phi_rx_deg": e.omega_hat.phi_rx,
        "theta_rx_deg": e.omega_hat.theta_rx,
        "rssi0_dbm": round(e.rssi0_dbm, 2),
        "residual_var_db2": round(e.residual_var_db2, 4),
    }


def _match_json(m: TruePathMatch) -> dict:
    return {
        "path": m.path.interaction_label(),
        "verdict": m.verdict,
        "delay_gap_bins": m.delay_gap_bins,
        "angle_gaps_deg": None
        if m.angle_gaps_deg is None
        else [round(g, 2) for g in m.angle_gaps_deg],
        "rho": None if m.rho is None else round(m.rho, 3),
    }


def write_summary_json(fh, results: list[CaseResult]) -> None:
    """Machine-readable run summary: estimates, verdicts, and powers."""
    doc = {"cases": []}
    for r in results:
        bins = []
        for b in sorted(r.bin_estimates):
            entry = {
                "delay_bin": b,
                "is_los": b == r.k_los,
                "estimates": [_estimate_json(e) for e in r.bin_estimates[b]],
                "matches": [_match_json(m) for m in r.bin_matches.get(b, [])],
            }
            if b in r.power.nlos_bins:
                i = r.power.nlos_bins.index(b)
                entry["p_nlos_dbm"] = round(r.power.p_nlos_dbm[i], 2)
                entry["p_prime_db"] = round(r.power.p_prime_db[i], 2)
            bins.append(entry)
        doc["cases"].append(
            {
                "case": r.case_id,
                "k_los": r.k_los,
                "p_noise_dbm": round(r.power.p_noise_dbm, 2),
                "p_rx_dbm": round(r.power.p_rx_dbm, 2),
                "p_los_dbm": round(r.power.p_los_dbm, 2),
                "los_fraction_pct": round(r.power.los_fraction_pct, 1),
                "rho_los": None if r.rho_los is None else round(r.rho_los, 3),
                "bins": bins,
            }
        )
    json.dump(doc, fh, indent=2)
    fh.write("\n")


# ---------------------------------------------------------------------------
# published NLOS reference table


@dataclass(frozen=True)
class ReferenceRow:
    """One populated cell of the published per-case NLOS power table."""

    case_id: int
    path_no: int
    p_nlos_dbm: float
    p_prime_db: float


def load_reference_table(path=None) -> list[ReferenceRow]:
    """Bundled reference rows; a path argument reads an external copy."""
    if path is None:
        src = resources.files("beamscan").joinpath("data/table2_reference.csv")
        text = src.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    rows = []
    for rec in csv.DictReader(text.splitlines()):
        rows.append(
            ReferenceRow(
                case_id=int(rec["case"]),
                path_no=int(rec["path"]),
                p_nlos_dbm=float(rec["p_nlos_dbm"]),
                p_prime_db=float(rec["p_prime_db"]),
            )
        )
    if not rows:
        raise ValueError("reference table is empty")
    return rows


def implied_los_power(rows: list[ReferenceRow]) -> dict[int, float]:
    """Per-case LOS power implied by the reference rows.

    Each row states an absolute and a LOS-relative power, so P_LOS is their
    difference; the median over a case's rows absorbs the table's rounding.
    """
    by_case: dict[int, list[float]] = {}
    for r in rows:
        by_case.setdefault(r.case_id, []).append(r.p_nlos_dbm - r.p_prime_db)
    return {cid: float(np.median(v)) for cid, v in by_case.items()}


def p_prime_db(p_nlos_dbm: float, p_los_dbm: float) -> float:
    """LOS-relative NLOS power: a plain dB difference."""
    return p_nlos_dbm - p_los_dbm

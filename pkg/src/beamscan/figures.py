"""Rendered figures for the analysis reports.

Each function draws one figure straight to a file.  The CSV tables stay the
machine-readable contract; these are the human-readable companions: the
per-case LOS share, each case's averaged PDP with its detections, the
measured-vs-predicted LOS validation grid, and the blockage time series.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import OmniPdp
from .raytracer import predict_rssi
from .reports import CaseResult


def fig_case_summary(results: list[CaseResult], path) -> None:
    """LOS fraction per case, with the cross-case mean."""
    cases = [r.case_id for r in results]
    frac = [r.power.los_fraction_pct for r in results]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(cases, frac, color="#4878a8")
    mean = float(np.mean(frac))
    ax.axhline(mean, color="#b04a4a", linestyle="--", linewidth=1.2,
               label=f"mean {mean:.1f}%")
    ax.set_xlabel("case")
    ax.set_ylabel("LOS share of received power [%]")
    ax.set_xticks(cases)
    ax.set_ylim(0, 100)
    ax.legend(loc="lower right")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_omni_pdp(
    omni: OmniPdp, k_los: int, nlos_bins, p_noise_dbm: float, path, case_id: int
) -> None:
    """Averaged omni PDP with the LOS bin, NLOS peaks, and threshold."""
    p_av = 10.0 * np.log10(omni.averaged_lin_mw())
    tau = np.arange(p_av.size) * omni.sample_period_ns
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(tau, p_av, color="#4878a8", linewidth=1.0)
    ax.axhline(p_noise_dbm + 3.0, color="#999999", linestyle=":",
               linewidth=1.0, label="$P_N$ + 3 dB")
    ax.plot(tau[k_los], p_av[k_los], "v", color="#b04a4a", markersize=8,
            label=f"LOS bin {k_los}")
    if len(nlos_bins):
        nb = list(nlos_bins)
        ax.plot(tau[nb], p_av[nb], "o", mfc="none", color="#3a7d44",
                markersize=7, label="NLOS peaks")
    ax.set_xlabel("delay [ns]")
    ax.set_ylabel("$P_{av}$ [dBm]")
    ax.set_title(f"case {case_id}")
    ax.legend(loc="upper right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_rssi_validation(results: list[CaseResult], tables, path) -> None:
    """Measured vs predicted LOS RSSI vector, one panel per case."""
    n = len(results)
    ncol = 4 if n > 4 else max(n, 1)
    nrow = (n + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.4 * nrow),
                             sharex=True, squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.set_axis_off()
    for ax, r in zip(axes.ravel(), results):
        measured = r.bin_estimates[r.k_los][0].rssi_dbm
        ax.plot(measured, color="#4878a8", linewidth=0.9, label="measured")
        direct = [p for p in r.traced if p.interaction_label() == "direct"]
        if direct:
            pred = predict_rssi(r.traced, tables, direct[0]).values_dbm
            ax.plot(pred, color="#b04a4a", linewidth=0.9, alpha=0.8,
                    label="traced")
        rho = "" if r.rho_los is None else f"  $\\rho$={r.rho_los:.3f}"
        ax.set_title(f"case {r.case_id}{rho}", fontsize=9)
        ax.grid(alpha=0.3)
        ax.tick_params(labelsize=7)
    axes[0, 0].legend(fontsize=7, loc="lower right")
    fig.supxlabel("PAC index")
    fig.supylabel("RSSI [dBm]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_blockage(times_s: np.ndarray, series, p_noise_dbm: float, path) -> None:
    """Per-path RSSI over scan time with the availability threshold."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for s in series:
        ax.plot(times_s, s.rssi_dbm, linewidth=0.9, label=s.label)
    ax.axhline(p_noise_dbm + 3.0, color="#999999", linestyle=":",
               linewidth=1.0, label="$P_N$ + 3 dB")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("RSSI at best PAC [dBm]")
    ax.legend(loc="lower left", fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

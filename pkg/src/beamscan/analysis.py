"""Analysis pipeline: from the raw tensor to per-path estimates.

Order of operations for one measurement:

  1. collapse the tensor to an omnidirectional PDP (max over PACs),
  2. detect the LOS delay bin against the early-bin noise estimate,
  3. extract the 144-point directional RSSI vector at a bin of interest,
  4. least-squares search for the direction pair that explains the RSSI
     vector: exact grid search when the floor is negligible, a
     floor-censored per-side fit otherwise, with subtract-and-refit rounds
     when two arrivals share the bin,
  5. account total / LOS / excess power and normalize NLOS peaks,
  6. gate estimated paths against traced ones (delay, angles, correlation).

All power arithmetic is done in linear mW and converted to dB at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .codebook import AoaAodPair, Pac, PatternTable, combined_gain_vector, omega_in_grid
from .raytracer import RayPath, predict_rssi
from .sounder import PdpTensor, delay_to_bin

VERDICT_TRUE = "true"
VERDICT_REJECTED = "rejected"
VERDICT_NON_EXISTENT = "non-existent"


def _lin(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def _dbm(lin):
    return 10.0 * np.log10(lin)


@dataclass(frozen=True, eq=False)
class OmniPdp:
    """S(tau, j): per-scan quasi-omni PDP, max over PACs, dBm."""

    data: np.ndarray  # (N_dly, N_scan)
    sample_period_ns: float
    scan_period_s: float

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2:
            raise ValueError(f"omni PDP must be 2-D (delay, scan), got shape {d.shape}")
        object.__setattr__(self, "data", d)

    @property
    def n_dly(self) -> int:
        return self.data.shape[0]

    def averaged_lin_mw(self) -> np.ndarray:
        """P_av(tau): linear-power scan average, mW, shape (N_dly,)."""
        return _lin(self.data).mean(axis=1)


@dataclass(frozen=True, eq=False)
class PathEstimate:
    """One measured path: delay bin, RSSI vector, and the LS direction fit."""

    delay_bin: int
    rssi_dbm: np.ndarray  # (N_dir,) time-averaged directional RSSI
    omega_hat: AoaAodPair
    rssi0_dbm: float  # gain-stripped reference power at omega_hat
    residual_var_db2: float

    def __post_init__(self):
        v = np.asarray(self.rssi_dbm, dtype=float)
        if v.ndim != 1:
            raise ValueError("rssi vector must be 1-D")
        if self.residual_var_db2 < 0:
            raise ValueError("residual variance must be >= 0")
        object.__setattr__(self, "rssi_dbm", v)


@dataclass(frozen=True)
class PowerReport:
    """Noise-referenced power accounting at one detected LOS bin."""

    k_los: int
    guard_bins: int
    p_noise_dbm: float
    p_rx_dbm: float  # total excess power over the noise estimate
    p_los_dbm: float
    los_fraction_pct: float
    nlos_bins: tuple[int, ...]
    p_nlos_dbm: tuple[float, ...]
    p_prime_db: tuple[float, ...]  # NLOS power relative to LOS


@dataclass(frozen=True, eq=False)
class TruePathMatch:
    """Verdict for one traced path against a measured estimate."""

    measured_bin: int
    path: RayPath
    delay_gap_bins: int
    angle_gaps_deg: tuple[float, float, float, float] | None
    rho: float | None
    verdict: str

    def __post_init__(self):
        if self.verdict not in (VERDICT_TRUE, VERDICT_REJECTED, VERDICT_NON_EXISTENT):
            raise ValueError(f"unknown verdict {self.verdict!r}")


def synthesize_omni(tensor: PdpTensor) -> OmniPdp:
    """S(tau, j) = max_n X(tau, n, j): the best-beam proxy for an omni PDP."""
    return OmniPdp(
        data=tensor.data.max(axis=1),
        sample_period_ns=tensor.sample_period_ns,
        scan_period_s=tensor.scan_period_s,
    )


def detect_los_index(omni: OmniPdp, threshold_db: float = 6.0) -> int:
    """First delay bin whose averaged power exceeds the early-bin noise + 6 dB.

    The noise reference is the linear mean over the first 10% of bins; the
    trigger offset keeps the LOS well past that region.  Raises if nothing
    crosses the threshold.
    """
    p_av = omni.averaged_lin_mw()
    n_head = max(1, omni.n_dly // 10)
    noise = p_av[:n_head].mean()
    above = np.flatnonzero(p_av > noise * 10.0 ** (threshold_db / 10.0))
    if above.size == 0:
        raise ValueError("no signal detected: no bin exceeds the noise estimate")
    return int(above[0])


def extract_rssi(tensor: PdpTensor, delay_bin: int) -> np.ndarray:
    """Per-PAC RSSI at one delay bin: linear scan average, returned in dBm."""
    if not 0 <= delay_bin < tensor.n_dly:
        raise ValueError(f"delay bin {delay_bin} outside [0, {tensor.n_dly})")
    return _dbm(_lin(tensor.data[delay_bin]).mean(axis=1))


def _grid_candidates(table: PatternTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (az, el) grid nodes of one side, az-major, with per-beam gains.

    Returns (angles (P, 2) deg, gains (P, beams) dBi, boresight_dist2 (P,)).
    """
    az, el = np.meshgrid(table.az_grid_deg, table.el_grid_deg, indexing="ij")
    angles = np.column_stack([az.ravel(), el.ravel()])
    # gain_dbi is (beams, n_az, n_el); flatten the grid az-major
    gains = table.gain_dbi.reshape(table.beams, -1).T
    return angles, gains, (angles**2).sum(axis=1)


@lru_cache(maxsize=8)
def _scan_candidates(
    table: PatternTable, az_step: float, el_step: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (az, el) candidates over the pattern grid span, az-major.

    The stored grid quantizes at its own pitch; an off-node direction
    leaves a residual at the lobe-to-sidelobe transition beams that can
    exceed the elevation discrimination of wide beams.  Scanning a finer
    lattice (per-beam gains bilinear, same rule the synthesis uses) removes
    that bias.  Returns (angles (P, 2) deg, gains (P, beams) dBi,
    boresight_dist2 (P,)).
    """
    taz, tel, g = table.az_grid_deg, table.el_grid_deg, table.gain_dbi
    az = np.arange(taz[0], taz[-1] + az_step / 2, az_step)
    el = np.arange(tel[0], tel[-1] + el_step / 2, el_step)
    ia = np.clip(np.searchsorted(taz, az, side="right") - 1, 0, taz.size - 2)
    je = np.clip(np.searchsorted(tel, el, side="right") - 1, 0, tel.size - 2)
    wa = ((az - taz[ia]) / (taz[ia + 1] - taz[ia]))[None, :, None]
    we = ((el - tel[je]) / (tel[je + 1] - tel[je]))[None, None, :]
    gg = (
        (1 - wa) * (1 - we) * g[:, ia][:, :, je]
        + wa * (1 - we) * g[:, ia + 1][:, :, je]
        + (1 - wa) * we * g[:, ia][:, :, je + 1]
        + wa * we * g[:, ia + 1][:, :, je + 1]
    )
    angles = np.column_stack([np.repeat(az, el.size), np.tile(el, az.size)])
    gains = gg.reshape(table.beams, az.size * el.size).T
    return angles, gains, (angles**2).sum(axis=1)


def _side_argmin(score: np.ndarray, dist2: np.ndarray) -> int:
    """Index of the minimal score; ties go to the node nearest boresight,
    then to the lowest grid index."""
    best = score.min()
    tied = np.flatnonzero(score == best)
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort((tied, dist2[tied]))
    return int(tied[order[0]])


def ls_direction_find(
    rssi_dbm: np.ndarray,
    tables: tuple[PatternTable, PatternTable],
    *,
    noise_floor_dbm: float | None = None,
    delta_db: float = 2.0,
) -> PathEstimate:
    """Fit (aod, aoa) by least squares over the pattern grids.

    Model: rssi(n) = rssi0 + G_tx(beam_tx(n), omega) + G_rx(beam_rx(n), omega)
    in dB.  The estimate minimizes the per-PAC residual variance over all
    grid direction pairs; because the model is additive across the two
    sides, the centered objective splits into independent TX and RX terms
    and each side is searched on its own.

    With ``noise_floor_dbm`` the measurement is treated as signal plus
    floor power in every cell: the fit runs on the TX column and RX row
    through the strongest PAC, keeps only cells more than ``delta_db``
    above the floor (subtracting the floor power from those), and scans a
    dense angle lattice per side.  Candidates whose model would have lit a
    censored cell are penalized.
    """
    tx_table, rx_table = tables
    n_tx, n_rx = tx_table.beams, rx_table.beams
    y = np.asarray(rssi_dbm, dtype=float)
    if y.shape != (n_tx * n_rx,):
        raise ValueError(f"rssi vector must have {n_tx * n_rx} entries, got {y.shape}")
    ymat = y.reshape(n_tx, n_rx)

    if noise_floor_dbm is None:
        tx_ang, tx_gain, tx_d2 = _grid_candidates(tx_table)
        rx_ang, rx_gain, rx_d2 = _grid_candidates(rx_table)
        i_tx, i_rx, var = _fit_separable(ymat, tx_gain, rx_gain, tx_d2, rx_d2)
        model = tx_gain[i_tx][:, None] + rx_gain[i_rx][None, :]
        rssi0 = float((ymat - model).mean())
    else:
        if not (ymat > noise_floor_dbm + delta_db).any():
            raise ValueError("no PAC rises above the noise floor")
        tx_ang, tx_gain, tx_d2 = _scan_candidates(tx_table, 0.5, 1.0)
        rx_ang, rx_gain, rx_d2 = _scan_candidates(rx_table, 0.5, 1.0)
        bt, br = np.unravel_index(int(np.argmax(ymat)), ymat.shape)
        i_rx, level_rx, var_rx = _censored_side(
            ymat[bt, :], rx_gain, rx_d2, noise_floor_dbm, delta_db
        )
        i_tx, level_tx, var_tx = _censored_side(
            ymat[:, br], tx_gain, tx_d2, noise_floor_dbm, delta_db
        )
        # each side's level absorbs the fixed beam gain of the other side
        rssi0 = 0.5 * (
            (level_rx - tx_gain[i_tx, bt]) + (level_tx - rx_gain[i_rx, br])
        )
        var = 0.5 * (var_tx + var_rx)

    omega = AoaAodPair(
        phi_tx=float(tx_ang[i_tx, 0]),
        phi_rx=float(rx_ang[i_rx, 0]),
        theta_tx=float(tx_ang[i_tx, 1]),
        theta_rx=float(rx_ang[i_rx, 1]),
    )
    return PathEstimate(
        delay_bin=-1,
        rssi_dbm=y,
        omega_hat=omega,
        rssi0_dbm=rssi0,
        residual_var_db2=max(var, 0.0),
    )


def _fit_separable(ymat, tx_gain, rx_gain, tx_d2, rx_d2):
    """Additive model on all PACs: centered SS splits per side."""
    n_tx, n_rx = ymat.shape
    y0 = ymat - ymat.mean()
    row = y0.sum(axis=1)  # per TX beam
    col = y0.sum(axis=0)  # per RX beam

    u = tx_gain - tx_gain.mean(axis=1, keepdims=True)
    v = rx_gain - rx_gain.mean(axis=1, keepdims=True)
    score_tx = n_rx * (u**2).sum(axis=1) - 2.0 * u @ row
    score_rx = n_tx * (v**2).sum(axis=1) - 2.0 * v @ col

    i_tx = _side_argmin(score_tx, tx_d2)
    i_rx = _side_argmin(score_rx, rx_d2)
    ss = (y0**2).sum() + score_tx[i_tx] + score_rx[i_rx]
    return i_tx, i_rx, ss / (n_tx * n_rx)


def _censored_side(yline, gains, d2, floor_dbm, delta_db):
    """Censored fit of one side's pattern to a single scan line.

    The floor contributes its power to every cell, so a bright cell's
    signal part is the measured power minus the floor power.  Cells within
    ``delta_db`` of the floor carry no usable level, only the bound that
    the model must not have lit them; a candidate predicting signal above
    that bound there pays a quadratic penalty.
    """
    bright = yline > floor_dbm + delta_db
    floor_lin = 10.0 ** (floor_dbm / 10.0)
    ysig = _dbm(np.maximum(_lin(yline[bright]) - floor_lin, 1e-30))
    gb = gains[:, bright]  # (P, k)
    level = (ysig[None, :] - gb).mean(axis=1)
    resid = ysig[None, :] - gb - level[:, None]
    var = (resid**2).mean(axis=1)
    dark = ~bright
    if dark.any():
        # the faintest signal a bright cell could hold
        bound = floor_dbm + _dbm(10.0 ** (delta_db / 10.0) - 1.0)
        viol = np.maximum(0.0, level[:, None] + gains[:, dark] - bound)
        score = var + (viol**2).sum(axis=1) / int(bright.sum())
    else:
        score = var
    w = _side_argmin(score, d2)
    return w, float(level[w]), float(var[w])


def correlation_rho(a_dbm: np.ndarray, b_dbm: np.ndarray) -> float:
    """Pearson correlation of two per-PAC power vectors in the dB domain."""
    a = np.asarray(a_dbm, dtype=float)
    b = np.asarray(b_dbm, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("correlation needs two equal-length vectors")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ValueError("correlation undefined for a constant vector")
    return float(np.corrcoef(a, b)[0, 1])


def _estimate_model_map(est: PathEstimate, tables) -> np.ndarray:
    """Per-PAC model of one estimate: rssi0 + both beam gains, dBm."""
    w = est.omega_hat
    gt = tables[0].beam_gains(w.phi_tx, w.theta_tx)
    gr = tables[1].beam_gains(w.phi_rx, w.theta_rx)
    return est.rssi0_dbm + gt[:, None] + gr[None, :]


def estimate_paths(
    tensor: PdpTensor,
    delay_bin: int,
    tables: tuple[PatternTable, PatternTable],
    max_paths: int = 2,
    delta_db: float = 2.0,
) -> list[PathEstimate]:
    """Direction estimates at one delay bin, strongest arrival first.

    Two reflections of equal length land in the same bin and superpose;
    one additive-model fit can then explain neither.  After the first fit
    the modelled arrival is subtracted (linear domain) and the remainder is
    fit again; if that second estimate is a genuine arrival rather than the
    first one's own fitting residue, each is refit with the other removed
    from the measurement.

    Guards, in order: the remainder must rise above floor + delta + 1 dB;
    the second peak PAC must sit more than one beam away from the first in
    either dimension; a refit replaces an estimate only when it lowers the
    residual variance.
    """
    floor = tensor.noise_floor_dbm
    rssi = extract_rssi(tensor, delay_bin)
    first = replace(
        ls_direction_find(rssi, tables, noise_floor_dbm=floor, delta_db=delta_db),
        delay_bin=delay_bin,
    )
    if max_paths < 2:
        return [first]

    n_tx, n_rx = tables[0].beams, tables[1].beams
    y_lin = _lin(rssi).reshape(n_tx, n_rx)
    floor_lin = 10.0 ** (floor / 10.0)

    def _fit(map_lin: np.ndarray) -> PathEstimate:
        return replace(
            ls_direction_find(
                _dbm(map_lin).ravel(), tables, noise_floor_dbm=floor, delta_db=delta_db
            ),
            delay_bin=delay_bin,
        )

    remainder = y_lin - floor_lin - _lin(_estimate_model_map(first, tables))
    if not (remainder > floor_lin * (10.0 ** ((delta_db + 1.0) / 10.0) - 1.0)).any():
        return [first]
    pk1 = np.unravel_index(int(np.argmax(rssi)), (n_tx, n_rx))
    pk2 = np.unravel_index(int(np.argmax(remainder)), (n_tx, n_rx))
    if max(abs(pk2[0] - pk1[0]), abs(pk2[1] - pk1[1])) <= 1:
        return [first]
    second = _fit(np.maximum(remainder, 0.0) + floor_lin)

    def _without(est: PathEstimate) -> np.ndarray:
        # the measurement keeps its floor; only the other arrival is removed
        return np.maximum(y_lin - _lin(_estimate_model_map(est, tables)), floor_lin * 1e-3)

    refit1 = _fit(_without(second))
    if refit1.residual_var_db2 < first.residual_var_db2:
        first = refit1
    refit2 = _fit(_without(first))
    if refit2.residual_var_db2 < second.residual_var_db2:
        second = refit2
    return [first, second]


def estimate_path(
    tensor: PdpTensor,
    delay_bin: int,
    tables: tuple[PatternTable, PatternTable],
) -> PathEstimate:
    """Strongest-arrival direction estimate at one delay bin."""
    return estimate_paths(tensor, delay_bin, tables)[0]


def power_report(
    omni: OmniPdp,
    k_los: int,
    nlos_bins: tuple[int, ...] = (),
    guard_bins: int = 5,
) -> PowerReport:
    """Noise-referenced power split at the detected LOS bin.

    The noise power P_N is the linear mean of P_av over the pre-LOS bins
    [0, k_los - guard); every reported power is the per-bin excess over P_N
    (clamped at zero).  P' of an NLOS bin is its excess relative to the LOS
    excess, in dB.
    """
    if k_los - guard_bins < 1:
        raise ValueError("insufficient pre-LOS region for a noise estimate")
    p_av = omni.averaged_lin_mw()
    if not 0 <= k_los < p_av.size:
        raise ValueError(f"LOS bin {k_los} outside the delay window")
    p_n = p_av[: k_los - guard_bins].mean()
    excess = np.maximum(p_av - p_n, 0.0)
    p_rx = excess.sum()
    p_los = excess[k_los]
    if p_los <= 0:
        raise ValueError("LOS bin does not exceed the noise estimate")
    nlos_p = tuple(float(_dbm(excess[b])) if excess[b] > 0 else -np.inf for b in nlos_bins)
    p_prime = tuple(
        float(_dbm(excess[b] / p_los)) if excess[b] > 0 else -np.inf for b in nlos_bins
    )
    return PowerReport(
        k_los=k_los,
        guard_bins=guard_bins,
        p_noise_dbm=float(_dbm(p_n)),
        p_rx_dbm=float(_dbm(p_rx)),
        p_los_dbm=float(_dbm(p_los)),
        los_fraction_pct=float(100.0 * p_los / p_rx),
        nlos_bins=tuple(int(b) for b in nlos_bins),
        p_nlos_dbm=nlos_p,
        p_prime_db=p_prime,
    )


def detect_nlos_peaks(
    omni: OmniPdp,
    k_los: int,
    p_noise_dbm: float,
    threshold_db: float = 3.0,
    min_separation_bins: int = 2,
) -> tuple[int, ...]:
    """Local maxima of P_av after the LOS bin, above P_N + threshold.

    Greedy by power: a weaker maximum within ``min_separation_bins`` of an
    accepted one is folded into it.  Returned sorted by delay.
    """
    p_av = omni.averaged_lin_mw()
    floor = 10.0 ** (p_noise_dbm / 10.0) * 10.0 ** (threshold_db / 10.0)
    cands = []
    for k in range(k_los + 1, p_av.size):
        if p_av[k] <= floor:
            continue
        left = p_av[k - 1] if k - 1 >= 0 else -np.inf
        right = p_av[k + 1] if k + 1 < p_av.size else -np.inf
        if p_av[k] > left and p_av[k] >= right:
            cands.append(k)
    cands.sort(key=lambda k: -p_av[k])
    accepted: list[int] = []
    for k in cands:
        if all(abs(k - a) >= min_separation_bins for a in accepted):
            accepted.append(k)
    return tuple(sorted(accepted))


def match_candidates(
    estimate: PathEstimate,
    traced: list[RayPath],
    tables: tuple[PatternTable, PatternTable],
    sample_period_ns: float,
    delay_offset_ns: float,
    delay_tol_bins: int = 1,
    angle_tol_deg: float = 5.0,
) -> list[TruePathMatch]:
    """Gate traced paths against one measured estimate.

    A traced path whose bin misses the measured bin by more than the delay
    tolerance cannot explain the peak: non-existent.  Within the gate, all
    four angle gaps must close under the tolerance or the path is rejected.
    Among full-gate survivors the one whose predicted RSSI pattern
    correlates best with the measurement is the true path; the rest are
    rejected.
    """
    gaps_and_bins = []
    for p in traced:
        k = delay_to_bin(p.delay_ns, sample_period_ns, delay_offset_ns)
        gaps_and_bins.append((p, k - estimate.delay_bin))

    results: dict[int, TruePathMatch] = {}
    survivors: list[tuple[int, RayPath, tuple, float]] = []
    for idx, (p, dgap) in enumerate(gaps_and_bins):
        if abs(dgap) > delay_tol_bins:
            results[idx] = TruePathMatch(
                measured_bin=estimate.delay_bin,
                path=p,
                delay_gap_bins=dgap,
                angle_gaps_deg=None,
                rho=None,
                verdict=VERDICT_NON_EXISTENT,
            )
            continue
        w, wh = p.omega, estimate.omega_hat
        gaps = (
            abs(w.phi_tx - wh.phi_tx),
            abs(w.theta_tx - wh.theta_tx),
            abs(w.phi_rx - wh.phi_rx),
            abs(w.theta_rx - wh.theta_rx),
        )
        if max(gaps) > angle_tol_deg or not omega_in_grid(tables, p.omega):
            results[idx] = TruePathMatch(
                measured_bin=estimate.delay_bin,
                path=p,
                delay_gap_bins=dgap,
                angle_gaps_deg=gaps,
                rho=None,
                verdict=VERDICT_REJECTED,
            )
            continue
        rho = correlation_rho(estimate.rssi_dbm, predict_rssi(traced, tables, p).values_dbm)
        survivors.append((idx, p, gaps, rho))

    if survivors:
        best = max(survivors, key=lambda s: s[3])
        for idx, p, gaps, rho in survivors:
            results[idx] = TruePathMatch(
                measured_bin=estimate.delay_bin,
                path=p,
                delay_gap_bins=gaps_and_bins[idx][1],
                angle_gaps_deg=gaps,
                rho=rho,
                verdict=VERDICT_TRUE if idx == best[0] else VERDICT_REJECTED,
            )
    return [results[i] for i in range(len(traced))]


def match_bin(
    estimates: list[PathEstimate],
    traced: list[RayPath],
    tables: tuple[PatternTable, PatternTable],
    sample_period_ns: float,
    delay_offset_ns: float,
    delay_tol_bins: int = 1,
    angle_tol_deg: float = 5.0,
) -> list[TruePathMatch]:
    """Gate traced paths against every estimate of one delay bin.

    When a bin resolves into two arrivals, each traced path is matched
    against each estimate separately and the best verdict stands, so both
    arrivals can earn a true path.  All estimates share the bin, hence the
    delay gate and the non-existent set are common.
    """
    if not estimates:
        raise ValueError("at least one estimate is required")
    per_est = [
        match_candidates(
            e, traced, tables, sample_period_ns, delay_offset_ns,
            delay_tol_bins, angle_tol_deg,
        )
        for e in estimates
    ]
    rank = {VERDICT_NON_EXISTENT: 0, VERDICT_REJECTED: 1, VERDICT_TRUE: 2}
    return [
        max((ms[i] for ms in per_est), key=lambda m: rank[m.verdict])
        for i in range(len(traced))
    ]


@dataclass(frozen=True, eq=False)
class PathSeries:
    """RSSI of one confirmed path over scan time at its best PAC."""

    label: str
    delay_bin: int
    pac: Pac
    rssi_dbm: np.ndarray  # (N_scan,)


def blockage_timeseries(
    tensor: PdpTensor,
    matches: list[TruePathMatch],
    tables: tuple[PatternTable, PatternTable],
) -> tuple[np.ndarray, list[PathSeries]]:
    """Per-scan RSSI of every confirmed path at its strongest PAC.

    The PAC is the argmax of the path's own predicted directional
    signature, not of the shared measurement: two equal-delay arrivals in
    one bin would otherwise both be tracked at the stronger one's lobe.
    """
    series = []
    for m in matches:
        if m.verdict != VERDICT_TRUE:
            continue
        sig = combined_gain_vector(tables[0], tables[1], m.path.omega)
        n = int(np.argmax(sig))
        series.append(
            PathSeries(
                label=m.path.interaction_label(),
                delay_bin=m.measured_bin,
                pac=Pac.from_index(n, tables[1].beams),
                rssi_dbm=tensor.data[m.measured_bin, n, :].copy(),
            )
        )
    return tensor.scan_times_s(), series

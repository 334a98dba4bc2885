"""Analysis pipeline units: omni PDP, detection, LS fits, matching."""

import numpy as np
import pytest

from beamscan import (
    AoaAodPair,
    OmniPdp,
    PdpTensor,
    SimConfig,
    blockage_timeseries,
    correlation_rho,
    delay_to_bin,
    detect_los_index,
    detect_nlos_peaks,
    estimate_path,
    estimate_paths,
    extract_rssi,
    ls_direction_find,
    match_bin,
    match_candidates,
    power_report,
    predict_rssi,
    synthesize_omni,
    synthesize_tensor,
)


def _omni(values_dbm):
    return OmniPdp(
        data=np.asarray(values_dbm, dtype=float)[:, None],
        sample_period_ns=0.8,
        scan_period_s=3.2e-3,
    )


def test_omni_is_max_over_pacs():
    data = np.full((4, 6, 3), -84.0)
    data[2, 4, 1] = -50.0
    omni = synthesize_omni(PdpTensor(data=data))
    assert omni.data.shape == (4, 3)
    assert omni.data[2, 1] == -50.0
    assert omni.data[2, 0] == -84.0


def test_averaged_power_is_linear_mean():
    omni = OmniPdp(
        data=np.array([[-50.0, -60.0]]), sample_period_ns=0.8, scan_period_s=3.2e-3
    )
    assert 10 * np.log10(omni.averaged_lin_mw()[0]) == pytest.approx(-52.596373, abs=1e-5)


def test_extract_rssi_scan_average(tables):
    data = np.full((8, 144, 2), -84.0)
    data[5, 7, 0] = -50.0
    data[5, 7, 1] = -60.0
    x = PdpTensor(data=data)
    rssi = extract_rssi(x, 5)
    assert rssi.shape == (144,)
    assert rssi[7] == pytest.approx(-52.596373, abs=1e-5)
    with pytest.raises(ValueError):
        extract_rssi(x, 8)


def test_los_detection_threshold():
    vals = np.full(100, -84.0)
    vals[40] = -77.0  # 7 dB over the early-bin mean: triggers
    assert detect_los_index(_omni(vals)) == 40
    vals2 = np.full(100, -84.0)
    vals2[40] = -79.0  # 5 dB: does not
    with pytest.raises(ValueError):
        detect_los_index(_omni(vals2))
    # first crossing wins even if later bins are stronger
    vals3 = np.full(100, -84.0)
    vals3[30] = -70.0
    vals3[50] = -50.0
    assert detect_los_index(_omni(vals3)) == 30


def test_power_report_oracles():
    vals = np.full(20, -84.0)
    vals[10] = -50.0
    vals[14] = -60.0
    rep = power_report(_omni(vals), k_los=10, nlos_bins=(14,), guard_bins=5)
    assert rep.p_noise_dbm == pytest.approx(-84.0, abs=1e-9)
    assert rep.p_rx_dbm == pytest.approx(-49.589218, abs=1e-5)
    assert rep.p_los_dbm == pytest.approx(-50.001729, abs=1e-5)
    assert rep.los_fraction_pct == pytest.approx(90.938724, abs=1e-4)
    assert rep.p_nlos_dbm[0] == pytest.approx(-60.017324, abs=1e-5)
    assert rep.p_prime_db[0] == pytest.approx(-10.015595, abs=1e-5)
    with pytest.raises(ValueError):
        power_report(_omni(vals), k_los=3, guard_bins=5)  # no pre-LOS region


def test_nlos_peak_detection():
    vals = np.full(40, -84.0)
    vals[10] = -50.0  # LOS
    vals[13] = -70.0
    vals[14] = -60.0  # peak
    vals[15] = -75.0
    vals[16] = -62.0  # peak, 2 bins from the previous
    vals[20] = -82.0  # below P_N + 3
    omni = _omni(vals)
    assert detect_nlos_peaks(omni, 10, -84.0) == (14, 16)
    # wider separation folds the weaker peak into the stronger
    assert detect_nlos_peaks(omni, 10, -84.0, min_separation_bins=3) == (14,)
    # threshold is relative to the supplied noise estimate
    assert detect_nlos_peaks(omni, 10, -84.0, threshold_db=30.0) == ()


def test_correlation_against_numpy():
    rng = np.random.default_rng(3)
    a = rng.normal(-60, 5, 144)
    b = 0.7 * a + rng.normal(0, 2, 144)
    assert correlation_rho(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)
    assert correlation_rho(a, a) == pytest.approx(1.0, abs=1e-12)
    assert correlation_rho(a, -a) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        correlation_rho(np.zeros(5), a[:5])


def _rssi_for(tables, omega, rssi0=-49.0):
    gt = tables[0].beam_gains(omega.phi_tx, omega.theta_tx)
    gr = tables[1].beam_gains(omega.phi_rx, omega.theta_rx)
    return rssi0 + gt[:, None] + gr[None, :]


def test_ls_exact_recovery_on_grid(tables):
    omega = AoaAodPair(phi_tx=12.0, phi_rx=-30.0, theta_tx=6.0, theta_rx=-10.0)
    est = ls_direction_find(_rssi_for(tables, omega).ravel(), tables)
    assert est.omega_hat == omega
    # zero up to double-precision accumulation noise
    assert est.residual_var_db2 < 1e-12
    assert est.rssi0_dbm == pytest.approx(-49.0, abs=1e-9)


def test_ls_censored_fit_strips_floor(tables):
    # weak arrival: most PACs sit under the floor, the fit must de-floor
    omega = AoaAodPair(phi_tx=20.0, phi_rx=-20.0, theta_tx=0.0, theta_rx=0.0)
    clean = _rssi_for(tables, omega, rssi0=-95.0)
    floor = -84.0
    meas = 10.0 * np.log10(10.0 ** (clean / 10.0) + 10.0 ** (floor / 10.0))
    est = ls_direction_find(meas.ravel(), tables, noise_floor_dbm=floor)
    assert abs(est.omega_hat.phi_tx - 20.0) <= 1.0
    assert abs(est.omega_hat.phi_rx + 20.0) <= 1.0
    assert abs(est.omega_hat.theta_tx) <= 2.0
    assert abs(est.omega_hat.theta_rx) <= 2.0
    assert est.rssi0_dbm == pytest.approx(-95.0, abs=0.5)


def test_ls_censored_requires_signal(tables):
    flat = np.full(144, -84.0)
    with pytest.raises(ValueError):
        ls_direction_find(flat, tables, noise_floor_dbm=-84.0)


def test_estimate_paths_separates_mirror_arrivals(tables, traced_paths, case_paths):
    paths = case_paths(8)
    by_label = {p.interaction_label(): p for p in paths}
    left, right = by_label["R:pole_left"], by_label["R:pole_right"]
    cfg = SimConfig(n_scan=25, noise_floor_dbm=-84.0, rng_seed=11)
    x = synthesize_tensor(traced_paths(8), tables, cfg)
    k = delay_to_bin(left.delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
    ests = estimate_paths(x, k, tables)
    assert len(ests) == 2
    got_phi_rx = sorted(e.omega_hat.phi_rx for e in ests)
    want_phi_rx = sorted((left.omega.phi_rx, right.omega.phi_rx))
    assert got_phi_rx[0] == pytest.approx(want_phi_rx[0], abs=2.0)
    assert got_phi_rx[1] == pytest.approx(want_phi_rx[1], abs=2.0)


def test_estimate_path_single_arrival_stays_single(tables, traced_paths, case_paths):
    paths = case_paths(8)
    cfg = SimConfig(n_scan=25, noise_floor_dbm=-84.0, rng_seed=11)
    x = synthesize_tensor(traced_paths(8), tables, cfg)
    k = delay_to_bin(paths[0].delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
    assert len(estimate_paths(x, k, tables)) == 1
    est = estimate_path(x, k, tables)
    assert abs(est.omega_hat.phi_tx - paths[0].omega.phi_tx) <= 2.0
    assert abs(est.omega_hat.theta_rx - paths[0].omega.theta_rx) <= 2.0


def test_match_verdict_taxonomy(tables, traced_paths, case_paths):
    paths = case_paths(8)
    cfg = SimConfig(n_scan=25, noise_floor_dbm=-84.0, rng_seed=11)
    x = synthesize_tensor(traced_paths(8), tables, cfg)
    k_los = delay_to_bin(paths[0].delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
    est = estimate_path(x, k_los, tables)
    matches = match_candidates(
        est, paths, tables, cfg.sample_period_ns, cfg.delay_offset_ns
    )
    verdicts = {p.interaction_label(): m.verdict for p, m in zip(paths, matches)}
    assert verdicts["direct"] == "true"
    # every other path misses the LOS bin by more than the delay gate
    for label, v in verdicts.items():
        if label != "direct":
            assert v == "non-existent"
    true_match = matches[0]
    assert true_match.rho is not None and true_match.rho > 0.99
    assert max(true_match.angle_gaps_deg) <= 5.0


def test_match_bin_keeps_best_verdict_per_path(tables, traced_paths, case_paths):
    paths = case_paths(8)
    by_label = {p.interaction_label(): p for p in paths}
    left = by_label["R:pole_left"]
    cfg = SimConfig(n_scan=25, noise_floor_dbm=-84.0, rng_seed=11)
    x = synthesize_tensor(traced_paths(8), tables, cfg)
    k = delay_to_bin(left.delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
    ests = estimate_paths(x, k, tables)
    matches = match_bin(ests, paths, tables, cfg.sample_period_ns, cfg.delay_offset_ns)
    verdicts = {p.interaction_label(): m.verdict for p, m in zip(paths, matches)}
    assert verdicts["R:pole_left"] == "true"
    assert verdicts["R:pole_right"] == "true"
    with pytest.raises(ValueError):
        match_bin([], paths, tables, cfg.sample_period_ns, cfg.delay_offset_ns)


def test_blockage_series_uses_per_path_beams(tables, traced_paths, case_paths):
    paths = case_paths(8)
    by_label = {p.interaction_label(): p for p in paths}
    left = by_label["R:pole_left"]
    cfg = SimConfig(n_scan=25, noise_floor_dbm=-84.0, rng_seed=11)
    x = synthesize_tensor(traced_paths(8), tables, cfg)
    k = delay_to_bin(left.delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
    ests = estimate_paths(x, k, tables)
    matches = match_bin(ests, paths, tables, cfg.sample_period_ns, cfg.delay_offset_ns)
    times, series = blockage_timeseries(x, matches, tables)
    labels = {s.label for s in series}
    assert labels == {"R:pole_left", "R:pole_right"}
    pacs = {s.label: s.pac for s in series}
    # mirror arrivals share a delay bin but not a beam pair
    assert pacs["R:pole_left"] != pacs["R:pole_right"]
    assert times.shape == (25,)
    for s in series:
        assert s.rssi_dbm.shape == (25,)

"""Measurement tensor synthesis: X(tau, n, j) in dBm.

Each scan sweeps all PACs and records one PDP per PAC; a measurement is the
stack of N_scan scans.  Traced paths land in delay bins, powers add in
linear mW, a constant noise floor underlies every bin, and per-sample
log-domain jitter rides on top.  A blocker trajectory attenuates the paths
it intersects scan by scan.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .codebook import PatternTable, combined_gain_vector, omega_in_grid
from .raytracer import RayPath
from .scene import BlockerTrajectory, blocker_position, segment_segment_distance

TENSOR_MAGIC = b"BSCN"
TENSOR_VERSION = 1
TENSOR_UNITS = b"dBm\x00"


@dataclass(frozen=True, eq=False)
class PdpTensor:
    """X(tau, n, j): delay bin x PAC x scan, dBm."""

    data: np.ndarray  # (N_dly, N_dir, N_scan) float
    sample_period_ns: float = 0.8
    scan_period_s: float = 3.2e-3
    noise_floor_dbm: float = -74.0

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 3:
            raise ValueError(f"tensor must be 3-D (delay, PAC, scan), got shape {d.shape}")
        if not np.isfinite(d).all():
            raise ValueError("tensor values must be finite")
        if self.sample_period_ns <= 0 or self.scan_period_s <= 0:
            raise ValueError("sample and scan periods must be positive")
        object.__setattr__(self, "data", d)

    @property
    def n_dly(self) -> int:
        return self.data.shape[0]

    @property
    def n_dir(self) -> int:
        return self.data.shape[1]

    @property
    def n_scan(self) -> int:
        return self.data.shape[2]

    def scan_times_s(self) -> np.ndarray:
        return np.arange(self.n_scan) * self.scan_period_s


@dataclass(frozen=True)
class SimConfig:
    """Sounder model knobs; defaults mirror the measured system geometry."""

    n_dly: int = 192
    n_scan: int = 1750
    sample_period_ns: float = 0.8
    scan_period_s: float = 3.2e-3
    delay_offset_ns: float = 16.3  # trigger offset: puts the LOS past bin 20
    noise_floor_dbm: float = -74.0
    noise_sigma_db: float = 0.1
    rng_seed: int = 0
    pulse_spread: bool = False  # optional 3-tap raised-cosine pulse
    case_id: int | None = None

    def __post_init__(self):
        if self.n_dly < 1 or self.n_scan < 1:
            raise ValueError("tensor dims must be >= 1")
        if self.noise_sigma_db < 0:
            raise ValueError("noise sigma must be >= 0")
        if self.sample_period_ns <= 0 or self.scan_period_s <= 0:
            raise ValueError("sample and scan periods must be positive")


def delay_to_bin(delay_ns: float, sample_period_ns: float, delay_offset_ns: float = 0.0) -> int:
    """Nearest delay bin for a path delay after the trigger offset."""
    return int(math.floor((delay_ns + delay_offset_ns) / sample_period_ns + 0.5))


# raised-cosine 3-tap power split used when pulse_spread is on
_SPREAD_TAPS = (0.25, 0.5, 0.25)


def blockage_attenuation(p: RayPath, scan_time_s: float, traj: BlockerTrajectory | None) -> float:
    """Attenuation (dB) the blocker imposes on path p at one scan time.

    Zero when there is no blocker, the time lies outside the walk, or every
    path segment clears the cylinder.  The edge is smoothed with a raised
    cosine over ``traj.transition_m`` beyond the radius.
    """
    if traj is None:
        return 0.0
    if not traj.t_start <= scan_time_s <= traj.t_end:
        return 0.0
    base = blocker_position(traj, scan_time_s).xyz
    top = base + np.array([0.0, 0.0, traj.height_m])

    verts = [v.xyz for v in p.vertices]
    dmin = min(
        segment_segment_distance(verts[k], verts[k + 1], base, top) for k in range(len(verts) - 1)
    )
    if dmin <= traj.radius_m:
        return traj.attenuation_db
    edge = dmin - traj.radius_m
    if traj.transition_m > 0 and edge < traj.transition_m:
        return traj.attenuation_db * 0.5 * (1.0 + math.cos(math.pi * edge / traj.transition_m))
    return 0.0


def synthesize_tensor(
    paths: list,
    tables: tuple[PatternTable, PatternTable],
    cfg: SimConfig,
    traj: BlockerTrajectory | None = None,
) -> PdpTensor:
    """Simulate the measurement tensor for one case.

    Per scan j (time j * scan_period) and PAC n, every path contributes
    linear power 10^((path_gain + G(n, omega) - blockage)/10) to its delay
    bin; bins then gain the constant noise floor, convert to dBm, and take
    N(0, sigma^2) log-domain jitter from per-scan substreams of the seed.

    Paths whose omega falls outside the pattern grids carry no modeled
    antenna gain and are skipped.  A path delay past the window is an error.
    """
    tx_table, rx_table = tables
    n_dir = tx_table.beams * rx_table.beams
    times = np.arange(cfg.n_scan) * cfg.scan_period_s

    # per-bin accumulation of (n_dir, n_scan) linear signal power
    acc: dict[int, np.ndarray] = {}
    for p in paths:
        k = delay_to_bin(p.delay_ns, cfg.sample_period_ns, cfg.delay_offset_ns)
        taps = [(k - 1, _SPREAD_TAPS[0]), (k, _SPREAD_TAPS[1]), (k + 1, _SPREAD_TAPS[2])] if cfg.pulse_spread else [(k, 1.0)]
        for kk, _ in taps:
            if not 0 <= kk < cfg.n_dly:
                raise ValueError(
                    f"path delay {p.delay_ns:.2f} ns lands in bin {kk}, outside window [0, {cfg.n_dly})"
                )
        if not omega_in_grid(tables, p.omega):
            continue
        gain_lin = 10.0 ** ((p.path_gain_db + combined_gain_vector(tx_table, rx_table, p.omega)) / 10.0)
        if traj is not None:
            att_db = np.array([blockage_attenuation(p, t, traj) for t in times])
            scan_scale = 10.0 ** (-att_db / 10.0)
        else:
            scan_scale = np.ones(cfg.n_scan)
        contrib = gain_lin[:, None] * scan_scale[None, :]
        for kk, w in taps:
            if kk in acc:
                acc[kk] += w * contrib
            else:
                acc[kk] = w * contrib

    floor_lin = 10.0 ** (cfg.noise_floor_dbm / 10.0)
    lin = np.full((cfg.n_dly, n_dir, cfg.n_scan), floor_lin)
    for k, contrib in acc.items():
        lin[k] += contrib

    np.log10(lin, out=lin)
    data = lin
    data *= 10.0
    if cfg.noise_sigma_db > 0:
        children = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.n_scan)
        for j, child in enumerate(children):
            rng = np.random.default_rng(child)
            data[:, :, j] += cfg.noise_sigma_db * rng.standard_normal((cfg.n_dly, n_dir))

    return PdpTensor(
        data=data,
        sample_period_ns=cfg.sample_period_ns,
        scan_period_s=cfg.scan_period_s,
        noise_floor_dbm=cfg.noise_floor_dbm,
    )


# ---------------------------------------------------------------------------
# tensor file format


def save_tensor(tensor: PdpTensor, path) -> None:
    """Write the binary tensor: BSCN header then LE float32, scan-major."""
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(
            struct.pack(
                "<IIIIfff",
                TENSOR_VERSION,
                tensor.n_dly,
                tensor.n_dir,
                tensor.n_scan,
                tensor.sample_period_ns,
                tensor.scan_period_s,
                tensor.noise_floor_dbm,
            )
        )
        fh.write(TENSOR_UNITS)
        fh.write(np.ascontiguousarray(tensor.data.transpose(2, 1, 0), dtype="<f4").tobytes())


def load_tensor(path) -> PdpTensor:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TENSOR_MAGIC:
            raise ValueError(f"{path}: not a tensor file (magic {magic!r})")
        version, n_dly, n_dir, n_scan, dt_ns, dt_scan, floor = struct.unpack("<IIIIfff", fh.read(28))
        if version != TENSOR_VERSION:
            raise ValueError(f"{path}: unsupported tensor version {version}")
        units = fh.read(4)
        if units != TENSOR_UNITS:
            raise ValueError(f"{path}: unexpected units tag {units!r}")
        raw = np.frombuffer(fh.read(4 * n_dly * n_dir * n_scan), dtype="<f4")
        if raw.size != n_dly * n_dir * n_scan:
            raise ValueError(f"{path}: truncated data block")
    data = raw.reshape(n_scan, n_dir, n_dly).transpose(2, 1, 0).astype(float)
    return PdpTensor(
        data=data,
        sample_period_ns=float(dt_ns),
        scan_period_s=float(dt_scan),
        noise_floor_dbm=float(floor),
    )

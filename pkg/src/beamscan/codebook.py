"""Beam codebooks, combined directionality, and frame transforms.

The sounder steps both arrays through fixed codebooks of 12 beams; a PAC
(pointing angle combination) is one (TX beam, RX beam) pair, 144 in total.
Real pattern tables are loaded from the binary table format; the synthetic
codebook stands in when measured patterns are unavailable.

Frame conventions: mount azimuth is positive for clockwise rotation viewed
from above, elevation positive for up-tilt.  Local beam angles use the same
sense, so a direction at global clockwise-azimuth a seen from a mount at
azimuth A sits at local azimuth a - A.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .scene import NodePose

PATTERN_MAGIC = b"BSPT"
PATTERN_VERSION = 1

DEFAULT_AZ_STEP_DEG = 2.0
DEFAULT_AZ_SPAN_DEG = 90.0  # grid covers +/- this
DEFAULT_EL_SPAN_DEG = 45.0


@dataclass(frozen=True)
class Pac:
    """One pointing angle combination (TX beam, RX beam)."""

    tx_beam: int
    rx_beam: int

    def index(self, n_rx_beams: int) -> int:
        return self.tx_beam * n_rx_beams + self.rx_beam

    @classmethod
    def from_index(cls, n: int, n_rx_beams: int) -> "Pac":
        if n < 0:
            raise ValueError(f"PAC index must be >= 0, got {n}")
        return cls(tx_beam=n // n_rx_beams, rx_beam=n % n_rx_beams)


@dataclass(frozen=True)
class AoaAodPair:
    """Departure/arrival angles in each array's local frame, degrees."""

    phi_tx: float
    phi_rx: float
    theta_tx: float
    theta_rx: float

    def __post_init__(self):
        for v in (self.phi_tx, self.phi_rx, self.theta_tx, self.theta_rx):
            if not math.isfinite(v):
                raise ValueError(f"non-finite angle in {self!r}")

    def as_tuple(self) -> tuple:
        return (self.phi_tx, self.phi_rx, self.theta_tx, self.theta_rx)


@dataclass(frozen=True)
class OrientationCase:
    """One row of the measurement orientation table (case 1..12)."""

    case_id: int
    theta_tx_deg: float
    theta_rx_deg: float
    phi_tx_deg: float
    phi_rx_deg: float


@dataclass(frozen=True, eq=False)
class PatternTable:
    """Per-beam gain table gain(c, az, el) in dBi on a rectangular grid."""

    az_grid_deg: np.ndarray
    el_grid_deg: np.ndarray
    gain_dbi: np.ndarray  # (beams, n_az, n_el)

    def __post_init__(self):
        az = np.asarray(self.az_grid_deg, dtype=float)
        el = np.asarray(self.el_grid_deg, dtype=float)
        g = np.asarray(self.gain_dbi, dtype=float)
        if az.ndim != 1 or el.ndim != 1:
            raise ValueError("pattern grids must be 1-D")
        if np.any(np.diff(az) <= 0) or np.any(np.diff(el) <= 0):
            raise ValueError("pattern grids must be strictly increasing")
        if g.ndim != 3 or g.shape[1] != az.size or g.shape[2] != el.size:
            raise ValueError(f"gain table shape {g.shape} does not match grids ({az.size}, {el.size})")
        if not np.isfinite(g).all():
            raise ValueError("pattern gains must be finite")
        peaks = g.max(axis=(1, 2))
        if np.any(peaks < 0.0) or np.any(peaks > 40.0):
            raise ValueError(f"per-beam peak gain outside [0, 40] dBi: {peaks}")
        object.__setattr__(self, "az_grid_deg", az)
        object.__setattr__(self, "el_grid_deg", el)
        object.__setattr__(self, "gain_dbi", g)

    @property
    def beams(self) -> int:
        return self.gain_dbi.shape[0]

    def beam_gains(self, phi_deg: float, theta_deg: float) -> np.ndarray:
        """All per-beam gains at one (az, el), bilinear, shape (beams,)."""
        az, el = self.az_grid_deg, self.el_grid_deg
        if not (az[0] <= phi_deg <= az[-1]) or not (el[0] <= theta_deg <= el[-1]):
            raise ValueError(
                f"angles (az={phi_deg:.2f}, el={theta_deg:.2f}) outside pattern grid "
                f"[{az[0]}, {az[-1]}] x [{el[0]}, {el[-1]}]"
            )
        i = min(int(np.searchsorted(az, phi_deg, side="right")) - 1, az.size - 2)
        j = min(int(np.searchsorted(el, theta_deg, side="right")) - 1, el.size - 2)
        i = max(i, 0)
        j = max(j, 0)
        wa = (phi_deg - az[i]) / (az[i + 1] - az[i])
        we = (theta_deg - el[j]) / (el[j + 1] - el[j])
        g = self.gain_dbi
        return (
            (1 - wa) * (1 - we) * g[:, i, j]
            + wa * (1 - we) * g[:, i + 1, j]
            + (1 - wa) * we * g[:, i, j + 1]
            + wa * we * g[:, i + 1, j + 1]
        )


def combined_gain(tables: tuple[PatternTable, PatternTable], n: Pac, omega: AoaAodPair) -> float:
    """G(n, omega) = TX beam gain + RX beam gain, both bilinear, in dB."""
    tx_table, rx_table = tables
    gtx = tx_table.beam_gains(omega.phi_tx, omega.theta_tx)[n.tx_beam]
    grx = rx_table.beam_gains(omega.phi_rx, omega.theta_rx)[n.rx_beam]
    return float(gtx + grx)


def combined_gain_vector(tx_table: PatternTable, rx_table: PatternTable, omega: AoaAodPair) -> np.ndarray:
    """Combined gain for every PAC at once, shape (tx_beams * rx_beams,).

    Row-major PAC order: n = tx_beam * rx_beams + rx_beam.
    """
    gtx = tx_table.beam_gains(omega.phi_tx, omega.theta_tx)
    grx = rx_table.beam_gains(omega.phi_rx, omega.theta_rx)
    return (gtx[:, None] + grx[None, :]).reshape(-1)


def omega_in_grid(tables: tuple[PatternTable, PatternTable], omega: AoaAodPair) -> bool:
    """True when both ends of omega fall inside their pattern grids."""
    tx_table, rx_table = tables
    return bool(
        tx_table.az_grid_deg[0] <= omega.phi_tx <= tx_table.az_grid_deg[-1]
        and tx_table.el_grid_deg[0] <= omega.theta_tx <= tx_table.el_grid_deg[-1]
        and rx_table.az_grid_deg[0] <= omega.phi_rx <= rx_table.az_grid_deg[-1]
        and rx_table.el_grid_deg[0] <= omega.theta_rx <= rx_table.el_grid_deg[-1]
    )


def synth_codebook(
    beams: int = 12,
    hpbw_deg: float = 16.0,
    peak_gain_dbi: float = 12.0,
    steering_span_deg: float = 120.0,
    *,
    el_hpbw_deg: float = 50.0,
    el_tilt_cycle: tuple = (0.0, -20.0, 20.0),
    sidelobe_rel_db: float = 20.0,
    az_step_deg: float = DEFAULT_AZ_STEP_DEG,
    az_span_deg: float = DEFAULT_AZ_SPAN_DEG,
    el_span_deg: float = DEFAULT_EL_SPAN_DEG,
) -> PatternTable:
    """Build a synthetic fixed-beam codebook.

    Beams are steered uniformly in azimuth across the span, each with a
    Gaussian main lobe (parabolic in dB, -3 dB at +/- hpbw/2) over a flat
    sidelobe floor ``peak - sidelobe_rel_db``.  Lobe and floor combine in
    linear power so the table has no hard plateau.  Beams additionally cycle
    through small elevation tilts, standing in for the elevation diversity
    of measured codebooks; without it every beam would share one elevation
    response and arrival elevation would be unobservable downstream.
    """
    if beams < 1:
        raise ValueError("beams must be >= 1")
    if hpbw_deg <= 0 or el_hpbw_deg <= 0:
        raise ValueError("hpbw must be positive")
    if steering_span_deg < 0:
        raise ValueError("steering span must be >= 0")

    az_grid = np.arange(-az_span_deg, az_span_deg + 1e-9, az_step_deg)
    el_grid = np.arange(-el_span_deg, el_span_deg + 1e-9, az_step_deg)
    half = steering_span_deg / 2.0
    az_centers = np.linspace(-half, half, beams) if beams > 1 else np.array([0.0])
    el_centers = np.array([el_tilt_cycle[c % len(el_tilt_cycle)] for c in range(beams)])

    # dB-domain parabola == Gaussian lobe: down 3 dB at half the HPBW
    az_pen = 12.0 * ((az_grid[None, :] - az_centers[:, None]) / hpbw_deg) ** 2
    el_pen = 12.0 * ((el_grid[None, :] - el_centers[:, None]) / el_hpbw_deg) ** 2
    lobe_db = peak_gain_dbi - az_pen[:, :, None] - el_pen[:, None, :]
    floor_db = peak_gain_dbi - sidelobe_rel_db
    gain = 10.0 * np.log10(10.0 ** (lobe_db / 10.0) + 10.0 ** (floor_db / 10.0))
    return PatternTable(az_grid_deg=az_grid, el_grid_deg=el_grid, gain_dbi=gain)


# ---------------------------------------------------------------------------
# frame transforms


def _rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def global_to_local(pose: NodePose, direction) -> tuple[float, float]:
    """Room-frame direction -> local (azimuth, elevation) in degrees.

    Undoes the mount rotation: azimuth first (clockwise-positive from
    above), then elevation (up-tilt positive).  Inverse of local_to_global.
    """
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm < 1e-15:
        raise ValueError("zero direction vector")
    d = d / norm
    u = _rot_y(pose.mount_elevation_deg) @ (_rot_z(pose.mount_azimuth_deg) @ d)
    theta = math.degrees(math.asin(np.clip(u[2], -1.0, 1.0)))
    phi = math.degrees(math.atan2(-u[1], u[0]))
    return phi, theta


def local_to_global(pose: NodePose, phi_deg: float, theta_deg: float) -> np.ndarray:
    """Local (azimuth, elevation) -> unit direction in the room frame."""
    cp, sp = math.cos(math.radians(phi_deg)), math.sin(math.radians(phi_deg))
    ct, st = math.cos(math.radians(theta_deg)), math.sin(math.radians(theta_deg))
    u = np.array([ct * cp, -ct * sp, st])
    return _rot_z(-pose.mount_azimuth_deg) @ (_rot_y(-pose.mount_elevation_deg) @ u)


# ---------------------------------------------------------------------------
# pattern table file format


def save_pattern_table(table: PatternTable, path) -> None:
    """Write the binary pattern table: versioned header, LE float32."""
    az = table.az_grid_deg.astype("<f4")
    el = table.el_grid_deg.astype("<f4")
    g = table.gain_dbi.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(PATTERN_MAGIC)
        fh.write(struct.pack("<IIII", PATTERN_VERSION, table.beams, az.size, el.size))
        fh.write(az.tobytes())
        fh.write(el.tobytes())
        fh.write(g.tobytes(order="C"))


def load_pattern_table(path) -> PatternTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PATTERN_MAGIC:
            raise ValueError(f"{path}: not a pattern table (magic {magic!r})")
        version, beams, n_az, n_el = struct.unpack("<IIII", fh.read(16))
        if version != PATTERN_VERSION:
            raise ValueError(f"{path}: unsupported pattern table version {version}")
        az = np.frombuffer(fh.read(4 * n_az), dtype="<f4").astype(float)
        el = np.frombuffer(fh.read(4 * n_el), dtype="<f4").astype(float)
        g = np.frombuffer(fh.read(4 * beams * n_az * n_el), dtype="<f4").astype(float)
        if g.size != beams * n_az * n_el:
            raise ValueError(f"{path}: truncated gain block")
    return PatternTable(az_grid_deg=az, el_grid_deg=el, gain_dbi=g.reshape(beams, n_az, n_el))


# ---------------------------------------------------------------------------
# orientation cases


def load_orientation_cases(path) -> dict[int, OrientationCase]:
    """Parse the orientation case table (case, theta_tx, theta_rx, phi_tx, phi_rx)."""
    cases = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
            case_id = int(parts[0])
            if case_id in cases:
                raise ValueError(f"{path}:{lineno}: duplicate case id {case_id}")
            cases[case_id] = OrientationCase(
                case_id=case_id,
                theta_tx_deg=float(parts[1]),
                theta_rx_deg=float(parts[2]),
                phi_tx_deg=float(parts[3]),
                phi_rx_deg=float(parts[4]),
            )
    if not cases:
        raise ValueError(f"{path}: no cases found")
    return cases


def oriented_pose(base: NodePose, az_offset_deg: float, el_offset_deg: float) -> NodePose:
    """Apply a case's reported rotation on top of the scene's base mount."""
    from .scene import wrap_azimuth

    return NodePose(
        position=base.position,
        mount_azimuth_deg=wrap_azimuth(base.mount_azimuth_deg + az_offset_deg),
        mount_elevation_deg=base.mount_elevation_deg + el_offset_deg,
    )

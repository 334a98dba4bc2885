"""Image-method ray tracer: LOS, 1st/2nd-order specular paths, transmissions.

Produces the ground-truth path set for a scene plus per-PAC predicted RSSI,
standing in for a commercial ray tracer.  Specular reflections only, at most
two per path, at most one transmission, no diffraction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .codebook import AoaAodPair, PatternTable, combined_gain_vector, global_to_local, omega_in_grid
from .scene import Environment, NodePose, Point3, Surface

C_M_PER_NS = 0.299792458

TAG_LOS = "LOS"
TAG_NLOS1 = "NLOS-1st"
TAG_NLOS2 = "NLOS-2nd"

KIND_REFLECTION = "reflection"
KIND_TRANSMISSION = "transmission"

# how far (m) a node may sit from a surface plane before geometry is degenerate
_DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class Interaction:
    surface_id: str
    kind: str  # reflection | transmission


@dataclass(frozen=True, eq=False)
class RayPath:
    """One propagation path TX -> ... -> RX.

    vertices holds TX, the reflection points in order, and RX; transmission
    crossings do not bend the path and are recorded in interactions only.
    """

    vertices: tuple  # of Point3
    interactions: tuple  # of Interaction, ordered along the path
    length_m: float
    delay_ns: float
    path_gain_db: float
    omega: AoaAodPair
    tag: str

    def __post_init__(self):
        if abs(self.delay_ns - self.length_m / C_M_PER_NS) > 1e-6:
            raise ValueError("delay_ns inconsistent with length_m")
        n_refl = sum(1 for i in self.interactions if i.kind == KIND_REFLECTION)
        n_trans = sum(1 for i in self.interactions if i.kind == KIND_TRANSMISSION)
        if n_refl > 2:
            raise ValueError(f"reflection count {n_refl} > 2")
        if n_trans > 1:
            raise ValueError(f"transmission count {n_trans} > 1")
        if self.tag == TAG_LOS and self.interactions:
            raise ValueError("LOS path must have no interactions")

    @property
    def reflection_surfaces(self) -> tuple:
        return tuple(i.surface_id for i in self.interactions if i.kind == KIND_REFLECTION)

    def interaction_label(self) -> str:
        if not self.interactions:
            return "direct"
        return "+".join(
            ("R:" if i.kind == KIND_REFLECTION else "T:") + i.surface_id for i in self.interactions
        )


@dataclass(frozen=True, eq=False)
class RssiPrediction:
    """Per-PAC predicted RSSI for one path, dBm, length N_dir."""

    values_dbm: np.ndarray
    path: RayPath

    def __post_init__(self):
        v = np.asarray(self.values_dbm, dtype=float)
        if not np.isfinite(v).all():
            raise ValueError("predicted RSSI must be finite")
        object.__setattr__(self, "values_dbm", v)


def fspl(frequency_hz: float, distance_m: float) -> float:
    """Free-space path loss, dB: 20 log10(4 pi d f / c)."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    if frequency_hz <= 0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * frequency_hz / 299792458.0)


def _resolve_leg(env: Environment, a: np.ndarray, b: np.ndarray, exclude: tuple):
    """Check one straight leg for blocking surfaces.

    Returns a list of (t, Interaction) for non-opaque crossings, or None when
    an opaque surface blocks the leg.  Surfaces in ``exclude`` bound this leg
    (its own reflection points) and are skipped.
    """
    crossings = []
    for surf in env.surfaces:
        if surf.id in exclude:
            continue
        hit = surf.intersect_segment(a, b)
        if hit is None:
            continue
        if surf.opaque:
            return None
        crossings.append((hit[0], Interaction(surf.id, KIND_TRANSMISSION)))
    return crossings


def _assemble(
    env: Environment,
    tx: NodePose,
    rx: NodePose,
    tx_power_dbm: float,
    points: list,
    reflections: list,
):
    """Validate legs of a candidate path and build the RayPath, or None.

    points = [tx_pos, bounce..., rx_pos]; reflections = the Surface at each
    intermediate point, in order.
    """
    events = []  # (arc position, Interaction, loss_db)
    arc = 0.0
    for k in range(len(points) - 1):
        a, b = points[k], points[k + 1]
        leg = np.linalg.norm(b - a)
        if leg < 1e-9:
            return None
        exclude = tuple(
            s.id for s, idx in zip(reflections, range(1, len(points) - 1)) if idx in (k, k + 1)
        )
        crossings = _resolve_leg(env, a, b, exclude)
        if crossings is None:
            return None
        for t, inter in crossings:
            events.append((arc + t * leg, inter, env.surface(inter.surface_id).transmission_loss_db))
        arc += leg

    # reflection events at their arc positions
    pos = 0.0
    for k, surf in enumerate(reflections):
        pos += np.linalg.norm(points[k + 1] - points[k])
        events.append((pos, Interaction(surf.id, KIND_REFLECTION), surf.reflection_loss_db))

    events.sort(key=lambda e: e[0])
    interactions = tuple(e[1] for e in events)
    n_trans = sum(1 for i in interactions if i.kind == KIND_TRANSMISSION)
    if n_trans > 1:
        return None  # over the single-transmission budget

    length = float(sum(np.linalg.norm(points[k + 1] - points[k]) for k in range(len(points) - 1)))
    loss = float(sum(e[2] for e in events))
    omega = _path_omega(tx, rx, points)
    if not reflections and n_trans == 0:
        tag = TAG_LOS
    elif len(reflections) == 2:
        tag = TAG_NLOS2
    else:
        tag = TAG_NLOS1
    return RayPath(
        vertices=tuple(Point3(*map(float, p)) for p in points),
        interactions=interactions,
        length_m=length,
        delay_ns=length / C_M_PER_NS,
        path_gain_db=tx_power_dbm - fspl(env.carrier_frequency_hz, length) - loss,
        omega=omega,
        tag=tag,
    )


def _path_omega(tx: NodePose, rx: NodePose, points: list) -> AoaAodPair:
    depart = points[1] - points[0]
    arrive_look = points[-2] - points[-1]  # RX looks back toward the last bounce
    phi_tx, theta_tx = global_to_local(tx, depart)
    phi_rx, theta_rx = global_to_local(rx, arrive_look)
    return AoaAodPair(phi_tx=phi_tx, phi_rx=phi_rx, theta_tx=theta_tx, theta_rx=theta_rx)


def trace_paths(
    env: Environment,
    tx: NodePose,
    rx: NodePose,
    tx_power_dbm: float,
    *,
    drop_below_db: float = 60.0,
) -> list:
    """Enumerate LOS + specular paths up to 2nd order via the image method.

    path_gain_db = tx_power_dbm - FSPL(length) - sum of interaction losses.
    Paths more than drop_below_db under the strongest are discarded; output
    is sorted by delay.
    """
    txp, rxp = tx.position.xyz, rx.position.xyz
    if np.linalg.norm(txp - rxp) < 1e-9:
        raise ValueError("TX and RX positions coincide")
    for surf in env.surfaces:
        for name, p in (("TX", txp), ("RX", rxp)):
            if abs(surf.signed_distance(p)) < _DEGENERATE_TOL:
                raise ValueError(f"{name} lies on the plane of surface {surf.id!r}")

    paths = []

    los = _assemble(env, tx, rx, tx_power_dbm, [txp, rxp], [])
    if los is not None:
        paths.append(los)

    for surf in env.surfaces:
        image = surf.mirror(txp)
        hit = surf.intersect_segment(image, rxp)
        if hit is None:
            continue
        candidate = _assemble(env, tx, rx, tx_power_dbm, [txp, hit[1], rxp], [surf])
        if candidate is not None:
            paths.append(candidate)

    for s1 in env.surfaces:
        for s2 in env.surfaces:
            if s1.id == s2.id:
                continue
            image1 = s1.mirror(txp)
            image2 = s2.mirror(image1)
            hit2 = s2.intersect_segment(image2, rxp)
            if hit2 is None:
                continue
            hit1 = s1.intersect_segment(image1, hit2[1])
            if hit1 is None:
                continue
            candidate = _assemble(
                env, tx, rx, tx_power_dbm, [txp, hit1[1], hit2[1], rxp], [s1, s2]
            )
            if candidate is not None:
                paths.append(candidate)

    if paths:
        best = max(p.path_gain_db for p in paths)
        paths = [p for p in paths if p.path_gain_db >= best - drop_below_db]
    paths.sort(key=lambda p: p.delay_ns)
    return paths


def predict_rssi(paths: list, tables: tuple, path: RayPath) -> RssiPrediction:
    """Predicted per-PAC RSSI for one traced path.

    RSSI_est(n) = path_gain_db + G(n, omega) over all PACs; errors when the
    path's omega falls outside the pattern grids.
    """
    if not any(p is path for p in paths):
        raise ValueError("path is not part of the traced path list")
    tx_table, rx_table = tables
    values = path.path_gain_db + combined_gain_vector(tx_table, rx_table, path.omega)
    return RssiPrediction(values_dbm=values, path=path)


def visible_paths(paths: list, tables: tuple, dynamic_range_db: float = 20.0) -> list:
    """Paths the sounder can actually resolve, delay-ordered.

    Two instrument limits apply on top of the geometry.  A path whose
    departure or arrival direction falls outside the pattern grids is never
    swept, so it carries no measurable gain.  And a path more than
    ``dynamic_range_db`` below the strongest visible one sits under the
    combined-pattern sidelobe leakage of the dominant paths and cannot be
    separated from it in the PDP.
    """
    steerable = [p for p in paths if omega_in_grid(tables, p.omega)]
    if not steerable:
        return []
    best = max(p.path_gain_db for p in steerable)
    return [p for p in steerable if p.path_gain_db >= best - dynamic_range_db]


def reflection_angle_errors(env: Environment, path: RayPath) -> list:
    """|incidence - reflection| in radians at each bounce (diagnostic)."""
    refl_ids = list(path.reflection_surfaces)
    verts = [p.xyz for p in path.vertices]
    errors = []
    for k, sid in enumerate(refl_ids):
        n = env.surface(sid).normal
        vin = verts[k + 1] - verts[k]
        vout = verts[k + 2] - verts[k + 1]
        vin = vin / np.linalg.norm(vin)
        vout = vout / np.linalg.norm(vout)
        angle_in = math.acos(np.clip(abs(np.dot(vin, n)), -1.0, 1.0))
        angle_out = math.acos(np.clip(abs(np.dot(vout, n)), -1.0, 1.0))
        errors.append(abs(angle_in - angle_out))
    return errors


# ---------------------------------------------------------------------------
# path dump


PATH_DUMP_COLUMNS = [
    "tag",
    "length_m",
    "delay_ns",
    "path_gain_db",
    "phi_tx",
    "theta_tx",
    "phi_rx",
    "theta_rx",
    "interactions",
]


def dump_paths_csv(paths: list, fh) -> None:
    """Write the traced path list as CSV (one row per path)."""
    writer = csv.writer(fh)
    writer.writerow(PATH_DUMP_COLUMNS)
    for p in paths:
        writer.writerow(
            [
                p.tag,
                f"{p.length_m:.6f}",
                f"{p.delay_ns:.6f}",
                f"{p.path_gain_db:.6f}",
                f"{p.omega.phi_tx:.4f}",
                f"{p.omega.theta_tx:.4f}",
                f"{p.omega.phi_rx:.4f}",
                f"{p.omega.theta_rx:.4f}",
                p.interaction_label(),
            ]
        )

"""Scene model: surfaces, node poses, and the moving blocker.

A scene document is a small structured text file (versioned header
``beamscan-scene v1``) holding the reflective surfaces of the venue, the
TX/RX mount poses, and an optional blocker trajectory.  Lengths are meters,
angles degrees, losses dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SCENE_HEADER = "beamscan-scene v1"

# geometric tolerances (meters)
COPLANAR_TOL = 1e-3
EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Point3:
    """A point in the room frame, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate in {self!r}")

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


def _as_point(arr) -> Point3:
    x, y, z = np.asarray(arr, dtype=float)
    return Point3(float(x), float(y), float(z))


@dataclass(frozen=True, eq=False)
class Surface:
    """A flat convex reflector/transmitter panel.

    ``transmission_loss_db=None`` means opaque: the surface blocks any path
    crossing it.  A finite value lets paths pass with that loss (thin-panel
    model, no refraction offset).
    """

    id: str
    vertices: np.ndarray  # (N, 3) float, ordered convex polygon
    reflection_loss_db: float
    transmission_loss_db: float | None = None  # None = opaque
    normal: np.ndarray = field(init=False, repr=False)
    plane_offset: float = field(init=False, repr=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 3 or verts.shape[0] < 3:
            raise ValueError(f"surface {self.id!r}: need >=3 vertices, got shape {verts.shape}")
        if not np.isfinite(verts).all():
            raise ValueError(f"surface {self.id!r}: non-finite vertex")
        if self.reflection_loss_db < 0:
            raise ValueError(f"surface {self.id!r}: reflection_loss_db must be >= 0")
        if self.transmission_loss_db is not None and self.transmission_loss_db < 0:
            raise ValueError(f"surface {self.id!r}: transmission_loss_db must be >= 0 or opaque")

        # Newell normal: robust for any vertex count
        n = np.zeros(3)
        for i in range(len(verts)):
            a, b = verts[i], verts[(i + 1) % len(verts)]
            n += np.cross(a, b)
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            raise ValueError(f"surface {self.id!r}: degenerate polygon (zero normal)")
        n /= norm

        offset = float(np.median(verts @ n))
        dev = np.abs(verts @ n - offset)
        if dev.max() > COPLANAR_TOL:
            raise ValueError(
                f"surface {self.id!r}: vertices off-plane by {dev.max() * 1e3:.2f} mm (limit 1 mm)"
            )

        # convexity: consecutive edge cross products must not flip against the normal
        for i in range(len(verts)):
            e1 = verts[(i + 1) % len(verts)] - verts[i]
            e2 = verts[(i + 2) % len(verts)] - verts[(i + 1) % len(verts)]
            if float(np.dot(np.cross(e1, e2), n)) < -1e-9:
                raise ValueError(f"surface {self.id!r}: polygon is not convex at vertex {i + 1}")

        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "plane_offset", offset)

    @property
    def opaque(self) -> bool:
        return self.transmission_loss_db is None

    def signed_distance(self, point: np.ndarray) -> float:
        return float(np.dot(point, self.normal) - self.plane_offset)

    def mirror(self, point: np.ndarray) -> np.ndarray:
        """Mirror a point through the surface plane (image method)."""
        return point - 2.0 * self.signed_distance(point) * self.normal

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        """Point-in-polygon for a point already on the plane."""
        verts = self.vertices
        for i in range(len(verts)):
            edge = verts[(i + 1) % len(verts)] - verts[i]
            if float(np.dot(np.cross(edge, point - verts[i]), self.normal)) < -tol:
                return False
        return True

    def intersect_segment(self, a: np.ndarray, b: np.ndarray):
        """Intersection of segment a->b with the polygon.

        Returns (t, point) with t in (0, 1), or None when the segment misses
        the polygon or runs parallel to the plane.
        """
        da = self.signed_distance(a)
        db = self.signed_distance(b)
        denom = da - db
        if abs(denom) < 1e-15:
            return None
        t = da / denom
        if t <= EDGE_TOL or t >= 1.0 - EDGE_TOL:
            return None
        point = a + t * (b - a)
        if not self.contains(point, tol=1e-9):
            return None
        return t, point


@dataclass(frozen=True, eq=False)
class Environment:
    """The set of surfaces plus carrier frequency."""

    surfaces: tuple[Surface, ...]
    carrier_frequency_hz: float = 60e9

    def __post_init__(self):
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        ids = [s.id for s in self.surfaces]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate surface ids: {dupes}")
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier_frequency_hz must be positive")

    def surface(self, surface_id: str) -> Surface:
        for s in self.surfaces:
            if s.id == surface_id:
                return s
        raise KeyError(surface_id)


@dataclass(frozen=True)
class NodePose:
    """Array mount: position plus gimbal azimuth/elevation.

    Azimuth is positive for clockwise rotation viewed from above; elevation
    is positive for up-tilt.  These are the reported case angles applied on
    top of whatever base orientation the scene file declares.
    """

    position: Point3
    mount_azimuth_deg: float
    mount_elevation_deg: float

    def __post_init__(self):
        if not -180.0 < self.mount_azimuth_deg <= 180.0:
            raise ValueError(f"mount azimuth {self.mount_azimuth_deg} outside (-180, 180]")
        if not -90.0 <= self.mount_elevation_deg <= 90.0:
            raise ValueError(f"mount elevation {self.mount_elevation_deg} outside [-90, 90]")


def wrap_azimuth(az_deg: float) -> float:
    """Wrap an azimuth into (-180, 180]."""
    wrapped = (az_deg + 180.0) % 360.0 - 180.0
    if wrapped == -180.0:
        wrapped = 180.0
    return wrapped


@dataclass(frozen=True, eq=False)
class BlockerTrajectory:
    """Vertical-cylinder blocker on a piecewise-linear walk."""

    radius_m: float
    height_m: float
    attenuation_db: float
    waypoints: tuple  # of (time_s, Point3)
    transition_m: float = 0.1  # raised-cosine edge width beyond the radius

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("blocker radius must be positive")
        if self.height_m <= 0:
            raise ValueError("blocker height must be positive")
        if self.attenuation_db < 0:
            raise ValueError("blocker attenuation must be >= 0 dB")
        if self.transition_m < 0:
            raise ValueError("blocker transition width must be >= 0")
        wps = tuple((float(t), p if isinstance(p, Point3) else _as_point(p)) for t, p in self.waypoints)
        if len(wps) < 1:
            raise ValueError("blocker needs at least one waypoint")
        times = [t for t, _ in wps]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("blocker waypoint times must be strictly increasing")
        object.__setattr__(self, "waypoints", wps)

    @property
    def t_start(self) -> float:
        return self.waypoints[0][0]

    @property
    def t_end(self) -> float:
        return self.waypoints[-1][0]


def blocker_position(traj: BlockerTrajectory, t: float) -> Point3:
    """Cylinder-axis base position at time t (linear interpolation).

    t outside the waypoint span is an error; use traj.t_start/t_end to clamp
    at the call site when the sounder runs longer than the walk.
    """
    if not traj.t_start <= t <= traj.t_end:
        raise ValueError(
            f"t={t} outside blocker trajectory span [{traj.t_start}, {traj.t_end}]"
        )
    times = np.array([w[0] for w in traj.waypoints])
    pts = np.stack([w[1].xyz for w in traj.waypoints])
    pos = np.array([np.interp(t, times, pts[:, k]) for k in range(3)])
    return _as_point(pos)


def segment_segment_distance(p0, p1, q0, q1) -> float:
    """Minimum distance between 3-D segments p0->p1 and q0->q1."""
    p0 = np.asarray(p0, dtype=float)
    u = np.asarray(p1, dtype=float) - p0
    q0 = np.asarray(q0, dtype=float)
    v = np.asarray(q1, dtype=float) - q0
    w = p0 - q0
    a, b, c = float(u @ u), float(u @ v), float(v @ v)
    d, e = float(u @ w), float(v @ w)
    denom = a * c - b * b

    if denom > 1e-14:
        s = np.clip((b * e - c * d) / denom, 0.0, 1.0)
    else:
        s = 0.0  # near-parallel: pin one end, clamp the other
    t = (b * s + e) / c if c > 1e-14 else 0.0
    t = np.clip(t, 0.0, 1.0)
    # re-clamp s for the clamped t
    if a > 1e-14:
        s = np.clip((b * t - d) / a, 0.0, 1.0)
    return float(np.linalg.norm(w + s * u - t * v))


@dataclass(frozen=True, eq=False)
class Scene:
    """A loaded scene document: environment, node poses, optional blocker."""

    environment: Environment
    tx: NodePose
    rx: NodePose
    blocker: BlockerTrajectory | None = None


# ---------------------------------------------------------------------------
# scene document parsing / serialization


def _parse_tuple(text: str, where: str) -> np.ndarray:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"{where}: expected '(x, y, z)', got {text!r}")
    try:
        vals = [float(v) for v in text[1:-1].split(",")]
    except ValueError as exc:
        raise ValueError(f"{where}: bad number in {text!r}") from exc
    if len(vals) != 3:
        raise ValueError(f"{where}: expected 3 components, got {len(vals)}")
    return np.array(vals)


def _parse_vertices(text: str, where: str) -> np.ndarray:
    chunks = []
    depth = 0
    current = ""
    for ch in text:
        if ch == "(":
            depth += 1
        if depth > 0:
            current += ch
        if ch == ")":
            depth -= 1
            if depth == 0:
                chunks.append(current)
                current = ""
    if depth != 0 or not chunks:
        raise ValueError(f"{where}: malformed vertex list {text!r}")
    return np.stack([_parse_tuple(c, where) for c in chunks])


def _sections(lines: list[str], path: str):
    """Split scene lines into (section header, key/value pairs) groups."""
    header = None
    body: list[tuple[str, str]] = []
    for lineno, raw in lines:
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            if header is not None:
                yield header, body
            header = line[1:-1].strip()
            body = []
        else:
            if header is None:
                raise ValueError(f"{path}:{lineno}: content before first section: {line!r}")
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            body.append((key.strip(), value.strip()))
    if header is not None:
        yield header, body


def loads_environment(text: str, path: str = "<scene>") -> Scene:
    """Parse a scene document from a string.  See load_environment."""
    lines = [
        (i + 1, ln)
        for i, ln in enumerate(text.splitlines())
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines or lines[0][1].strip() != SCENE_HEADER:
        raise ValueError(f"{path}: missing header line {SCENE_HEADER!r}")

    carrier = 60e9
    surfaces: list[Surface] = []
    nodes: dict[str, NodePose] = {}
    blocker = None

    for header, body in _sections(lines[1:], path):
        kv = dict(body)
        if header == "environment":
            if "carrier_frequency_hz" in kv:
                carrier = float(kv["carrier_frequency_hz"])
        elif header.startswith("surface"):
            _, _, sid = header.partition(" ")
            sid = sid.strip()
            if not sid:
                raise ValueError(f"{path}: surface section without id")
            if "vertices" not in kv:
                raise ValueError(f"{path}: surface {sid!r} missing vertices")
            trans = kv.get("transmission_loss_db", "opaque")
            surfaces.append(
                Surface(
                    id=sid,
                    vertices=_parse_vertices(kv["vertices"], f"surface {sid}"),
                    reflection_loss_db=float(kv.get("reflection_loss_db", 0.0)),
                    transmission_loss_db=None if trans == "opaque" else float(trans),
                )
            )
        elif header.startswith("node"):
            _, _, nid = header.partition(" ")
            nid = nid.strip().lower()
            if nid not in ("tx", "rx"):
                raise ValueError(f"{path}: node id must be tx or rx, got {nid!r}")
            nodes[nid] = NodePose(
                position=_as_point(_parse_tuple(kv["position"], f"node {nid}")),
                mount_azimuth_deg=float(kv.get("mount_azimuth_deg", 0.0)),
                mount_elevation_deg=float(kv.get("mount_elevation_deg", 0.0)),
            )
        elif header == "blocker":
            wps = [
                (float(v.split(None, 1)[0]), _as_point(_parse_tuple(v.split(None, 1)[1], "blocker")))
                for k, v in body
                if k == "waypoint"
            ]
            blocker = BlockerTrajectory(
                radius_m=float(kv.get("radius_m", 0.25)),
                height_m=float(kv.get("height_m", 1.8)),
                attenuation_db=float(kv.get("attenuation_db", 20.0)),
                waypoints=wps,
                transition_m=float(kv.get("transition_m", 0.1)),
            )
        else:
            raise ValueError(f"{path}: unknown section [{header}]")

    if "tx" not in nodes or "rx" not in nodes:
        raise ValueError(f"{path}: scene must define [node tx] and [node rx]")
    env = Environment(surfaces=tuple(surfaces), carrier_frequency_hz=carrier)
    return Scene(environment=env, tx=nodes["tx"], rx=nodes["rx"], blocker=blocker)


def load_environment(path) -> Scene:
    """Load and validate a scene document.

    Returns the Environment, the TX/RX NodePoses, and the blocker trajectory
    when one is declared, bundled as a Scene.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return loads_environment(fh.read(), path=str(path))


def _fmt(v: float) -> str:
    return repr(float(v))


def _fmt_point(p: Point3) -> str:
    return f"({_fmt(p.x)}, {_fmt(p.y)}, {_fmt(p.z)})"


def dumps_environment(scene: Scene) -> str:
    """Serialize a scene to document text; load_environment round-trips it."""
    out = [SCENE_HEADER, ""]
    out += ["[environment]", f"carrier_frequency_hz = {_fmt(scene.environment.carrier_frequency_hz)}", ""]
    for s in scene.environment.surfaces:
        out.append(f"[surface {s.id}]")
        out.append(f"reflection_loss_db = {_fmt(s.reflection_loss_db)}")
        trans = "opaque" if s.transmission_loss_db is None else _fmt(s.transmission_loss_db)
        out.append(f"transmission_loss_db = {trans}")
        verts = " ".join(_fmt_point(_as_point(v)) for v in s.vertices)
        out.append(f"vertices = {verts}")
        out.append("")
    for name, pose in (("tx", scene.tx), ("rx", scene.rx)):
        out.append(f"[node {name}]")
        out.append(f"position = {_fmt_point(pose.position)}")
        out.append(f"mount_azimuth_deg = {_fmt(pose.mount_azimuth_deg)}")
        out.append(f"mount_elevation_deg = {_fmt(pose.mount_elevation_deg)}")
        out.append("")
    if scene.blocker is not None:
        b = scene.blocker
        out.append("[blocker]")
        out.append(f"radius_m = {_fmt(b.radius_m)}")
        out.append(f"height_m = {_fmt(b.height_m)}")
        out.append(f"attenuation_db = {_fmt(b.attenuation_db)}")
        out.append(f"transition_m = {_fmt(b.transition_m)}")
        for t, p in b.waypoints:
            out.append(f"waypoint = {_fmt(t)} {_fmt_point(p)}")
        out.append("")
    return "\n".join(out)


def save_environment(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_environment(scene))

"""Image-method tracing: link budgets, geometry, occlusion, visibility."""

import io
import math

import numpy as np
import pytest

from beamscan import (
    Environment,
    NodePose,
    Point3,
    Surface,
    dump_paths_csv,
    fspl,
    predict_rssi,
    reflection_angle_errors,
    trace_paths,
    visible_paths,
)

F_C = 60e9
TXP = 12.5


def _pose(x, y, z, az=0.0, el=0.0):
    return NodePose(position=Point3(x, y, z), mount_azimuth_deg=az, mount_elevation_deg=el)


def _floor(extent=20.0, rl=5.0):
    return Surface(
        id="floor",
        vertices=[
            (-extent, -extent, 0.0),
            (extent, -extent, 0.0),
            (extent, extent, 0.0),
            (-extent, extent, 0.0),
        ],
        reflection_loss_db=rl,
    )


def test_fspl_oracles():
    # 20 log10(4 pi d f / c) at 60 GHz
    assert fspl(F_C, 1.0) == pytest.approx(68.010808, abs=1e-5)
    assert fspl(F_C, 3.0) == pytest.approx(77.553233, abs=1e-5)
    # doubling the distance costs 20 log10(2)
    assert fspl(F_C, 2.0) - fspl(F_C, 1.0) == pytest.approx(20.0 * math.log10(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        fspl(F_C, 0.0)


def test_free_space_link():
    env = Environment(surfaces=(), carrier_frequency_hz=F_C)
    paths = trace_paths(env, _pose(0, 0, 1), _pose(3, 0, 1, az=180.0), TXP)
    assert len(paths) == 1
    los = paths[0]
    assert los.tag == "LOS"
    assert los.interaction_label() == "direct"
    assert los.length_m == pytest.approx(3.0, abs=1e-12)
    assert los.delay_ns == pytest.approx(10.006923, abs=1e-5)
    assert los.path_gain_db == pytest.approx(TXP - 77.553233, abs=1e-5)
    # boresights face each other: straight ahead on both sides
    assert los.omega.phi_tx == pytest.approx(0.0, abs=1e-9)
    assert los.omega.phi_rx == pytest.approx(0.0, abs=1e-9)


def test_floor_bounce_geometry():
    env = Environment(surfaces=(_floor(),), carrier_frequency_hz=F_C)
    paths = trace_paths(env, _pose(0, 0, 1), _pose(4, 0, 1, az=180.0), TXP)
    assert [p.interaction_label() for p in paths] == ["direct", "R:floor"]
    bounce = paths[1]
    # image of TX in the floor is (0, 0, -1): path length sqrt(16 + 4)
    assert bounce.length_m == pytest.approx(math.sqrt(20.0), abs=1e-9)
    mid = bounce.vertices[1]
    np.testing.assert_allclose(mid.xyz, [2.0, 0.0, 0.0], atol=1e-9)
    # equal heights: departure and arrival dip by the same angle
    dip = math.degrees(math.atan2(1.0, 2.0))
    assert bounce.omega.theta_tx == pytest.approx(-dip, abs=1e-9)
    assert bounce.omega.theta_rx == pytest.approx(-dip, abs=1e-9)
    assert bounce.path_gain_db == pytest.approx(
        TXP - fspl(F_C, math.sqrt(20.0)) - 5.0, abs=1e-9
    )
    assert reflection_angle_errors(env, bounce) == [pytest.approx(0.0, abs=1e-12)]


def test_double_bounce_orders_in_corridor():
    # two parallel walls: the wall1->wall2 and wall2->wall1 bounces both exist
    def wall(name, x):
        return Surface(
            id=name,
            vertices=[(x, -20.0, -5.0), (x, 20.0, -5.0), (x, 20.0, 5.0), (x, -20.0, 5.0)],
            reflection_loss_db=3.5,
        )

    env = Environment(surfaces=(wall("back", -2.0), wall("front", 6.0)), carrier_frequency_hz=F_C)
    paths = trace_paths(env, _pose(0, 0, 1), _pose(4, 0, 1, az=180.0), TXP)
    labels = {p.interaction_label(): p for p in paths}
    assert {"direct", "R:back", "R:front", "R:back+R:front", "R:front+R:back"} <= set(labels)
    # unfolded lengths: TX -2 6 4 gives 12 m; TX 6 -2 4 gives 20 m
    assert labels["R:back+R:front"].length_m == pytest.approx(12.0, abs=1e-9)
    assert labels["R:front+R:back"].length_m == pytest.approx(20.0, abs=1e-9)
    for p in paths:
        assert len(p.reflection_surfaces) <= 2
        for err in reflection_angle_errors(env, p):
            assert err < 1e-9
    # delay-sorted output
    delays = [p.delay_ns for p in paths]
    assert delays == sorted(delays)


def test_opaque_surface_blocks_los():
    screen = Surface(
        id="screen",
        vertices=[(2.0, -1.0, 0.0), (2.0, 1.0, 0.0), (2.0, 1.0, 3.0), (2.0, -1.0, 3.0)],
        reflection_loss_db=4.0,
    )
    env = Environment(surfaces=(screen,), carrier_frequency_hz=F_C)
    paths = trace_paths(env, _pose(0, 0, 1), _pose(4, 0, 1, az=180.0), TXP)
    assert all(p.tag != "LOS" for p in paths)


def test_transmissive_surface_attenuates_los():
    pane = Surface(
        id="pane",
        vertices=[(2.0, -1.0, 0.0), (2.0, 1.0, 0.0), (2.0, 1.0, 3.0), (2.0, -1.0, 3.0)],
        reflection_loss_db=4.0,
        transmission_loss_db=7.0,
    )
    env = Environment(surfaces=(pane,), carrier_frequency_hz=F_C)
    paths = trace_paths(env, _pose(0, 0, 1), _pose(4, 0, 1, az=180.0), TXP)
    through = [p for p in paths if p.interaction_label() == "T:pane"]
    assert len(through) == 1
    assert through[0].path_gain_db == pytest.approx(TXP - fspl(F_C, 4.0) - 7.0, abs=1e-9)
    assert through[0].length_m == pytest.approx(4.0, abs=1e-12)  # thin panel: no bending


def test_degenerate_placements_rejected():
    env = Environment(surfaces=(_floor(),), carrier_frequency_hz=F_C)
    with pytest.raises(ValueError):
        trace_paths(env, _pose(0, 0, 1), _pose(0, 0, 1), TXP)  # coincident
    with pytest.raises(ValueError):
        trace_paths(env, _pose(0, 0, 0.0), _pose(4, 0, 1), TXP)  # TX on the floor plane


def test_reference_scene_case8_paths(case_paths):
    paths = case_paths(8)
    labels = [p.interaction_label() for p in paths]
    assert labels == [
        "direct",
        "R:floor",
        "R:cabinet+R:floor",
        "R:pole_left",
        "R:pole_right",
        "R:back_wall+R:pillar",
    ]
    # symmetric pole pair: equal delays, mirrored azimuths
    left = paths[labels.index("R:pole_left")]
    right = paths[labels.index("R:pole_right")]
    assert left.delay_ns == pytest.approx(right.delay_ns, abs=1e-6)
    assert left.omega.phi_tx == pytest.approx(-right.omega.phi_tx, abs=1e-6)
    assert left.omega.phi_rx == pytest.approx(-right.omega.phi_rx, abs=1e-6)


def test_visible_paths_drops_out_of_grid_and_weak(tables, case_paths):
    paths = case_paths(8)
    best = max(p.path_gain_db for p in paths)
    for p in paths:
        assert p.path_gain_db >= best - 20.0
    # a tight dynamic range keeps only the direct path
    assert [p.tag for p in visible_paths(paths, tables, dynamic_range_db=1.0)] == ["LOS"]


def test_predict_rssi_identity_check(tables, case_paths):
    paths = case_paths(8)
    pred = predict_rssi(paths, tables, paths[0])
    assert pred.values_dbm.shape == (144,)
    assert pred.values_dbm.max() <= paths[0].path_gain_db + 2 * 12.043214 + 1e-6
    with pytest.raises(ValueError):
        predict_rssi(paths[1:], tables, paths[0])  # identity, not equality


def test_dump_paths_csv_layout(case_paths):
    fh = io.StringIO()
    dump_paths_csv(case_paths(8), fh)
    rows = fh.getvalue().strip().splitlines()
    assert rows[0] == "tag,length_m,delay_ns,path_gain_db,phi_tx,theta_tx,phi_rx,theta_rx,interactions"
    assert len(rows) == 7
    assert rows[1].startswith("LOS,5.156")

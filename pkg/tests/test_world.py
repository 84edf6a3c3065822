"""World simulator: kinematics, collision gate, sensing, gripper."""

import numpy as np
import pytest

from manipstack.belief import GaussianBelief
from manipstack.errors import GripRefusedFar, GripRefusedUncertain, NothingGripped
from manipstack.geometry import Shape, Workspace
from manipstack.world import Obstacle, Region, RobotParams, WorldState


def make_world(
    objects=((6.0, 6.0, 0.25),),
    obstacles=(),
    start=(1.5, 1.5),
    heading=0.0,
    sensing=3.0,
):
    ws = Workspace.from_vertices([[0, 0], [10, 0], [10, 10], [0, 10]])
    obj = np.array([[o[0], o[1]] for o in objects], dtype=float)
    radii = np.array([o[2] for o in objects], dtype=float)
    return WorldState(
        workspace=ws,
        regions=[Region(np.array([[2.0, 7.0], [3.4, 7.0], [3.4, 8.4], [2.0, 8.4]]))],
        object_pos=obj,
        object_radii=radii,
        obstacles=[Obstacle(shape=s) for s in obstacles],
        robot=RobotParams(),
        x=np.array(start, dtype=float),
        psi=heading,
        sensing_range=sensing,
    )


def uniform_belief(world, var=0.09):
    n = world.n_objects
    return GaussianBelief(world.object_pos.reshape(-1).copy(), var * np.eye(2 * n))


# ------------------------------------------------------------------ step


def test_zero_command_keeps_pose():
    w = make_world()
    x0, psi0 = w.x.copy(), w.psi
    res = w.step(0.0, 0.0)
    assert res.accepted
    assert np.allclose(w.x, x0) and w.psi == psi0


def test_euler_step_forward():
    w = make_world(heading=0.0)
    w.step(1.0, 0.0)
    assert np.allclose(w.x, [1.55, 1.5])


def test_step_into_obstacle_rejected():
    wall = Shape.polygon([[1.9, 1.0], [2.1, 1.0], [2.1, 2.0], [1.9, 2.0]])
    w = make_world(obstacles=(wall,), start=(1.58, 1.5))
    x0 = w.x.copy()
    res = w.step(1.0, 0.0)
    assert not res.accepted
    assert np.allclose(w.x, x0)
    assert res.clearance < 0


def test_command_bounds_enforced():
    w = make_world()
    with pytest.raises(ValueError):
        w.step(2.0, 0.0)
    with pytest.raises(ValueError):
        w.step(0.0, 5.0)


def test_gripped_object_follows_rigidly():
    w = make_world(objects=((2.1, 1.5, 0.25),), start=(1.5, 1.5))
    b = uniform_belief(w, var=1e-6)
    w.try_grip(b, 1, eps=1e-3)
    c = w.contact_distance(1)
    for v, om in [(0.5, 0.0), (0.5, 1.0), (0.0, -1.0), (0.8, 0.5)]:
        w.step(v, om)
        gap = np.hypot(*(w.object_pos[0] - w.x))
        assert gap == pytest.approx(c, abs=1e-9)


def test_contact_jacobian_roundtrip():
    w = make_world(objects=((2.1, 1.5, 0.25),))
    b = uniform_belief(w, var=1e-6)
    w.try_grip(b, 1, eps=1e-3)
    rng = np.random.default_rng(4)
    for _ in range(20):
        psi = rng.uniform(0, 2 * np.pi)
        t = w.contact_jacobian(1, psi)
        u = rng.normal(size=2)
        assert np.allclose(t @ (np.linalg.inv(t) @ u), u, atol=1e-9)


def test_no_interpenetration_along_run():
    disk = Shape.disk([3.0, 1.5], 0.5)
    w = make_world(obstacles=(disk,), start=(1.5, 1.5))
    worst = np.inf
    for _ in range(200):
        res = w.step(1.0, 0.0)
        if res.accepted:
            worst = min(worst, res.clearance)
    assert worst >= -1e-9
    # the robot is parked at contact with the disk, not inside it
    assert np.hypot(*(w.x - [3.0, 1.5])) >= 0.5 + w.robot.radius - 1e-6


# ------------------------------------------------------------------ sense


def test_obstacle_beyond_range_unrevealed():
    disk = Shape.disk([8.0, 8.0], 0.5)
    w = make_world(obstacles=(disk,))
    assert w.sense() == []
    assert not w.obstacles[0].revealed


def test_obstacle_in_range_revealed():
    disk = Shape.disk([4.0, 1.5], 0.5)  # boundary at 2.0 m < 3.0 m range
    w = make_world(obstacles=(disk,))
    assert w.sense() == [0]
    assert w.obstacles[0].revealed


def test_hidden_obstacle_stays_unrevealed():
    wall = Shape.polygon([[2.5, 0.5], [2.7, 0.5], [2.7, 2.5], [2.5, 2.5]])
    hidden = Shape.disk([3.6, 1.5], 0.3)
    w = make_world(obstacles=(wall, hidden))
    revealed = w.sense()
    assert 0 in revealed  # the wall is visible
    assert 1 not in revealed  # the disk is fully behind it


# ------------------------------------------------------------------ measure


def test_measure_empty_when_nothing_visible():
    w = make_world(objects=((9.0, 9.0, 0.25),))
    m = w.measure(np.random.default_rng(0))
    assert m.is_empty


def test_measure_noise_free_exact():
    w = make_world(objects=((2.5, 1.5, 0.25),))
    m = w.measure(np.random.default_rng(0), noise_free=True)
    assert m.indices == (1,)
    assert np.allclose(m.y, [2.5, 1.5])


def test_measure_noise_statistics():
    w = make_world(objects=((2.5, 1.5, 0.25),))
    rng = np.random.default_rng(321)
    xs = np.array([w.measure(rng).y[0] for _ in range(10000)])
    var = xs.var()
    expect = (0.05 * 2.5) ** 2
    assert abs(var - expect) / expect < 0.05


def test_measure_deterministic_under_seed():
    w = make_world(objects=((2.5, 1.5, 0.25),))
    y1 = w.measure(np.random.default_rng(7)).y
    y2 = w.measure(np.random.default_rng(7)).y
    assert np.array_equal(y1, y2)


# ------------------------------------------------------------------ gripper


def test_grip_success_when_certain_and_adjacent():
    w = make_world(objects=((2.1, 1.5, 0.25),))
    b = uniform_belief(w, var=1e-4)  # det = 1e-8 <= 1e-3
    w.try_grip(b, 1, eps=1e-3)
    assert w.gripped == 1
    assert b.det_marginal(1) < 1e-6


def test_grip_refused_uncertain():
    w = make_world(objects=((2.1, 1.5, 0.25),))
    b = uniform_belief(w, var=0.05)  # det = 2.5e-3 > 1e-3
    with pytest.raises(GripRefusedUncertain):
        w.try_grip(b, 1, eps=1e-3)


def test_grip_refused_far():
    w = make_world(objects=((3.0, 1.5, 0.25),))
    b = uniform_belief(w, var=1e-4)
    with pytest.raises(GripRefusedFar):
        w.try_grip(b, 1, eps=1e-3)


def test_release_leaves_object_and_pins_belief():
    w = make_world(objects=((2.1, 1.5, 0.25),))
    b = uniform_belief(w, var=1e-4)
    w.try_grip(b, 1, eps=1e-3)
    for _ in range(30):
        w.step(1.0, 0.2)
    i, pos = w.release(b)
    assert i == 1 and w.gripped == 0
    assert np.allclose(pos, w.object_pos[0])
    assert np.allclose(b.marginal(1)[0], pos)
    assert b.det_marginal(1) < 1e-12


def test_release_without_grip_raises():
    w = make_world()
    with pytest.raises(NothingGripped):
        w.release(uniform_belief(w))


def test_region_containment_predicate():
    w = make_world(objects=((2.7, 7.7, 0.25),))
    assert w.region_contains_object(1, 1)
    w.object_pos[0] = [5.0, 5.0]
    assert not w.region_contains_object(1, 1)


def test_trace_determinism_same_commands():
    def run():
        disk = Shape.disk([4.0, 1.5], 0.4)
        w = make_world(obstacles=(disk,))
        rng = np.random.default_rng(99)
        out = []
        for k in range(100):
            w.step(0.8, 0.3 * np.sin(k * 0.1))
            w.sense()
            m = w.measure(rng)
            out.append((w.x[0], w.x[1], w.psi, tuple(m.y)))
        return out

    assert run() == run()

"""Ground-truth 2D world: unicycle robot with a gripper, movable disks,
fixed obstacles with reveal-on-sight semantics, regions, and the noisy
position sensor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import GaussianBelief, Measurement, SIGMA_KNOWN, expected_noise, visible_objects
from .errors import GripRefusedFar, GripRefusedUncertain, NothingGripped
from .geometry import Shape, Workspace, polygon_centroid, segment_blocked

TOL_GRIP = 0.05  # m; contact tolerance (discrete steps never land exactly)


@dataclass
class Obstacle:
    shape: Shape
    revealed: bool = False
    familiar: bool = False  # recognizable polygonal geometry vs convex unknown


@dataclass
class Region:
    vertices: np.ndarray

    @property
    def centroid(self) -> np.ndarray:
        return polygon_centroid(self.vertices)

    def contains(self, p) -> bool:
        from shapely.geometry import Point, Polygon

        return Polygon([tuple(v) for v in self.vertices]).buffer(1e-9).contains(Point(p))


@dataclass
class RobotParams:
    radius: float = 0.3
    v_max: float = 1.0
    omega_max: float = 2.0
    dt: float = 0.05


@dataclass
class StepResult:
    accepted: bool
    clearance: float  # min distance of the moved body to any solid


@dataclass
class WorldState:
    workspace: Workspace
    regions: list[Region]
    object_pos: np.ndarray  # (N, 2) true positions
    object_radii: np.ndarray  # (N,)
    obstacles: list[Obstacle]
    robot: RobotParams
    x: np.ndarray  # robot position
    psi: float  # heading
    sensing_range: float
    noise_scale: float = 0.05
    noise_floor: float = 1e-6
    gripped: int = 0  # 0 = disengaged, else 1-based object index
    t: float = 0.0

    @property
    def n_objects(self) -> int:
        return len(self.object_radii)

    def heading(self) -> np.ndarray:
        return np.array([np.cos(self.psi), np.sin(self.psi)])

    # ------------------------------------------------------------ queries

    def obstacle_shapes(self, revealed_only: bool = False) -> list[Shape]:
        return [o.shape for o in self.obstacles if o.revealed or not revealed_only]

    def object_center(self, i: int) -> np.ndarray:
        return self.object_pos[i - 1].copy()

    def contact_distance(self, i: int) -> float:
        """Center separation at contact: robot radius + object radius."""
        return self.robot.radius + float(self.object_radii[i - 1])

    def contact_jacobian(self, i: int, psi: float | None = None) -> np.ndarray:
        """T(psi) mapping (v, omega) to the attached object-center velocity."""
        psi = self.psi if psi is None else psi
        c = self.contact_distance(i)
        return np.array(
            [[np.cos(psi), -c * np.sin(psi)], [np.sin(psi), c * np.cos(psi)]]
        )

    def _body_clearance(self, x, psi) -> float:
        """Clearance of the robot (and attached object) at the given pose
        against walls, obstacles, and non-gripped objects."""
        r = self.robot.radius
        discs = [(np.asarray(x, dtype=float), r)]
        if self.gripped:
            i = self.gripped
            u = np.array([np.cos(psi), np.sin(psi)])
            discs.append((np.asarray(x) + self.contact_distance(i) * u, float(self.object_radii[i - 1])))
        worst = float("inf")
        for center, radius in discs:
            worst = min(worst, self.workspace.margin(center) - radius)
            for obs in self.obstacles:
                worst = min(worst, obs.shape.distance_to_point(center) - radius)
            for j in range(1, self.n_objects + 1):
                if j == self.gripped:
                    continue
                gap = float(np.hypot(*(self.object_pos[j - 1] - center)))
                worst = min(worst, gap - self.object_radii[j - 1] - radius)
        return worst

    def pose_free(self, x, psi) -> bool:
        return self._body_clearance(x, psi) >= -1e-9

    # ------------------------------------------------------------ dynamics

    def step(self, v: float, omega: float) -> StepResult:
        """Euler-integrate one control period; reject the step if the swept
        body would leave free space (pose unchanged, collision flagged)."""
        p = self.robot
        if abs(v) > p.v_max + 1e-9 or abs(omega) > p.omega_max + 1e-9:
            raise ValueError("command exceeds actuation bounds")
        new_psi = self.psi + omega * p.dt
        new_x = self.x + v * p.dt * np.array([np.cos(self.psi), np.sin(self.psi)])
        # endpoint + midpoint check covers the short swept segment
        mid_x = 0.5 * (self.x + new_x)
        mid_psi = self.psi + 0.5 * omega * p.dt
        clear = min(self._body_clearance(new_x, new_psi), self._body_clearance(mid_x, mid_psi))
        self.t += p.dt
        if clear < -1e-9:
            return StepResult(False, clear)
        self.x = new_x
        self.psi = new_psi % (2 * np.pi)
        if self.gripped:
            i = self.gripped
            self.object_pos[i - 1] = self.x + self.contact_distance(i) * self.heading()
        return StepResult(True, clear)

    # ------------------------------------------------------------ sensing

    def sense(self) -> list[int]:
        """Reveal obstacles with a visible boundary point in sensing range.
        Returns the indices of newly revealed obstacles."""
        revealed = []
        for idx, obs in enumerate(self.obstacles):
            if obs.revealed:
                continue
            # cheap reject on nearest distance
            if obs.shape.distance_to_point(self.x) > self.sensing_range:
                continue
            others = [o.shape for k, o in enumerate(self.obstacles) if k != idx]
            probes = [obs.shape.nearest_boundary_point(self.x)]
            probes.extend(obs.shape.boundary_points(12))
            for q in probes:
                if np.hypot(*(q - self.x)) > self.sensing_range:
                    continue
                if not segment_blocked(others, self.x, q):
                    obs.revealed = True
                    revealed.append(idx)
                    break
        return revealed

    def visible_true_objects(self) -> list[int]:
        return visible_objects(
            self.x, self.object_pos, self.obstacle_shapes(), self.sensing_range
        )

    def measure(self, rng: np.random.Generator, noise_free: bool = False) -> Measurement:
        """Noisy observation of all currently visible objects (true map,
        true positions, noise scaled by the true coordinates)."""
        vis = self.visible_true_objects()
        if not vis:
            return Measurement((), np.zeros(0), np.zeros(0))
        coords = np.concatenate([self.object_pos[i - 1] for i in vis])
        noise_diag = expected_noise(coords, self.noise_scale, self.noise_floor)
        y = coords.copy()
        if not noise_free:
            y = y + rng.normal(size=coords.size) * np.sqrt(noise_diag)
        return Measurement(tuple(vis), y, noise_diag)

    # ------------------------------------------------------------ gripper

    def try_grip(self, belief: GaussianBelief, i: int, eps: float) -> None:
        """Engage the gripper on object i.  Requires the uncertainty gate
        det(Sigma_i) <= eps and physical proximity; on success the object
        snaps to the contact attachment and the belief marginal collapses
        to the contact-implied position."""
        if self.gripped:
            raise ValueError("gripper already engaged")
        det = belief.det_marginal(i)
        if det > eps:
            raise GripRefusedUncertain(f"det sigma_{i} = {det:.3e} > {eps:.3e}")
        gap = float(np.hypot(*(self.object_pos[i - 1] - self.x)))
        if gap > self.contact_distance(i) + TOL_GRIP:
            raise GripRefusedFar(f"object {i} at {gap:.3f} m, reach {self.contact_distance(i) + TOL_GRIP:.3f} m")
        # face the object and pull it into the contact circle
        d = self.object_pos[i - 1] - self.x
        self.psi = float(np.arctan2(d[1], d[0])) % (2 * np.pi)
        self.object_pos[i - 1] = self.x + self.contact_distance(i) * self.heading()
        self.gripped = i
        belief.set_marginal(i, self.object_pos[i - 1], SIGMA_KNOWN**2)

    def release(self, belief: GaussianBelief) -> tuple[int, np.ndarray]:
        """Disengage; the object stays put and its marginal is pinned to
        the release pose (the robot remembers where it left it)."""
        if not self.gripped:
            raise NothingGripped("gripper is disengaged")
        i = self.gripped
        self.gripped = 0
        pos = self.object_pos[i - 1].copy()
        belief.set_marginal(i, pos, SIGMA_KNOWN**2)
        return i, pos

    def region_contains_object(self, j: int, i: int) -> bool:
        return self.regions[j - 1].contains(self.object_pos[i - 1])

"""Reactive tracking layer: local navigation toward targets or waypoint
sequences, online Kalman updates at waypoints, and the three replanning
triggers that compare what the plan promised with what the sensor says."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import GaussianBelief, kf_update
from .geometry import Shape, Workspace, min_clearance, segment_clearance
from .informative import InformativePlan
from .world import WorldState

UNCERTAINTY_WORSE = "UncertaintyWorse"
MEAN_DEVIATION = "MeanDeviation"
WAYPOINT_INVALID = "WaypointInvalid"


@dataclass(frozen=True)
class ReplanEvent:
    kind: str
    waypoint_index: int
    lhs: float  # violated inequality, left side
    rhs: float  # right side


@dataclass
class ReplanPayload:
    """Everything the informative planner needs to start over."""

    pose: np.ndarray
    prior: GaussianBelief
    revealed_obstacles: list[Shape]


@dataclass
class NavParams:
    k_v: float = 1.5
    k_omega: float = 3.0
    v_max: float = 1.0
    omega_max: float = 2.0
    lookahead: float = 2.0
    n_rays: int = 36


@dataclass
class NavContext:
    """Obstacle view for local steering: revealed fixed obstacles plus any
    believed object disks the body must not brush."""

    workspace: Workspace
    shapes: list[Shape]
    clearance: float  # body radius for path checks

    def segment_clear(self, a, b) -> bool:
        if self.workspace.margin(b) < self.clearance - 1e-9:
            return False
        return segment_clearance(self.shapes, a, b) >= self.clearance - 1e-9

    def point_clear(self, p) -> bool:
        if self.workspace.margin(p) < self.clearance - 1e-9:
            return False
        return min_clearance(self.shapes, p) >= self.clearance - 1e-9


def wrap_angle(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


class LocalNavigator:
    """Projected-goal steering with obstacle-rounding hysteresis.

    When the direct lookahead segment is blocked, a fan of bearings is
    probed; candidates are scored by remaining distance to the target,
    penalized when their own onward view is blocked (so the navigator hugs
    obstacle boundaries instead of creeping into them) and when they flip
    the committed rounding side (so it keeps turning the same way around
    an obstacle)."""

    ONWARD_PENALTY = 1.2
    SIDE_PENALTY = 0.8
    BEARING_PENALTY = 0.05

    def __init__(self, params: NavParams):
        self.params = params
        self.side = 0  # -1 clockwise, +1 counterclockwise, 0 uncommitted

    def local_goal(self, pos, target, ctx: NavContext) -> np.ndarray | None:
        params = self.params
        pos = np.asarray(pos, dtype=float)
        target = np.asarray(target, dtype=float)
        d = float(np.hypot(*(target - pos)))
        if d < 1e-9:
            return target
        look = target if d <= params.lookahead else pos + (target - pos) / d * params.lookahead
        if ctx.segment_clear(pos, look):
            self.side = 0
            return look
        heading_t = float(np.arctan2(target[1] - pos[1], target[0] - pos[0]))
        best = None
        best_score = np.inf
        best_rel = 0.0
        for k in range(params.n_rays):
            rel = -np.pi + (2 * np.pi) * (k + 0.5) / params.n_rays
            ang = heading_t + rel
            u = np.array([np.cos(ang), np.sin(ang)])
            for frac in (1.0, 0.6, 0.35, 0.2):
                cand = pos + u * params.lookahead * frac
                if not ctx.segment_clear(pos, cand):
                    continue
                rest = float(np.hypot(*(target - cand)))
                onward_len = min(params.lookahead, rest)
                score = rest + self.BEARING_PENALTY * abs(rel)
                if rest > 1e-9:
                    onward = cand + (target - cand) / rest * onward_len
                    if not ctx.segment_clear(cand, onward):
                        score += self.ONWARD_PENALTY
                if self.side and np.sign(rel) == -self.side:
                    score += self.SIDE_PENALTY
                if score < best_score - 1e-12:
                    best_score = score
                    best = cand
                    best_rel = rel
                break
        if best is not None and abs(best_rel) > 0.2:
            self.side = int(np.sign(best_rel))
        return best

    def command(
        self,
        x,
        psi: float,
        target,
        ctx: NavContext,
        jacobian: np.ndarray | None = None,
        control_point=None,
    ) -> tuple[float, float]:
        """Unicycle command toward the projected local goal.

        With a contact Jacobian the command is computed for the attached
        object center (transporting); otherwise plain heading control."""
        params = self.params
        x = np.asarray(x, dtype=float)
        pos = np.asarray(control_point, dtype=float) if control_point is not None else x
        goal = self.local_goal(pos, target, ctx)
        if goal is None:
            return 0.0, 0.0
        err_vec = goal - pos
        dist = float(np.hypot(*err_vec))
        if dist < 1e-6:
            return 0.0, 0.0
        if jacobian is not None:
            u_des = params.k_v * err_vec
            speed = float(np.hypot(*u_des))
            if speed > params.v_max:
                u_des *= params.v_max / speed
            v, omega = np.linalg.solve(jacobian, u_des)
            scale = max(abs(v) / params.v_max, abs(omega) / params.omega_max, 1.0)
            return float(v / scale), float(omega / scale)
        bearing = float(np.arctan2(err_vec[1], err_vec[0]))
        err = wrap_angle(bearing - psi)
        omega = float(np.clip(params.k_omega * err, -params.omega_max, params.omega_max))
        v = min(params.v_max, params.k_v * dist) * max(0.0, np.cos(err))
        return float(v), omega


def compute_velocity(
    x,
    psi: float,
    target,
    ctx: NavContext,
    params: NavParams,
    nav: LocalNavigator | None = None,
    jacobian: np.ndarray | None = None,
    control_point=None,
) -> tuple[float, float]:
    """One steering command; pass a persistent LocalNavigator to keep the
    obstacle-rounding commitment across steps."""
    nav = nav if nav is not None else LocalNavigator(params)
    return nav.command(x, psi, target, ctx, jacobian=jacobian, control_point=control_point)


class StallGuard:
    """Flags tracking that stops making progress toward its target."""

    def __init__(self, t_stall: float, delta_prog: float):
        self.t_stall = t_stall
        self.delta_prog = delta_prog
        self.best = np.inf
        self.t_best = 0.0

    def reset(self, t: float):
        self.best = np.inf
        self.t_best = t

    def stalled(self, t: float, dist: float) -> bool:
        if dist < self.best - self.delta_prog:
            self.best = dist
            self.t_best = t
            return False
        return (t - self.t_best) > self.t_stall


def on_waypoint_arrival(
    k: int,
    belief_online: GaussianBelief,
    plan: InformativePlan,
    world: WorldState,
    rng: np.random.Generator,
    eps_sigma: float,
    eps_mu: float,
) -> tuple[GaussianBelief, ReplanEvent | None]:
    """Measurement update at waypoint k plus the ordered replanning checks:
    (i) online uncertainty above the offline promise, (ii) mean drift from
    the offline estimate, (iii) the next waypoint inside a revealed
    obstacle.  First violated condition wins."""
    meas = world.measure(rng)
    belief = kf_update(belief_online, meas)
    i = plan.target

    det_online = belief.det_marginal(i)
    det_offline = float(plan.det_offline[min(k, len(plan.det_offline) - 1)])
    if det_online > det_offline + eps_sigma:
        return belief, ReplanEvent(UNCERTAINTY_WORSE, k, det_online, det_offline + eps_sigma)

    mu_online = belief.marginal(i)[0]
    drift = float(np.hypot(*(mu_online - plan.mu_offline_of(i))))
    if drift > eps_mu:
        return belief, ReplanEvent(MEAN_DEVIATION, k, drift, eps_mu)

    if k + 1 <= plan.horizon:
        nxt = plan.waypoints[k + 1]
    else:
        nxt = plan.grasp_target
    r = world.robot.radius
    for shape in world.obstacle_shapes(revealed_only=True):
        if shape.distance_to_point(nxt) < r:
            return belief, ReplanEvent(WAYPOINT_INVALID, k, shape.distance_to_point(nxt), r)

    return belief, None


def handle_replan(
    event: ReplanEvent, belief_online: GaussianBelief, world: WorldState
) -> ReplanPayload:
    """The robot pauses and hands its latest estimate and map back to the
    informative planner as the new prior."""
    return ReplanPayload(
        pose=world.x.copy(),
        prior=belief_online.copy(),
        revealed_obstacles=world.obstacle_shapes(revealed_only=True),
    )

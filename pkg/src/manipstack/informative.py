"""Informative path planner.

Grows a tree over (position, covariance) states with a finite displacement
set, scoring each node by the accumulated marginal uncertainty of the
target object.  A node is a solution once the posterior determinant after
measuring from it drops below the grasp threshold; the cheapest solution's
root path becomes the waypoint sequence, and a collision-free grasp point
on the contact circle around the believed object position is appended.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import GaussianBelief, riccati
from .errors import BudgetExhausted, NoFreeGraspPoint
from .geometry import Shape, Workspace, min_clearance, segment_clearance


@dataclass
class PlannerMap:
    """Snapshot of what the planner may assume: revealed obstacles, the
    workspace, and the believed object positions."""

    workspace: Workspace
    obstacles: list[Shape]  # revealed fixed obstacles
    object_pos: np.ndarray  # (N, 2) believed positions
    object_radii: np.ndarray
    robot_radius: float
    sensing_range: float
    noise_scale: float = 0.05
    noise_floor: float = 1e-6

    def point_free(self, p, skip_object: int = 0) -> bool:
        r = self.robot_radius
        if not self.workspace.contains_disk(p, r):
            return False
        if min_clearance(self.obstacles, p) < r:
            return False
        for j, (c, rho) in enumerate(zip(self.object_pos, self.object_radii), start=1):
            if j == skip_object:
                continue
            if np.hypot(*(np.asarray(p) - c)) < r + rho - 1e-9:
                return False
        return True

    def segment_free(self, a, b, skip_object: int = 0) -> bool:
        r = self.robot_radius
        if not (self.workspace.contains_disk(a, r) and self.workspace.contains_disk(b, r)):
            return False
        if segment_clearance(self.obstacles, a, b) < r:
            return False
        from .geometry import _point_segment_distance

        for j, (c, rho) in enumerate(zip(self.object_pos, self.object_radii), start=1):
            if j == skip_object:
                continue
            if _point_segment_distance(c, a, b) < r + rho - 1e-9:
                return False
        return True

    def posterior_cov(self, cov: np.ndarray, w) -> np.ndarray:
        return riccati(
            cov,
            w,
            self.object_pos,
            self.obstacles,
            self.sensing_range,
            self.noise_scale,
            self.noise_floor,
        )


def det_marginal(cov: np.ndarray, i: int) -> float:
    s = 2 * (i - 1)
    blk = cov[s : s + 2, s : s + 2]
    return float(blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0])


@dataclass
class PlanNode:
    pos: np.ndarray
    cov_pre: np.ndarray  # covariance on arrival, before measuring here
    cov_post: np.ndarray  # after the measurement taken at pos
    cost: float  # accumulated det recursion from the root
    parent: int | None
    depth: int
    det_post: float
    closed: bool = False


@dataclass
class InformativePlan:
    target: int
    horizon: int
    waypoints: np.ndarray  # (F+1, 2); waypoints[0] == x0
    mu_offline: np.ndarray  # prior mean, constant during planning
    det_offline: np.ndarray  # (F+1,) marginal det after measuring at w(k)
    grasp_target: np.ndarray
    cost: float  # exact accumulated objective along the path
    nodes_grown: int
    iterations: int

    def mu_offline_of(self, i: int) -> np.ndarray:
        s = 2 * (i - 1)
        return self.mu_offline[s : s + 2]


@dataclass
class _Tree:
    nodes: list[PlanNode] = field(default_factory=list)
    cells: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    cell_size: float = 0.5

    def cell_of(self, p) -> tuple[int, int]:
        return (int(np.floor(p[0] / self.cell_size)), int(np.floor(p[1] / self.cell_size)))

    def add(self, node: PlanNode) -> int:
        idx = len(self.nodes)
        self.nodes.append(node)
        self.cells.setdefault(self.cell_of(node.pos), []).append(idx)
        return idx

    def dominated(self, p, cost: float, det_post: float) -> bool:
        """An existing node in the same cell beats the candidate on both
        accumulated cost and target uncertainty."""
        for idx in self.cells.get(self.cell_of(p), []):
            n = self.nodes[idx]
            if n.cost <= cost + 1e-15 and n.det_post <= det_post + 1e-15:
                return True
        return False


def sample_and_extend(
    tree: _Tree, pmap: PlannerMap, target: int, control_set: np.ndarray, rng
) -> int | None:
    """One tree extension; returns the new node id or None on rejection."""
    keys = list(tree.cells.keys())
    cell = keys[rng.integers(len(keys))]
    bucket = [i for i in tree.cells[cell] if not tree.nodes[i].closed]
    if not bucket:
        return None
    parent_id = bucket[rng.integers(len(bucket))]
    parent = tree.nodes[parent_id]
    delta = control_set[rng.integers(len(control_set))]
    w_new = parent.pos + delta
    if not pmap.point_free(w_new) or not pmap.segment_free(parent.pos, w_new):
        return None
    cov_pre = parent.cov_post
    cost = parent.cost + det_marginal(cov_pre, target)
    cov_post = pmap.posterior_cov(cov_pre, w_new)
    det_post = det_marginal(cov_post, target)
    if tree.dominated(w_new, cost, det_post):
        return None
    node = PlanNode(
        pos=w_new,
        cov_pre=cov_pre,
        cov_post=cov_post,
        cost=cost,
        parent=parent_id,
        depth=parent.depth + 1,
        det_post=det_post,
    )
    return tree.add(node)


def select_grasp_target(
    mu_i,
    robot_radius: float,
    object_radius: float,
    pmap: PlannerMap,
    approach_from,
    target: int,
    n_angles: int = 32,
) -> np.ndarray:
    """Collision-free point on the contact circle around mu_i nearest to
    the approach point."""
    mu_i = np.asarray(mu_i, dtype=float)
    contact = robot_radius + object_radius
    best = None
    best_d = np.inf
    for k in range(n_angles):
        ang = 2 * np.pi * k / n_angles
        cand = mu_i + contact * np.array([np.cos(ang), np.sin(ang)])
        if not pmap.point_free(cand, skip_object=target):
            continue
        d = float(np.hypot(*(cand - np.asarray(approach_from))))
        if d < best_d - 1e-12:
            best_d = d
            best = cand
    if best is None:
        raise NoFreeGraspPoint(f"contact circle around {mu_i.tolist()} fully blocked")
    return best


def plan(
    x0,
    prior: GaussianBelief,
    target: int,
    pmap: PlannerMap,
    eps: float,
    control_set: np.ndarray,
    n_max: int = 20000,
    n_stall: int = 2000,
    seed: int = 0,
    grasp_angles: int = 32,
) -> InformativePlan:
    """Solve the uncertainty-reduction problem from x0 for one object.

    The tree keeps the paper's cost recursion (each node adds the marginal
    determinant of its arrival covariance); solutions are compared on the
    exact objective, which extends the recursion by the final posterior
    term.  Raises BudgetExhausted when no node satisfies the terminal
    constraint within the node budget.
    """
    x0 = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(seed)
    cell = max(float(np.max(np.hypot(control_set[:, 0], control_set[:, 1]))), 1e-6)
    tree = _Tree(cell_size=cell)
    root = PlanNode(
        pos=x0,
        cov_pre=np.array(prior.cov, dtype=float),
        cov_post=pmap.posterior_cov(prior.cov, x0),
        cost=det_marginal(prior.cov, target),
        parent=None,
        depth=0,
        det_post=det_marginal(pmap.posterior_cov(prior.cov, x0), target),
    )
    tree.add(root)

    det_prior = det_marginal(prior.cov, target)

    def exact_objective(node: PlanNode) -> float:
        # sum over the path of post-measurement marginal dets
        return node.cost - det_prior + node.det_post

    best_id = None
    best_obj = np.inf
    iterations = 0

    def consider(idx: int):
        nonlocal best_id, best_obj
        node = tree.nodes[idx]
        if node.det_post <= eps:
            obj = exact_objective(node)
            if obj < best_obj - 1e-15:
                best_obj = obj
                best_id = idx
                return True
        return False

    # a satisfying root is globally optimal: every extension adds
    # a nonnegative determinant term
    if not consider(0):
        since_improved = 0
        max_iter = 40 * n_max  # hard stop when every extension is rejected
        while len(tree.nodes) < n_max and iterations < max_iter:
            iterations += 1
            new_id = sample_and_extend(tree, pmap, target, control_set, rng)
            since_improved += 1
            if new_id is not None and consider(new_id):
                since_improved = 0
            if best_id is not None and since_improved >= n_stall:
                break
        if best_id is None:
            best_det = min(n.det_post for n in tree.nodes)
            raise BudgetExhausted(best_det)

    # reconstruct the waypoint path
    path = []
    idx = best_id
    while idx is not None:
        path.append(idx)
        idx = tree.nodes[idx].parent
    path.reverse()
    waypoints = np.array([tree.nodes[i].pos for i in path])
    det_offline = np.array([tree.nodes[i].det_post for i in path])

    mu_i = prior.marginal(target)[0]
    rho = float(pmap.object_radii[target - 1])
    grasp = select_grasp_target(
        mu_i, pmap.robot_radius, rho, pmap, waypoints[-1], target, grasp_angles
    )

    return InformativePlan(
        target=target,
        horizon=len(path) - 1,
        waypoints=waypoints,
        mu_offline=prior.mean.copy(),
        det_offline=det_offline,
        grasp_target=grasp,
        cost=best_obj,
        nodes_grown=len(tree.nodes),
        iterations=iterations,
    )

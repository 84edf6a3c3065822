"""Topology checking on an occupancy grid.

Decides whether a navigation goal is disconnected from the robot by
movable objects (recoverable: returns the blocking stack) or by fixed
obstacles (the action is infeasible), by flood-filling the robot-dilated
freespace with and without the movable objects and walking the adjacency
graph between freespace components and object clusters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ManipStackError, NoPlacementFound, StartInCollision
from .geometry import Shape, Workspace

_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class ClusterAdjacencyViolation(ManipStackError):
    """A movable-object cluster touches more than two freespace components."""


@dataclass
class TopologyGrid:
    origin: np.ndarray
    res: float
    fixed_free: np.ndarray  # (ny, nx) robot-dilated freespace, no movables
    object_cells: list[np.ndarray]  # per object, dilated occupancy

    @property
    def shape(self):
        return self.fixed_free.shape

    def cell_of(self, p) -> tuple[int, int]:
        c = (np.asarray(p, dtype=float) - self.origin) / self.res
        return int(np.floor(c[1])), int(np.floor(c[0]))

    def center_of(self, cell) -> np.ndarray:
        r, c = cell
        return self.origin + self.res * (np.array([c, r]) + 0.5)

    def in_bounds(self, cell) -> bool:
        r, c = cell
        ny, nx = self.shape
        return 0 <= r < ny and 0 <= c < nx

    def objects_mask(self, skip: int = 0) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for j, cells in enumerate(self.object_cells, start=1):
            if j != skip:
                mask |= cells
        return mask


def build_grid(
    workspace: Workspace,
    obstacles: list[Shape],
    object_pos: np.ndarray,
    object_radii: np.ndarray,
    body_radius: float,
    res: float = 0.1,
) -> TopologyGrid:
    """Rasterize the robot's configuration space: a cell is free when a
    disk of body_radius at its center avoids walls and fixed obstacles;
    each movable object contributes its dilated disk."""
    minx, miny, maxx, maxy = workspace.bounds()
    origin = np.array([minx, miny])
    nx = max(1, int(np.ceil((maxx - minx) / res)))
    ny = max(1, int(np.ceil((maxy - miny) / res)))
    xs = minx + res * (np.arange(nx) + 0.5)
    ys = miny + res * (np.arange(ny) + 0.5)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)

    free = workspace.margin_many(pts) >= body_radius - 1e-9

    import shapely

    for shape in obstacles:
        if shape.kind == "disk":
            d = np.hypot(pts[:, 0] - shape.center[0], pts[:, 1] - shape.center[1]) - shape.radius
            d = np.maximum(d, 0.0)
        else:
            d = shapely.distance(shape.geom, shapely.points(pts))
        free &= d >= body_radius - 1e-9

    fixed_free = free.reshape(ny, nx)

    object_cells = []
    for c, rho in zip(np.asarray(object_pos, dtype=float), np.asarray(object_radii, dtype=float)):
        d = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
        object_cells.append((d < rho + body_radius).reshape(ny, nx))

    return TopologyGrid(origin=origin, res=res, fixed_free=fixed_free, object_cells=object_cells)


@dataclass
class TopologyReport:
    is_feasible: bool
    blocking_stack: list[int] = field(default_factory=list)
    free_component: np.ndarray | None = None  # refined enclosing freespace mask

    def __post_init__(self):
        if not self.is_feasible and self.blocking_stack:
            raise ValueError("infeasible reports carry no blocking stack")


def _snap_to_free(free: np.ndarray, cell, max_ring: int = 3):
    if free[cell]:
        return cell
    r0, c0 = cell
    ny, nx = free.shape
    for ring in range(1, max_ring + 1):
        for dr in range(-ring, ring + 1):
            for dc in range(-ring, ring + 1):
                if max(abs(dr), abs(dc)) != ring:
                    continue
                r, c = r0 + dr, c0 + dc
                if 0 <= r < ny and 0 <= c < nx and free[r, c]:
                    return (r, c)
    return None


def check_on_grid(grid: TopologyGrid, start_cell, goal_cell) -> TopologyReport:
    """Core decision on a prepared grid; see module docstring."""
    objects_mask = grid.objects_mask()
    free = grid.fixed_free & ~objects_mask

    start = _snap_to_free(free, start_cell)
    if start is None:
        raise StartInCollision(f"no free cell near {start_cell}")

    labels, _ = ndimage.label(free, structure=_STRUCT4)
    start_label = labels[start]
    if grid.in_bounds(goal_cell) and labels[goal_cell] == start_label:
        return TopologyReport(True, [], labels == start_label)

    # allow travel through movable objects
    free_plus = grid.fixed_free
    labels_plus, _ = ndimage.label(free_plus, structure=_STRUCT4)
    if (
        not grid.in_bounds(goal_cell)
        or not free_plus[goal_cell]
        or labels_plus[goal_cell] != labels_plus[start]
    ):
        return TopologyReport(False, [], labels == start_label)

    # adjacency graph between freespace components and object clusters
    clusters, n_clusters = ndimage.label(objects_mask & grid.fixed_free, structure=_STRUCT4)
    comp_of_cell = labels  # 0 where not free

    # vertices: ("comp", id) and ("cluster", id)
    adj: dict[tuple[str, int], set[tuple[str, int]]] = {}

    def link(a, b):
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    ny, nx = grid.shape
    cl = clusters
    fr = comp_of_cell
    for dr, dc in ((1, 0), (0, 1)):
        a_cl = cl[: ny - dr if dr else ny, : nx - dc if dc else nx]
        b_cl = cl[dr:, dc:]
        a_fr = fr[: ny - dr if dr else ny, : nx - dc if dc else nx]
        b_fr = fr[dr:, dc:]
        pairs = set()
        m = (a_cl > 0) & (b_fr > 0)
        pairs |= set(zip(a_cl[m].tolist(), b_fr[m].tolist()))
        m = (b_cl > 0) & (a_fr > 0)
        pairs |= set(zip(b_cl[m].tolist(), a_fr[m].tolist()))
        for cid, fid in pairs:
            link(("cluster", cid), ("comp", fid))

    for cid in range(1, n_clusters + 1):
        neigh = adj.get(("cluster", cid), set())
        if len(neigh) > 2:
            raise ClusterAdjacencyViolation(
                f"object cluster {cid} touches {len(neigh)} freespace components"
            )

    root = ("comp", int(start_label))
    if clusters[goal_cell] > 0:
        goal_vertex = ("cluster", int(clusters[goal_cell]))
    else:
        goal_vertex = ("comp", int(labels[goal_cell]))

    # BFS path root -> goal vertex
    parent: dict[tuple[str, int], tuple[str, int]] = {root: root}
    frontier = [root]
    found = root == goal_vertex
    while frontier and not found:
        nxt = []
        for v in frontier:
            for w in sorted(adj.get(v, ())):
                if w in parent:
                    continue
                parent[w] = v
                if w == goal_vertex:
                    found = True
                nxt.append(w)
        frontier = nxt
    if not found:
        # movable clusters do not bridge the gap after all
        return TopologyReport(False, [], labels == start_label)

    path_clusters: list[int] = []
    v = goal_vertex
    while v != root:
        if v[0] == "cluster":
            path_clusters.append(v[1])
        v = parent[v]
    path_clusters.reverse()  # robot-side first

    blocking: list[int] = []
    for cid in path_clusters:
        cluster_mask = clusters == cid
        for j, cells in enumerate(grid.object_cells, start=1):
            if j not in blocking and np.any(cells & cluster_mask):
                blocking.append(j)

    return TopologyReport(True, blocking, labels == start_label)


def topology_check(
    start,
    goal,
    workspace: Workspace,
    obstacles: list[Shape],
    object_pos,
    object_radii,
    body_radius: float,
    res: float = 0.1,
) -> TopologyReport:
    grid = build_grid(workspace, obstacles, np.asarray(object_pos), np.asarray(object_radii), body_radius, res)
    return check_on_grid(grid, grid.cell_of(start), grid.cell_of(goal))


@dataclass(frozen=True)
class Disassemble:
    """Relocation command produced by Fix mode, opaque to the symbolic layer."""

    obj: int
    target: np.ndarray

    def __str__(self):
        return f"Disassemble({self.obj}, [{self.target[0]:.2f},{self.target[1]:.2f}])"


def _corridor_mask(grid: TopologyGrid, start_cell, goal_cell) -> np.ndarray:
    """Cells on the shortest start-goal path through freespace-plus-objects,
    dilated; placements must stay clear of it."""
    free_plus = grid.fixed_free
    ny, nx = grid.shape
    dist = np.full((ny, nx), -1, dtype=int)
    dist[start_cell] = 0
    frontier = [start_cell]
    while frontier and dist[goal_cell] < 0:
        nxt = []
        for r, c in frontier:
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < ny and 0 <= cc < nx and free_plus[rr, cc] and dist[rr, cc] < 0:
                    dist[rr, cc] = dist[r, c] + 1
                    nxt.append((rr, cc))
        frontier = nxt
    mask = np.zeros((ny, nx), dtype=bool)
    if dist[goal_cell] < 0:
        return mask
    cur = goal_cell
    mask[cur] = True
    while cur != start_cell:
        r, c = cur
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < ny and 0 <= cc < nx and dist[rr, cc] == dist[r, c] - 1:
                cur = (rr, cc)
                mask[cur] = True
                break
    return mask


def plan_fix_mode(
    report: TopologyReport,
    grid: TopologyGrid,
    start_cell,
    goal_cell,
    object_pos: np.ndarray,
    object_radii: np.ndarray,
    body_radius: float,
    keepout_shapes: list[Shape] = (),
    corridor_margin: float = 0.35,
) -> list[Disassemble]:
    """Choose relocation spots for every blocking object: the nearest cell
    outside the travel corridor where the object fits with clearance, kept
    off any declared keep-out areas (mission regions).  Placements are
    simulated sequentially so later blockers respect earlier moves."""
    if not report.blocking_stack:
        return []
    pos = np.asarray(object_pos, dtype=float).copy()
    radii = np.asarray(object_radii, dtype=float)
    corridor = _corridor_mask(grid, start_cell, goal_cell)
    corridor_dist = ndimage.distance_transform_edt(~corridor) * grid.res

    ny, nx = grid.shape
    xs = grid.origin[0] + grid.res * (np.arange(nx) + 0.5)
    ys = grid.origin[1] + grid.res * (np.arange(ny) + 0.5)
    gx, gy = np.meshgrid(xs, ys)

    out: list[Disassemble] = []
    for j in report.blocking_stack:
        rho = float(radii[j - 1])
        need = rho + body_radius  # the carried pair must fit while releasing
        ok = grid.fixed_free & (corridor_dist >= need + corridor_margin)
        for shape in keepout_shapes:
            if shape.kind == "disk":
                d = np.hypot(gx - shape.center[0], gy - shape.center[1]) - shape.radius
            else:
                import shapely

                d = shapely.distance(
                    shape.geom, shapely.points(np.stack([gx.ravel(), gy.ravel()], axis=1))
                ).reshape(ny, nx)
                d = np.asarray(d)
            ok &= d >= rho
        for other in range(1, len(radii) + 1):
            if other == j:
                continue
            d = np.hypot(gx - pos[other - 1][0], gy - pos[other - 1][1])
            ok &= d >= rho + radii[other - 1] + 2 * body_radius + 0.1
        if not np.any(ok):
            raise NoPlacementFound(f"no clear spot for object {j}")
        d_obj = np.hypot(gx - pos[j - 1][0], gy - pos[j - 1][1])
        d_obj[~ok] = np.inf
        cell = np.unravel_index(int(np.argmin(d_obj)), d_obj.shape)
        target = grid.center_of(cell)
        out.append(Disassemble(j, target))
        pos[j - 1] = target
    return out

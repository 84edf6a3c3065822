"""Scenario files: JSON-compatible structured text describing the world,
the prior belief, thresholds, controller parameters, and the mission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .belief import GaussianBelief, is_psd
from .errors import ScenarioError
from .geometry import Shape, Workspace
from .ltl import Formula, atoms_of, parse_formula
from .world import Obstacle, Region, RobotParams, WorldState


@dataclass
class PlannerParams:
    step: float = 0.5
    directions: int = 8
    n_max: int = 20000
    n_stall: int = 2000
    grasp_angles: int = 32

    def control_set(self) -> np.ndarray:
        ang = 2 * np.pi * np.arange(self.directions) / self.directions
        return self.step * np.stack([np.cos(ang), np.sin(ang)], axis=1)


@dataclass
class ControllerParams:
    k_v: float = 1.5
    k_omega: float = 3.0
    arrival_tol: float = 0.05
    t_stall: float = 10.0
    delta_prog: float = 0.01
    replan_max: int = 10


@dataclass
class Thresholds:
    eps: float = 1e-3  # grasp uncertainty gate, m^4
    eps_sigma: float = 1e-3  # replanning det slack, m^4
    eps_mu: float = 0.3  # replanning mean deviation, m


@dataclass
class ScenarioConfig:
    name: str
    seed: int
    workspace: list
    robot_start: list
    robot_heading: float
    robot: RobotParams
    sensing_range: float
    noise_scale: float
    noise_floor: float
    thresholds: Thresholds
    objects: list[dict]
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    regions: list[list]
    obstacles: list[dict]
    formula_text: str
    formula: Formula
    planner: PlannerParams
    controller: ControllerParams
    grid_resolution: float = 0.1
    max_steps: int = 40000
    n_cycles: int = 2
    extra: dict = field(default_factory=dict)


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from None
    return parse_config(raw, default_name=path.stem)


def parse_config(raw: dict, default_name: str = "scenario") -> ScenarioConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    name = raw.get("name", default_name)
    seed = int(raw.get("seed", 0))

    ws = raw.get("workspace")
    _require(isinstance(ws, list) and len(ws) >= 3, "workspace needs >= 3 vertices")

    robot_raw = raw.get("robot", {})
    robot = RobotParams(
        radius=float(robot_raw.get("radius", 0.3)),
        v_max=float(robot_raw.get("v_max", 1.0)),
        omega_max=float(robot_raw.get("omega_max", 2.0)),
        dt=float(robot_raw.get("dt", 0.05)),
    )
    start = robot_raw.get("start")
    _require(start is not None and len(start) == 2, "robot.start missing")
    heading = float(robot_raw.get("heading", 0.0))

    sensor = raw.get("sensor", {})
    sensing_range = float(sensor.get("range", 3.0))
    _require(sensing_range > 0, "sensor.range must be positive")

    noise = raw.get("noise", {})
    noise_scale = float(noise.get("scale", 0.05))
    noise_floor = float(noise.get("floor", 1e-6))

    th_raw = raw.get("thresholds", {})
    thresholds = Thresholds(
        eps=float(th_raw.get("eps", 1e-3)),
        eps_sigma=float(th_raw.get("eps_sigma", 1e-3)),
        eps_mu=float(th_raw.get("eps_mu", 0.3)),
    )
    _require(
        thresholds.eps > 0 and thresholds.eps_sigma > 0 and thresholds.eps_mu > 0,
        "thresholds must be positive",
    )

    objects = raw.get("objects", [])
    _require(objects, "at least one movable object required")
    for obj in objects:
        _require("position" in obj and "radius" in obj, "object needs position and radius")

    n = len(objects)
    prior = raw.get("prior", {})
    mean_rows = prior.get("mean")
    _require(
        mean_rows is not None and len(mean_rows) == n,
        "prior.mean must list one xy pair per object",
    )
    prior_mean = np.asarray(mean_rows, dtype=float).reshape(-1)

    if "cov" in prior:
        prior_cov = np.asarray(prior["cov"], dtype=float)
        _require(prior_cov.shape == (2 * n, 2 * n), "prior.cov shape mismatch")
    else:
        sig = prior.get("sigma")
        _require(sig is not None, "prior needs sigma (per-object std) or cov")
        sig = [float(s) for s in (sig if isinstance(sig, list) else [sig] * n)]
        _require(len(sig) == n, "prior.sigma length mismatch")
        prior_cov = np.diag(np.repeat(np.array(sig) ** 2, 2))
    _require(is_psd(prior_cov), "prior covariance must be PSD")

    regions = raw.get("regions", [])
    region_vertices = []
    for reg in regions:
        verts = reg["vertices"] if isinstance(reg, dict) else reg
        _require(len(verts) >= 3, "region needs >= 3 vertices")
        region_vertices.append(verts)

    obstacles = raw.get("obstacles", [])
    for obs in obstacles:
        _require(
            ("disk" in obs) != ("polygon" in obs),
            "obstacle must have exactly one of disk [x,y,r] or polygon vertices",
        )

    formula_text = raw.get("formula")
    _require(formula_text, "formula missing")
    formula = parse_formula(formula_text)
    for pred in atoms_of(formula):
        _require(1 <= pred.obj <= n, f"formula references unknown object {pred.obj}")
        if pred.region is not None:
            _require(
                1 <= pred.region <= len(region_vertices),
                f"formula references unknown region {pred.region}",
            )

    pl_raw = raw.get("planner", {})
    planner = PlannerParams(
        step=float(pl_raw.get("step", 0.5)),
        directions=int(pl_raw.get("directions", 8)),
        n_max=int(pl_raw.get("n_max", 20000)),
        n_stall=int(pl_raw.get("n_stall", 2000)),
        grasp_angles=int(pl_raw.get("grasp_angles", 32)),
    )
    _require(planner.step > 0, "planner.step must be positive")
    _require(
        planner.step <= sensing_range + 1e-9,
        "planner step must not exceed the sensing range",
    )

    ct_raw = raw.get("controller", {})
    controller = ControllerParams(
        k_v=float(ct_raw.get("k_v", 1.5)),
        k_omega=float(ct_raw.get("k_omega", 3.0)),
        arrival_tol=float(ct_raw.get("arrival_tol", 0.05)),
        t_stall=float(ct_raw.get("t_stall", 10.0)),
        delta_prog=float(ct_raw.get("delta_prog", 0.01)),
        replan_max=int(ct_raw.get("replan_max", 10)),
    )

    topo = raw.get("topology", {})
    run = raw.get("run", {})

    return ScenarioConfig(
        name=name,
        seed=seed,
        workspace=ws,
        robot_start=list(map(float, start)),
        robot_heading=heading,
        robot=robot,
        sensing_range=sensing_range,
        noise_scale=noise_scale,
        noise_floor=noise_floor,
        thresholds=thresholds,
        objects=objects,
        prior_mean=prior_mean,
        prior_cov=prior_cov,
        regions=region_vertices,
        obstacles=obstacles,
        formula_text=formula_text,
        formula=formula,
        planner=planner,
        controller=controller,
        grid_resolution=float(topo.get("grid", 0.1)),
        max_steps=int(run.get("max_steps", 40000)),
        n_cycles=int(run.get("n_cycles", 2)),
        extra=raw.get("extra", {}),
    )


def build_world(cfg: ScenarioConfig) -> WorldState:
    workspace = Workspace.from_vertices(cfg.workspace)
    obstacles = []
    for raw in cfg.obstacles:
        if "disk" in raw:
            x, y, r = raw["disk"]
            shape = Shape.disk([x, y], r)
            familiar = False
        else:
            shape = Shape.polygon(raw["polygon"])
            familiar = True
        obstacles.append(
            Obstacle(shape=shape, revealed=bool(raw.get("revealed", False)), familiar=familiar)
        )
    regions = [Region(np.asarray(v, dtype=float)) for v in cfg.regions]
    world = WorldState(
        workspace=workspace,
        regions=regions,
        object_pos=np.asarray([o["position"] for o in cfg.objects], dtype=float),
        object_radii=np.asarray([o["radius"] for o in cfg.objects], dtype=float),
        obstacles=obstacles,
        robot=cfg.robot,
        x=np.asarray(cfg.robot_start, dtype=float),
        psi=cfg.robot_heading,
        sensing_range=cfg.sensing_range,
        noise_scale=cfg.noise_scale,
        noise_floor=cfg.noise_floor,
    )
    if not world.pose_free(world.x, world.psi):
        raise ScenarioError("robot start pose is not collision free")
    return world


def build_prior(cfg: ScenarioConfig) -> GaussianBelief:
    return GaussianBelief(cfg.prior_mean.copy(), cfg.prior_cov.copy())


def scenario_path(name: str) -> Path:
    """Path of a bundled scenario file (with or without the .cfg suffix)."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    base = resources.files("manipstack") / "scenarios" / name
    with resources.as_file(base) as p:
        return Path(p)


def bundled_scenarios() -> list[str]:
    base = resources.files("manipstack") / "scenarios"
    return sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".cfg"))

"""Scenario configuration: dataclass, INI-style file parsing, validation."""

from __future__ import annotations

import configparser
import math
import os
import random
from dataclasses import dataclass, field

from .frontier import FilterParams
from .grid import FREE, GroundTruthMap, world_to_grid
from .pgm import load_truth
from .posegraph import GraphBuildParams
from .utility import UtilityParams
from .worlds import default_starts, make_world

METHODS = ("proposed", "mags", "greedy_frontier")


class ConfigError(Exception):
    pass


@dataclass
class ScenarioConfig:
    map_source: str = "builtin:desk"
    robot_count: int = 3
    start_poses: list[tuple[float, float, float]] | None = None
    beam_count: int = 360
    max_range: float = 5.0
    filter_params: FilterParams = field(default_factory=FilterParams)
    utility_params: UtilityParams = field(default_factory=UtilityParams)
    graph_params: GraphBuildParams = field(default_factory=GraphBuildParams)
    goal_skip_wait: int = 5
    speed: float = 1.0
    dt: float = 1.0
    max_sim_time: float = 300.0
    seed: int = 1
    method: str = "proposed"
    inflation_cells: int = 1

    def load_world(self) -> GroundTruthMap:
        if self.map_source.startswith("builtin:"):
            return make_world(self.map_source.split(":", 1)[1])
        if not os.path.exists(self.map_source):
            raise ConfigError(f"map file not found: {self.map_source}")
        try:
            return load_truth(self.map_source)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load map {self.map_source}: {exc}") from exc

    def resolve_starts(self, truth: GroundTruthMap) -> list[tuple[float, float, float]]:
        """Start poses for all robots, with a seed-dependent jitter.

        The jitter perturbs heading freely and position within the start
        cell, so distinct seeds explore differently while the Free-cell
        requirement is preserved. Fully deterministic per seed.
        """
        if self.start_poses is not None:
            starts = self.start_poses
        elif self.map_source.startswith("builtin:"):
            starts = default_starts(self.map_source.split(":", 1)[1], self.robot_count)
        else:
            raise ConfigError("start_poses is required for file-based maps")
        if len(starts) != self.robot_count:
            raise ConfigError(
                f"{len(starts)} start poses for {self.robot_count} robots"
            )

        rng = random.Random(self.seed)
        jitter = 0.3 * truth.resolution
        poses = []
        for x, y, heading in starts:
            cx, cy = world_to_grid(x, y, truth)
            if not truth.in_bounds(cx, cy) or truth.cells[cy, cx] != FREE:
                raise ConfigError(f"start pose ({x}, {y}) is not in a free cell")
            poses.append((
                x + rng.uniform(-jitter, jitter),
                y + rng.uniform(-jitter, jitter),
                (heading + rng.uniform(0.0, 2.0 * math.pi)) % (2.0 * math.pi),
            ))
        return poses

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; have {METHODS}")
        if self.robot_count < 1:
            raise ConfigError("need at least one robot")
        if self.max_sim_time <= 0 or self.dt <= 0 or self.speed <= 0:
            raise ConfigError("max_sim_time, dt and speed must be positive")
        if self.beam_count < 4 or self.max_range <= 0:
            raise ConfigError("need beam_count >= 4 and positive max_range")
        if self.goal_skip_wait < 1:
            raise ConfigError("goal_skip_wait must be >= 1")
        if self.inflation_cells < 0:
            raise ConfigError("inflation_cells must be >= 0")


def _parse_poses(text: str) -> list[tuple[float, float, float]]:
    poses = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p for p in chunk.replace(",", " ").split() if p]
        if len(parts) != 3:
            raise ConfigError(f"bad pose triple: {chunk!r}")
        poses.append((float(parts[0]), float(parts[1]), float(parts[2])))
    return poses


def load_config(path: str) -> ScenarioConfig:
    """Parse a key = value config file with [section] headers and '#'
    comments. All keys are optional; missing ones take defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    cfg = ScenarioConfig()

    def get(section, key, cast, default):
        if parser.has_option(section, key):
            try:
                return cast(parser.get(section, key))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
        return default

    cfg.map_source = get("scenario", "map", str, cfg.map_source).strip()
    cfg.robot_count = get("scenario", "robots", int, cfg.robot_count)
    if parser.has_option("scenario", "start_poses"):
        cfg.start_poses = _parse_poses(parser.get("scenario", "start_poses"))
    cfg.method = get("scenario", "method", str, cfg.method).strip()
    cfg.seed = get("scenario", "seed", int, cfg.seed)
    cfg.speed = get("scenario", "speed", float, cfg.speed)
    cfg.dt = get("scenario", "dt", float, cfg.dt)
    cfg.max_sim_time = get("scenario", "max_sim_time", float, cfg.max_sim_time)

    cfg.beam_count = get("lidar", "beam_count", int, cfg.beam_count)
    cfg.max_range = get("lidar", "max_range", float, cfg.max_range)

    try:
        cfg.filter_params = FilterParams(
            rad=get("filter", "rad", float, 1.0),
            per_unk=get("filter", "per_unk", float, 60.0),
            min_pts=get("filter", "min_pts", int, 0),
            max_pts=get("filter", "max_pts", int, 10),
            rad_step=get("filter", "rad_step", float, 0.25),
            perc_step=get("filter", "perc_step", float, 10.0),
        )
        cfg.utility_params = UtilityParams(
            decay_rate=get("utility", "decay_rate", float, 0.1),
            u1_weight=get("utility", "u1_weight", float, 1.0),
        )
        cfg.graph_params = GraphBuildParams(
            node_spacing=get("graph", "node_spacing", float, 1.0),
            loop_closure_radius=get("graph", "loop_closure_radius", float, 2.0),
            odometry_weight=get("graph", "odometry_weight", float, 1.0),
            loop_weight=get("graph", "loop_weight", float, 2.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    cfg.goal_skip_wait = get("allocation", "goal_skip_wait", int, cfg.goal_skip_wait)
    cfg.inflation_cells = get("planner", "inflation_cells", int, cfg.inflation_cells)

    cfg.validate()
    return cfg

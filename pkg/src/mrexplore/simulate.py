"""Deterministic tick-loop simulator orchestrating the per-agent workflow:
sense, merge, filter frontiers, score candidates, allocate goals, move.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .allocate import (
    AllocationState,
    GoalReply,
    NoAssignableGoal,
    PointsReply,
    RequestTurn,
    RewardMatrix,
    RewardRow,
    SubmitPoints,
    SubmitRewards,
    evict_known_goals,
    schedule,
    select_goal,
)
from .config import ScenarioConfig
from .frontier import (
    FrontierPoint,
    detect_frontiers,
    disc_unknown_stats,
    filter_pipeline,
    merge_points,
)
from .grid import (
    FREE,
    OCCUPIED,
    OccupancyGrid,
    coverage_percent,
    inflate_obstacles,
    map_entropy,
    merge_maps,
    world_to_grid,
)
from .planner import (
    GridPath,
    cumulative_lengths,
    plan_many,
    pose_at,
    project_arclength,
)
from .posegraph import PoseGraph, extend_trajectory
from .quality import MapQuality, map_quality
from .sensing import integrate_scan, raycast
from .utility import score_candidates

log = logging.getLogger("mrexplore")

FULL_COVERAGE_STOP = 99.95
STALL_LIMIT = 3  # ticks without progress before a goal is abandoned


@dataclass
class Robot:
    rid: int
    pose: tuple[float, float, float]
    grid: OccupancyGrid
    graph: PoseGraph
    path: GridPath | None = None
    goal: tuple[float, float] | None = None
    distance: float = 0.0
    wants_goal: bool = True
    stall_ticks: int = 0

    def drop_goal(self):
        self.path = None
        self.goal = None
        self.wants_goal = True
        self.stall_ticks = 0


@dataclass
class TickRow:
    time: float
    robot_coverage: list[float]
    merged_coverage: float
    frontier_raw: int
    frontier_filtered: int
    entropy_bits: float
    loop_closures: int


@dataclass
class RunMetrics:
    robot_count: int
    rows: list[TickRow] = field(default_factory=list)
    iterations: list[tuple[float, int, int]] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)
    final_quality: MapQuality | None = None

    @property
    def final_coverage(self) -> float:
        return self.rows[-1].merged_coverage if self.rows else 0.0

    def mean_reduction_percent(self) -> float:
        """Mean per-iteration frontier reduction, over iterations that saw
        at least one raw point."""
        vals = [
            100.0 * (1.0 - filtered / raw)
            for _, raw, filtered in self.iterations
            if raw > 0
        ]
        return sum(vals) / len(vals) if vals else 0.0

    def csv_header(self) -> list[str]:
        cols = ["time"]
        cols += [f"coverage_r{i}" for i in range(self.robot_count)]
        cols += ["coverage_merged", "frontier_raw", "frontier_filtered",
                 "map_entropy_bits", "loop_closures"]
        return cols

    def to_csv(self) -> str:
        lines = [",".join(self.csv_header())]
        for r in self.rows:
            parts = [f"{r.time:.6f}"]
            parts += [f"{c:.6f}" for c in r.robot_coverage]
            parts += [
                f"{r.merged_coverage:.6f}",
                str(r.frontier_raw),
                str(r.frontier_filtered),
                f"{r.entropy_bits:.6f}",
                str(r.loop_closures),
            ]
            lines.append(",".join(parts))
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        q = self.final_quality
        cols = ["final_time", "final_coverage", "mean_reduction_pct",
                "ssim", "rmse", "alignment_error"]
        cols += [f"distance_r{i}" for i in range(self.robot_count)]
        vals = [
            f"{self.rows[-1].time:.6f}" if self.rows else "0.000000",
            f"{self.final_coverage:.6f}",
            f"{self.mean_reduction_percent():.6f}",
            f"{q.ssim:.6f}", f"{q.rmse:.6f}", f"{q.alignment_error:.6f}",
        ]
        vals += [f"{d:.6f}" for d in self.distances]
        return ",".join(cols) + "\n" + ",".join(vals) + "\n"


class ExplorationSim:
    """One scenario run. Build it from a ScenarioConfig, then call run()."""

    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.truth = config.load_world()
        starts = config.resolve_starts(self.truth)
        self.robots = [
            Robot(i, starts[i], self.truth.blank_grid(), PoseGraph())
            for i in range(config.robot_count)
        ]
        self.state = AllocationState(goal_skip_wait=config.goal_skip_wait)
        self.merged = merge_maps([r.grid for r in self.robots])
        self.message_trace: list[object] = []

    # -- workflow ----------------------------------------------------------

    def _cell_key(self, p):
        return world_to_grid(p.x, p.y, self.merged)

    def _sense_all(self):
        cfg = self.config
        for r in self.robots:
            scan = raycast(self.truth, r.pose, cfg.beam_count, cfg.max_range)
            r.grid = integrate_scan(r.grid, scan)
            extend_trajectory(r.graph, r.pose, cfg.graph_params)
        self.merged = merge_maps([r.grid for r in self.robots])

    def _planning_grid(self, robot: Robot, goals=()) -> OccupancyGrid:
        """Inflated copy of the merged map for planning. Inflation must not
        swallow the robot's own cell or a candidate goal cell; those keep the
        merged map's state."""
        g = inflate_obstacles(self.merged, self.config.inflation_cells)
        restore = [(robot.pose[0], robot.pose[1])] + [(p[0], p[1]) for p in goals]
        for x, y in restore:
            cx, cy = world_to_grid(x, y, g)
            if g.in_bounds(cx, cy):
                g.cells[cy, cx] = self.merged.cells[cy, cx]
        cx, cy = world_to_grid(robot.pose[0], robot.pose[1], g)
        if g.in_bounds(cx, cy) and g.cells[cy, cx] == OCCUPIED:
            g.cells[cy, cx] = FREE
        return g

    def _goal_area_known(self, goal) -> bool:
        unk, total = disc_unknown_stats(
            FrontierPoint(goal[0], goal[1]), self.merged,
            self.config.filter_params.rad,
        )
        return total > 0 and unk == 0

    def run_iteration(self, robot: Robot) -> tuple[int, int, bool]:
        """Steps 1-7 for one served agent: gather lists, filter, score,
        allocate, plan. Returns (raw count, offered count, got_goal)."""
        cfg = self.config
        self.message_trace.append(RequestTurn(robot.rid))

        local_lists = [detect_frontiers(r.grid, r.rid) for r in self.robots]
        for r, pts in zip(self.robots, local_lists):
            self.message_trace.append(
                SubmitPoints(r.rid, tuple((p.x, p.y) for p in pts))
            )
        raw = [p for pts in local_lists for p in pts]

        if cfg.method == "proposed":
            outcome = filter_pipeline(local_lists, self.merged, cfg.filter_params)
            offered = outcome.points
        elif cfg.method == "mags":
            offered = raw  # filtering pipeline bypassed
        else:  # greedy_frontier: dedup only, no border filtering
            offered = merge_points(local_lists, self.merged, cfg.filter_params,
                                   per_unk=0.0)
        self.message_trace.append(PointsReply(tuple((p.x, p.y) for p in offered)))
        if not offered:
            return len(raw), 0, False

        planning_grid = self._planning_grid(robot, [(p.x, p.y) for p in offered])

        if cfg.method == "greedy_frontier":
            got = self._assign_greedy(robot, offered, planning_grid)
            return len(raw), len(offered), got

        try:
            scores = score_candidates(
                robot.pose, self.merged, robot.graph, offered,
                lambda goals: plan_many(planning_grid, robot.pose, goals),
                cfg.utility_params, cfg.graph_params,
            )
        except ValueError:
            log.info("agent %d: no reachable candidate this round", robot.rid)
            return len(raw), len(offered), False
        if cfg.method == "mags":
            # graph-gain + distance decay only
            rows = [
                RewardRow(s.point,
                          cfg.utility_params.u1_weight * s.gain + s.gamma
                          if s.path is not None else s.reward)
                for s in scores
            ]
        else:
            rows = [RewardRow(s.point, s.reward) for s in scores]
        matrix = RewardMatrix(rows, robot.rid)
        self.message_trace.append(SubmitRewards(
            robot.rid, tuple((r.point.x, r.point.y, r.reward) for r in matrix.rows)
        ))

        if cfg.method == "proposed":
            try:
                goal_pt = select_goal(matrix, self.state, self._cell_key)
            except NoAssignableGoal:
                log.info("agent %d: no assignable goal this round", robot.rid)
                return len(raw), len(offered), False
        else:
            finite = [(i, r) for i, r in enumerate(matrix.rows)
                      if math.isfinite(r.reward)]
            best_i = max(finite, key=lambda ir: (ir[1].reward, -ir[0]))[0]
            goal_pt = matrix.rows[best_i].point

        self.message_trace.append(GoalReply(goal_pt.x, goal_pt.y))
        path = next(s.path for s in scores if s.point is goal_pt)
        robot.path = path
        robot.goal = path.goal
        robot.wants_goal = False
        robot.stall_ticks = 0
        return len(raw), len(offered), True

    def _free_run_limit(self, path: GridPath) -> float:
        """Arclength up to which every path cell is currently Free on the
        merged map. Motion never proceeds past this point, so robots only
        ever occupy cells their scans proved free."""
        cum = cumulative_lengths(path)
        cells = self.merged.cells
        limit = 0.0
        for i, (cx, cy) in enumerate(path.cells):
            if cells[cy, cx] != FREE:
                return limit
            limit = cum[i]
        return limit

    def _advance(self, robot: Robot, speed: float, dt: float) -> None:
        """Move along the path, clamped to the proven-free prefix; replan
        around newly seen obstacles and abandon goals that stall."""
        path = robot.path
        blocked_by_wall = any(
            self.merged.cells[cy, cx] == OCCUPIED for cx, cy in path.cells
        )
        if blocked_by_wall:
            grid = self._planning_grid(robot, [robot.goal])
            new_paths = plan_many(grid, robot.pose, [robot.goal])
            if new_paths[0] is None:
                log.debug("agent %d: goal unreachable after replan", robot.rid)
                robot.drop_goal()
                return
            path = robot.path = new_paths[0]

        total = cumulative_lengths(path)[-1]
        s = project_arclength(path, robot.pose)
        target = min(s + speed * dt, self._free_run_limit(path))
        if target <= s + 1e-9 and target < total - 1e-9:
            robot.stall_ticks += 1
            if robot.stall_ticks >= STALL_LIMIT:
                log.debug("agent %d: stalled, abandoning goal", robot.rid)
                robot.drop_goal()
            return
        robot.stall_ticks = 0
        old = robot.pose
        robot.pose = pose_at(path, target, robot.pose[2])
        robot.distance += math.hypot(robot.pose[0] - old[0], robot.pose[1] - old[1])
        if target >= total - 1e-9:
            robot.path = None
            robot.goal = None
            robot.wants_goal = True

    def _assign_greedy(self, robot, offered, planning_grid) -> bool:
        order = sorted(
            range(len(offered)),
            key=lambda i: (math.hypot(offered[i].x - robot.pose[0],
                                      offered[i].y - robot.pose[1]), i),
        )
        paths = plan_many(planning_grid, robot.pose,
                          [(offered[i].x, offered[i].y) for i in order])
        for path in paths:
            if path is not None:
                self.message_trace.append(GoalReply(*path.goal))
                robot.path = path
                robot.goal = path.goal
                robot.wants_goal = False
                robot.stall_ticks = 0
                return True
        return False

    # -- main loop ---------------------------------------------------------

    def run(self) -> RunMetrics:
        cfg = self.config
        metrics = RunMetrics(robot_count=cfg.robot_count)
        ticks = int(round(cfg.max_sim_time / cfg.dt))

        for k in range(ticks):
            t = (k + 1) * cfg.dt
            self._sense_all()

            if self.state.chosen_coords:
                evicted = evict_known_goals(
                    self.state, self.merged, cfg.filter_params.rad
                )
                if evicted:
                    log.debug("t=%.1f evicted %d stale goals", t, evicted)

            # abandon goals whose surroundings are already fully mapped
            for r in self.robots:
                if r.path is not None and self._goal_area_known(r.goal):
                    r.drop_goal()

            raw_n = filtered_n = 0
            pending = {r.rid for r in self.robots if r.wants_goal}
            if pending:
                rid = schedule(pending, self.state)
                raw_n, filtered_n, _ = self.run_iteration(self.robots[rid])
                metrics.iterations.append((t, raw_n, filtered_n))

            for r in self.robots:
                if r.path is not None:
                    self._advance(r, cfg.speed, cfg.dt)

            merged_cov = coverage_percent(self.merged, self.truth)
            metrics.rows.append(TickRow(
                time=t,
                robot_coverage=[coverage_percent(r.grid, self.truth)
                                for r in self.robots],
                merged_coverage=merged_cov,
                frontier_raw=raw_n,
                frontier_filtered=filtered_n,
                entropy_bits=map_entropy(self.merged),
                loop_closures=sum(r.graph.loop_closure_count()
                                  for r in self.robots),
            ))
            if merged_cov >= FULL_COVERAGE_STOP:
                log.info("full coverage at t=%.1f", t)
                break

        metrics.distances = [r.distance for r in self.robots]
        metrics.final_quality = map_quality(self.merged, self.truth)
        return metrics


def run(config: ScenarioConfig) -> RunMetrics:
    """Run one scenario to completion; identical config and seed give an
    identical metrics stream."""
    return ExplorationSim(config).run()

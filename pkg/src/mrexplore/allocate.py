"""Centralized goal allocation: serialized request scheduling with
ascending-id priority plus starvation override, chosen-goal memory, and
reward spreading that pushes agents apart."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .frontier import FrontierPoint, disc_unknown_stats

SUPPRESSED = float("-inf")


@dataclass
class RewardRow:
    point: FrontierPoint
    reward: float


@dataclass
class RewardMatrix:
    rows: list[RewardRow]
    owner: int


@dataclass
class AllocationState:
    """Server-side memory: previously assigned goals and per-agent
    deferred-request counters."""

    goal_skip_wait: int = 5
    chosen_coords: list[FrontierPoint] = field(default_factory=list)
    skip_counters: dict[int, int] = field(default_factory=dict)


class NoAssignableGoal(Exception):
    """Every reward row is suppressed; the caller should refresh frontiers."""


def schedule(pending: set[int], state: AllocationState) -> int:
    """Pick the next agent to serve from the pending set.

    Lowest id wins unless some pending agent has been deferred
    goal_skip_wait times or more; then the longest-starved such agent is
    served (ties to the lowest id). Every other pending agent's counter
    goes up by one and the served agent's counter resets.
    """
    if not pending:
        raise ValueError("no pending agents")
    starving = [a for a in pending
                if state.skip_counters.get(a, 0) >= state.goal_skip_wait]
    if starving:
        chosen = max(starving, key=lambda a: (state.skip_counters.get(a, 0), -a))
    else:
        chosen = min(pending)
    for a in pending:
        if a != chosen:
            state.skip_counters[a] = state.skip_counters.get(a, 0) + 1
    state.skip_counters[chosen] = 0
    return chosen


def update_rewards(
    chosen: list[FrontierPoint],
    matrix: RewardMatrix,
    cell_key,
) -> tuple[RewardMatrix, bool]:
    """Spread rewards away from already-chosen goals.

    K = (max finite reward) / len(chosen); every row loses K/d^2 per chosen
    point at distance d, and rows that coincide with a chosen point (same
    cell, or d == 0) are suppressed outright. Returns (matrix, applied);
    when no finite reward exists the matrix comes back unchanged with
    applied=False.
    """
    if not chosen:
        raise ValueError("update_rewards requires at least one chosen point")
    finite = [r.reward for r in matrix.rows if math.isfinite(r.reward)]
    if not finite:
        return matrix, False
    k_scale = max(finite) / len(chosen)

    rows = [RewardRow(r.point, r.reward) for r in matrix.rows]
    for c in chosen:
        c_cell = cell_key(c)
        for row in rows:
            if cell_key(row.point) == c_cell:
                row.reward = SUPPRESSED
            if not math.isfinite(row.reward):
                continue
            d2 = math.hypot(c.x - row.point.x, c.y - row.point.y)
            if d2 == 0.0:
                row.reward = SUPPRESSED
            else:
                row.reward -= k_scale / (d2 * d2)
    return RewardMatrix(rows, matrix.owner), True


def select_goal(
    matrix: RewardMatrix,
    state: AllocationState,
    cell_key,
) -> FrontierPoint:
    """Pick the highest-reward row, spreading first when history exists.

    The winner is recorded in chosen_coords. Rows cell-equal to an existing
    goal are skipped. Ties break to the lowest row index.
    """
    if not matrix.rows:
        raise NoAssignableGoal("empty reward matrix")
    if state.chosen_coords:
        matrix, _ = update_rewards(state.chosen_coords, matrix, cell_key)

    chosen_cells = {cell_key(c) for c in state.chosen_coords}
    suppressed = set()
    while True:
        best_i, best_r = -1, SUPPRESSED
        for i, row in enumerate(matrix.rows):
            if i in suppressed:
                continue
            if math.isfinite(row.reward) and row.reward > best_r:
                best_i, best_r = i, row.reward
        if best_i < 0:
            raise NoAssignableGoal("no assignable goal")
        winner = matrix.rows[best_i].point
        if cell_key(winner) in chosen_cells:
            suppressed.add(best_i)
            continue
        state.chosen_coords.append(winner)
        return winner


def evict_known_goals(state: AllocationState, merged, rad: float) -> int:
    """Drop chosen goals whose surrounding disc holds no Unknown cells any
    more; returns how many were evicted. Keeps old goals from permanently
    poisoning rewards on small maps."""
    kept = []
    evicted = 0
    for p in state.chosen_coords:
        unk, total = disc_unknown_stats(p, merged, rad)
        if total > 0 and unk == 0:
            evicted += 1
        else:
            kept.append(p)
    state.chosen_coords = kept
    return evicted


# In-process request/response messages between agents and the server.
# Wire encoding (for an optional transport): little-endian, u8 message tag,
# u32 length prefixes on lists, f64 numeric fields.

_TAG_REQUEST_TURN = 1
_TAG_SUBMIT_POINTS = 2
_TAG_POINTS_REPLY = 3
_TAG_SUBMIT_REWARDS = 4
_TAG_GOAL_REPLY = 5


@dataclass(frozen=True)
class RequestTurn:
    agent: int


@dataclass(frozen=True)
class SubmitPoints:
    agent: int
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PointsReply:
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SubmitRewards:
    agent: int
    rows: tuple[tuple[float, float, float], ...]  # x, y, reward


@dataclass(frozen=True)
class GoalReply:
    x: float
    y: float


def encode_message(msg) -> bytes:
    if isinstance(msg, RequestTurn):
        return struct.pack("<BI", _TAG_REQUEST_TURN, msg.agent)
    if isinstance(msg, SubmitPoints):
        out = struct.pack("<BII", _TAG_SUBMIT_POINTS, msg.agent, len(msg.points))
        for x, y in msg.points:
            out += struct.pack("<dd", x, y)
        return out
    if isinstance(msg, PointsReply):
        out = struct.pack("<BI", _TAG_POINTS_REPLY, len(msg.points))
        for x, y in msg.points:
            out += struct.pack("<dd", x, y)
        return out
    if isinstance(msg, SubmitRewards):
        out = struct.pack("<BII", _TAG_SUBMIT_REWARDS, msg.agent, len(msg.rows))
        for x, y, r in msg.rows:
            out += struct.pack("<ddd", x, y, r)
        return out
    if isinstance(msg, GoalReply):
        return struct.pack("<Bdd", _TAG_GOAL_REPLY, msg.x, msg.y)
    raise TypeError(f"not a message: {msg!r}")


def decode_message(data: bytes):
    (tag,) = struct.unpack_from("<B", data, 0)
    if tag == _TAG_REQUEST_TURN:
        (agent,) = struct.unpack_from("<I", data, 1)
        return RequestTurn(agent)
    if tag == _TAG_SUBMIT_POINTS:
        agent, n = struct.unpack_from("<II", data, 1)
        pts = struct.unpack_from(f"<{2 * n}d", data, 9)
        return SubmitPoints(agent, tuple(zip(pts[0::2], pts[1::2])))
    if tag == _TAG_POINTS_REPLY:
        (n,) = struct.unpack_from("<I", data, 1)
        pts = struct.unpack_from(f"<{2 * n}d", data, 5)
        return PointsReply(tuple(zip(pts[0::2], pts[1::2])))
    if tag == _TAG_SUBMIT_REWARDS:
        agent, n = struct.unpack_from("<II", data, 1)
        vals = struct.unpack_from(f"<{3 * n}d", data, 9)
        return SubmitRewards(agent, tuple(zip(vals[0::3], vals[1::3], vals[2::3])))
    if tag == _TAG_GOAL_REPLY:
        x, y = struct.unpack_from("<dd", data, 1)
        return GoalReply(x, y)
    raise ValueError(f"unknown message tag {tag}")

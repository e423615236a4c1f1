"""Semantically weighted local direction selection for the ground robot.

Candidate headings theta_i, uniform over the full circle, are scored with

    A       = (beta / |T - M|) * arccos(d_theta . d_goal)      goal alignment
    A_zero  = arccos(d_theta . d_zero)                         zero-point pull
    O       = sum over obstacles near the lookahead ray of 1 / (d_perp + eps)
    W       = inf when the lookahead endpoint leaves the window, else 0
    J       = q_align * A + q_zero * A_zero + q_obstacle * O + q_window * W

where d_goal and d_zero are the unit vectors from the main point M toward the
target T and the image zero point Z. An obstacle contributes only when its
perpendicular foot falls on the finite segment from M of the configured
lookahead length and its surface distance to the ray is below d_safe.

All arithmetic is scalar and deterministic; ties in the argmin break toward
the candidate better aligned with the goal, then toward the lower index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class BlockedError(RuntimeError):
    """Every candidate direction is excluded by the window barrier."""


@dataclass(frozen=True)
class LocalCostWeights:
    q_align: float = 1.0
    q_zero: float = 0.5
    q_obstacle: float = 2.0
    q_window: float = 1.0
    beta: float = 5.0
    d_safe: float = 1.5       # cells
    epsilon: float = 1e-6     # cells
    lookahead: float = 5.0    # cells
    window_half_extent: float = 10.0  # cells
    candidate_count: int = 36

    def __post_init__(self):
        if min(self.q_align, self.q_zero, self.q_obstacle, self.q_window, self.beta) < 0:
            raise ValueError("weights must be non-negative")
        if self.epsilon <= 0 or self.d_safe <= 0 or self.lookahead <= 0:
            raise ValueError("epsilon, d_safe, and lookahead must be positive")
        if self.candidate_count < 4:
            raise ValueError("candidate_count must be at least 4")


@dataclass(frozen=True)
class LocalObservation:
    """Image-frame geometry for one local planning step (units: grid cells).

    ``main`` is the reference point being steered (the robot body, or the
    carried object while transporting). ``parts`` holds the head/body/tail
    points; heading derives from tail -> head.
    """

    main: tuple[float, float]
    target: Optional[tuple[float, float]]
    obstacles: tuple  # ((x, y), radius) pairs
    head: tuple[float, float]
    tail: tuple[float, float]
    body: tuple[float, float]
    zero: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.zero != (0.0, 0.0):
            raise ValueError("zero point is (0, 0) by definition")
        if self.head == self.tail:
            raise ValueError("head and tail coincide; heading undefined")

    @property
    def heading(self) -> float:
        return math.atan2(self.head[1] - self.tail[1], self.head[0] - self.tail[0])


@dataclass(frozen=True)
class LocalCost:
    align: float
    zero: float
    obstacle: float
    window: float
    total: float


def _arc(dot: float) -> float:
    return math.acos(min(1.0, max(-1.0, dot)))


def cost_local(theta: float, obs: LocalObservation, w: LocalCostWeights) -> LocalCost:
    dx, dy = math.cos(theta), math.sin(theta)
    mx, my = obs.main

    align = 0.0
    if obs.target is not None:
        tx, ty = obs.target
        dist = math.hypot(tx - mx, ty - my)
        if dist > 0.0:
            align = (w.beta / dist) * _arc((dx * (tx - mx) + dy * (ty - my)) / dist)

    zero = 0.0
    zdist = math.hypot(-mx, -my)
    if zdist > 0.0:
        zero = _arc((dx * -mx + dy * -my) / zdist)

    obstacle = 0.0
    for (ox, oy), radius in obs.obstacles:
        t = (ox - mx) * dx + (oy - my) * dy
        if t < 0.0 or t > w.lookahead:
            continue
        perp = math.hypot(ox - mx - t * dx, oy - my - t * dy)
        eff = max(0.0, perp - radius)
        if eff < w.d_safe:
            obstacle += 1.0 / (eff + w.epsilon)

    ex, ey = mx + w.lookahead * dx, my + w.lookahead * dy
    window = math.inf if max(abs(ex), abs(ey)) > w.window_half_extent else 0.0

    if math.isinf(window):
        total = math.inf
    else:
        total = (w.q_align * align + w.q_zero * zero
                 + w.q_obstacle * obstacle + w.q_window * window)
    return LocalCost(align, zero, obstacle, window, total)


@dataclass(frozen=True)
class Candidate:
    index: int
    theta: float
    cost: LocalCost


@dataclass(frozen=True)
class DirectionChoice:
    theta: float
    index: int
    table: tuple[Candidate, ...]


def _goal_deviation(theta: float, obs: LocalObservation) -> float:
    goal = obs.target if obs.target is not None else obs.zero
    gx, gy = goal[0] - obs.main[0], goal[1] - obs.main[1]
    dist = math.hypot(gx, gy)
    if dist == 0.0:
        return 0.0
    return _arc((math.cos(theta) * gx + math.sin(theta) * gy) / dist)


def select_direction(obs: LocalObservation, w: LocalCostWeights) -> DirectionChoice:
    """argmin of cost_local over candidate_count uniform directions."""
    table = []
    for i in range(w.candidate_count):
        theta = 2.0 * math.pi * i / w.candidate_count
        table.append(Candidate(i, theta, cost_local(theta, obs, w)))
    finite = [c for c in table if math.isfinite(c.cost.total)]
    if not finite:
        raise BlockedError("all candidate directions exit the window")
    best = min(finite, key=lambda c: (c.cost.total, _goal_deviation(c.theta, obs), c.index))
    return DirectionChoice(best.theta, best.index, tuple(table))


class MotionKind(Enum):
    STOP = "stop"
    ROTATE = "rotate"
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class MotionCommand:
    kind: MotionKind
    target_heading: float = 0.0  # rotate only
    distance: float = 0.0        # forward/backward, cells

    @classmethod
    def stop(cls):
        return cls(MotionKind.STOP)

    @classmethod
    def rotate(cls, target_heading: float):
        return cls(MotionKind.ROTATE, target_heading=target_heading)

    @classmethod
    def forward(cls, distance: float):
        return cls(MotionKind.FORWARD, distance=distance)

    @classmethod
    def backward(cls, distance: float):
        return cls(MotionKind.BACKWARD, distance=distance)


@dataclass(frozen=True)
class StepThresholds:
    dist_stop: float = 0.5   # cells
    angle_tol: float = 0.1   # rad
    step: float = 0.25       # cells


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def step_decision(obs: LocalObservation, theta_star: float, thresholds: StepThresholds,
                  goal_orientation: Optional[float] = None) -> MotionCommand:
    """Stop / rotate / forward / backward from the selected direction.

    Stop requires the goal inside dist_stop and, when a goal orientation is
    given, the heading aligned with it. Rotation triggers when the heading
    axis (either facing) misses theta_star beyond angle_tol; the rotation
    sign is left to the simulator's clearance rule. Otherwise the robot
    steps forward or backward by the sign of the goal's component along the
    current heading, so a goal directly behind is reached by backing up
    rather than turning around.
    """
    goal = obs.target if obs.target is not None else obs.zero
    heading = obs.heading
    gx, gy = goal[0] - obs.main[0], goal[1] - obs.main[1]
    if math.hypot(gx, gy) < thresholds.dist_stop and (
        goal_orientation is None
        or abs(wrap_angle(heading - goal_orientation)) < thresholds.angle_tol
    ):
        return MotionCommand.stop()
    axis_err = min(abs(wrap_angle(heading - theta_star)),
                   abs(wrap_angle(heading + math.pi - theta_star)))
    if axis_err > thresholds.angle_tol:
        return MotionCommand.rotate(theta_star)
    along = gx * math.cos(heading) + gy * math.sin(heading)
    if along >= 0.0:
        return MotionCommand.forward(thresholds.step)
    return MotionCommand.backward(thresholds.step)

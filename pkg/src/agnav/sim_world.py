"""Ground-truth world state and discrete-step kinematics for both robots.

Motion is kinematic: the drone advances along world waypoints at a fixed
speed (holding position whenever the ground robot falls outside the follow
radius), and the ground robot executes rotate/forward/backward/stop commands
with an in-place rotation whose sign is picked by sweeping a 90 degree arc
each way and keeping the clearer one. An attached object is slaved to the
head offset point every step. Collision events are debounced: one event per
contiguous overlap run per (body, object) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .local_planner import MotionCommand, MotionKind, wrap_angle

WAYPOINT_CAPTURE = 0.05  # meters


@dataclass
class SimObject:
    id: str
    name: str
    x: float
    y: float
    yaw: float = 0.0
    radius: float = 0.1
    movable: bool = True


@dataclass
class DroneState:
    x: float
    y: float
    altitude: float
    waypoint_index: int = 0


@dataclass
class GroundRobot:
    x: float
    y: float
    heading: float
    radius: float = 0.25


@dataclass(frozen=True)
class SimParams:
    drone_speed: float = 0.1       # m per tick
    ground_step: float = 0.05      # m per forward/backward tick
    rotate_rate: float = 0.2       # rad per tick
    follow_radius: float = 1.0     # m, drone waits beyond this
    attach_range: float = 0.15     # m, head to object center
    attach_angle_tol: float = 0.15 # rad, bearing error
    carry_radius: float = 0.2     # m, observed object-to-head tolerance
    head_offset: float = 0.4      # m, head/tail distance from body center
    rotate_clear_cap: float = 0.1  # m, clearance beyond which a sweep is "safe"

    def __post_init__(self):
        for name in ("drone_speed", "ground_step", "rotate_rate", "follow_radius",
                     "attach_range", "attach_angle_tol", "carry_radius", "head_offset",
                     "rotate_clear_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class WorldState:
    objects: list
    drone: DroneState
    ground_robot: GroundRobot
    params: SimParams = field(default_factory=SimParams)
    attachment: Optional[str] = None
    step: int = 0

    def object_by_id(self, oid: str) -> Optional[SimObject]:
        for o in self.objects:
            if o.id == oid:
                return o
        return None

    def head_point(self) -> tuple[float, float]:
        r = self.ground_robot
        return (r.x + self.params.head_offset * math.cos(r.heading),
                r.y + self.params.head_offset * math.sin(r.heading))

    def copy(self) -> "WorldState":
        return WorldState(
            objects=[replace(o) for o in self.objects],
            drone=replace(self.drone),
            ground_robot=replace(self.ground_robot),
            params=self.params,
            attachment=self.attachment,
            step=self.step,
        )


class AttachError(RuntimeError):
    pass


def _slave_attached(state: WorldState) -> None:
    if state.attachment is None:
        return
    obj = state.object_by_id(state.attachment)
    hx, hy = state.head_point()
    obj.x, obj.y = hx, hy
    obj.yaw = state.ground_robot.heading


def step_drone(state: WorldState, path_world, params: SimParams, wait: bool = True) -> None:
    """Advance the drone one tick along the waypoint list.

    With ``wait`` set (the leader-follower default) the drone holds position
    rather than stretch the separation to a ground robot already farther than
    follow_radius behind; a move that closes the gap (the robot got ahead)
    always proceeds, otherwise the pair can deadlock with each waiting on the
    other. Map-construction flights pass wait=False. Waypoints are captured
    within WAYPOINT_CAPTURE meters.
    """
    if not len(path_world):
        raise ValueError("waypoint path must be non-empty")
    d, g = state.drone, state.ground_robot
    while d.waypoint_index < len(path_world):
        wx, wy = path_world[d.waypoint_index][0], path_world[d.waypoint_index][1]
        if math.hypot(wx - d.x, wy - d.y) <= WAYPOINT_CAPTURE:
            d.waypoint_index += 1
            continue
        break
    # past the last capture ring the drone still homes exactly onto the final
    # waypoint, so its ground projection (the zero anchor) lands on the goal
    idx = min(d.waypoint_index, len(path_world) - 1)
    wx, wy = path_world[idx][0], path_world[idx][1]
    dist = math.hypot(wx - d.x, wy - d.y)
    if dist == 0.0:
        return
    move = min(params.drone_speed, dist)
    nx = d.x + (wx - d.x) / dist * move
    ny = d.y + (wy - d.y) / dist * move
    if wait:
        gap_now = math.hypot(g.x - d.x, g.y - d.y)
        gap_next = math.hypot(g.x - nx, g.y - ny)
        if gap_now > params.follow_radius and gap_next > gap_now:
            return
    d.x, d.y = nx, ny
    if idx < d.waypoint_index:
        return
    if math.hypot(wx - d.x, wy - d.y) <= WAYPOINT_CAPTURE:
        d.waypoint_index += 1


def drone_done(state: WorldState, path_world) -> bool:
    if state.drone.waypoint_index < len(path_world):
        return False
    fx, fy = path_world[-1][0], path_world[-1][1]
    return math.hypot(fx - state.drone.x, fy - state.drone.y) <= 1e-9


def rotation_direction(state: WorldState, obstacles_world, params: SimParams,
                       target_heading: Optional[float] = None) -> int:
    """+1 (counterclockwise) or -1 (clockwise) for an in-place rotation.

    Each sign sweeps the head point (inflated by the carried object's radius
    when attached) along its full angular path to the target heading (a 90
    degree probe arc when no target is given), sampled every 10 degrees with
    both endpoints included. The sign with the larger minimum clearance to
    ``obstacles_world`` ((x, y), radius pairs in meters) wins; a genuinely
    constrained tie goes counterclockwise. Clearances saturate at
    rotate_clear_cap, so when both paths are safely clear the rotation takes
    the shorter way. Comparing the whole path (rather than a fixed leading
    window) keeps the decision stable from tick to tick: a moving window
    re-discovers an obstacle sector only after turning toward it and then
    reverses, oscillating forever.
    """
    r = state.ground_robot
    probe_r = 0.0
    if state.attachment is not None:
        obj = state.object_by_id(state.attachment)
        if obj is not None:
            probe_r = obj.radius

    def probe(ang: float) -> float:
        px = r.x + params.head_offset * math.cos(ang)
        py = r.y + params.head_offset * math.sin(ang)
        worst = params.rotate_clear_cap
        for (ox, oy), orad in obstacles_world:
            c = math.hypot(ox - px, oy - py) - orad - probe_r
            worst = min(worst, c)
        return worst

    grid = math.pi / 18.0

    def path_clearance(sign: int) -> float:
        if target_heading is None:
            span = math.pi / 2.0
        else:
            span = (sign * (target_heading - r.heading)) % (2.0 * math.pi)
        # endpoints plus the absolute 10-degree grid inside the swept
        # interval; anchoring samples to a global grid keeps both sweep
        # directions and successive ticks numerically comparable
        lo = r.heading if sign > 0 else r.heading - span
        hi = r.heading + span if sign > 0 else r.heading
        worst = min(probe(lo), probe(hi))
        k = math.ceil(lo / grid)
        while k * grid < hi:
            if k * grid > lo:
                worst = min(worst, probe(k * grid))
            k += 1
        return worst

    ccw, cw = path_clearance(1), path_clearance(-1)
    if ccw != cw:
        return 1 if ccw > cw else -1
    if target_heading is not None and ccw >= params.rotate_clear_cap:
        if wrap_angle(target_heading - r.heading) < 0.0:
            return -1
    return 1


def step_ground(state: WorldState, cmd: MotionCommand, obstacles_world, params: SimParams) -> None:
    """Execute one motion command tick; the attached object follows the head."""
    r = state.ground_robot
    if cmd.kind == MotionKind.ROTATE:
        sign = rotation_direction(state, obstacles_world, params, cmd.target_heading)
        # angular distance to the target going in the chosen direction
        delta = wrap_angle(cmd.target_heading - r.heading)
        remaining = delta % (2.0 * math.pi) if sign > 0 else (-delta) % (2.0 * math.pi)
        r.heading = wrap_angle(r.heading + sign * min(params.rotate_rate, remaining))
    elif cmd.kind == MotionKind.FORWARD:
        r.x += params.ground_step * math.cos(r.heading)
        r.y += params.ground_step * math.sin(r.heading)
    elif cmd.kind == MotionKind.BACKWARD:
        r.x -= params.ground_step * math.cos(r.heading)
        r.y -= params.ground_step * math.sin(r.heading)
    _slave_attached(state)


def attach(state: WorldState, object_id: str, params: SimParams) -> bool:
    """Engage the magnetic head. Succeeds only with the object center inside
    attach_range of the head and its bearing within attach_angle_tol of the
    heading; failure leaves the state untouched."""
    if state.attachment is not None:
        raise AttachError("already attached")
    obj = state.object_by_id(object_id)
    if obj is None or not obj.movable:
        return False
    hx, hy = state.head_point()
    if math.hypot(obj.x - hx, obj.y - hy) > params.attach_range:
        return False
    r = state.ground_robot
    bearing = math.atan2(obj.y - r.y, obj.x - r.x)
    if abs(wrap_angle(bearing - r.heading)) > params.attach_angle_tol:
        return False
    state.attachment = object_id
    _slave_attached(state)
    return True


def detach(state: WorldState, params: SimParams) -> str:
    """Release the attachment; the object stays at its slaved position."""
    if state.attachment is None:
        raise AttachError("nothing attached")
    released = state.attachment
    state.attachment = None
    return released


def carry_check(state: WorldState, observed_map, params: SimParams) -> bool:
    """True when the observed carried object still rides near the observed
    head; False requests a rollback (re-run the attach subtask). Losing
    sight of the object or the head is treated as a rollback."""
    if state.attachment is None:
        return False
    head = observed_map.parts.get("head")
    if head is None:
        return False
    carried = None
    for o in observed_map.objects:
        if o.id == state.attachment:
            carried = o
            break
    if carried is None:
        return False
    dist_m = math.hypot(carried.x - head[0], carried.y - head[1]) * observed_map.cell_m
    return dist_m <= params.carry_radius


def detect_collisions(state: WorldState, previous_overlaps: frozenset) -> tuple[list, frozenset]:
    """Debounced circle-circle collision events.

    Bodies are the robot footprint and, when attached, the carried object;
    each is tested against every non-carried object. An event fires on the
    transition into overlap; sustained contact stays one event.
    """
    r = state.ground_robot
    bodies = [("robot", r.x, r.y, r.radius)]
    if state.attachment is not None:
        c = state.object_by_id(state.attachment)
        bodies.append(("carried", c.x, c.y, c.radius))
    current = set()
    for label, bx, by, br in bodies:
        for o in state.objects:
            if o.id == state.attachment:
                continue
            if math.hypot(o.x - bx, o.y - by) < br + o.radius:
                current.add((label, o.id))
    events = sorted(current - previous_overlaps)
    return [{"pair": list(pair), "step": state.step} for pair in events], frozenset(current)

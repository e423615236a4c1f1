"""Mock bird-view perceiver standing in for the learned vision model.

Projects simulator ground truth into the aerial camera frame (orthographic,
image-center-relative grid cells), applies calibrated deterministic noise,
and assigns task-conditioned semantic roles. Noise is counter-based: every
random draw hashes (seed, step, object id, channel) so identical inputs give
byte-identical maps with no shared generator state.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional

from .gridmask import CameraModel, ground_scale
from .semantic_map import (
    Category,
    Direction,
    Footprint,
    LocalSemanticMap,
    SemanticObject,
)

_NORMAL = NormalDist()


@dataclass(frozen=True)
class NoiseModel:
    position_sigma: float = 0.0      # grid cells, per axis
    misclassify_prob: float = 0.0
    orientation_sigma: float = 0.0   # radians
    seed: int = 0

    def __post_init__(self):
        if self.position_sigma < 0 or self.orientation_sigma < 0:
            raise ValueError("sigmas must be non-negative")
        if not 0.0 <= self.misclassify_prob <= 1.0:
            raise ValueError("misclassify_prob must lie in [0, 1]")


class TaskKind:
    MAP_CONSTRUCTION = "map_construction"
    MOVE_TO_COORDINATE = "move_to_coordinate"
    MOVE_TO_OBJECT = "move_to_object"
    CARRY_TO_RELATION = "carry_to_relation"


@dataclass(frozen=True)
class TaskContext:
    """What the perceiver is being asked to label for.

    ``target_name`` is the goal object for move_to_object and the landmark
    reference for carry_to_relation; ``relation`` is set exactly for
    carry_to_relation; ``carried_object`` is the id being transported, if any.
    """

    kind: str
    target_name: Optional[str] = None
    relation: Optional[Direction] = None
    carried_object: Optional[str] = None

    def __post_init__(self):
        if (self.relation is not None) != (self.kind == TaskKind.CARRY_TO_RELATION):
            raise ValueError("relation is present exactly for carry_to_relation tasks")


def _uniform(seed: int, step: int, tag: str, channel: str) -> float:
    """Deterministic uniform in (0, 1) from a hashed counter."""
    digest = hashlib.sha256(f"{seed}|{step}|{tag}|{channel}".encode()).digest()
    v = int.from_bytes(digest[:8], "big")
    return (v + 0.5) / 2.0 ** 64


def _gauss(seed: int, step: int, tag: str, channel: str, sigma: float) -> float:
    if sigma == 0.0:
        return 0.0
    return sigma * _NORMAL.inv_cdf(_uniform(seed, step, tag, channel))


def camera_footprint(camera: CameraModel, cx: float, cy: float) -> Footprint:
    """World rectangle on the ground seen from (cx, cy) at the camera altitude."""
    scale = ground_scale(camera)
    half_w = scale.width_real / 2.0
    half_h = half_w * camera.height / camera.image_width
    return Footprint(cx - half_w, cx + half_w, cy - half_h, cy + half_h)


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, v))


def observe(world, camera: CameraModel, task: TaskContext, noise: NoiseModel) -> LocalSemanticMap:
    """One aerial observation of the world from the drone's current pose.

    Ground-truth objects inside the camera footprint are reported in
    image-center-relative grid cells, with Gaussian position noise, optional
    name misclassification (substituting another name from the scenario's
    alphabet), and orientation noise. Robot head/body/tail parts are emitted
    when the ground robot is in view. Noisy positions clamp to the footprint
    so every reported object projects back inside it.
    """
    if world.drone.altitude <= 0:
        raise ValueError("drone altitude must be positive")
    scale = ground_scale(camera)
    cell = scale.cell_m
    cx, cy = world.drone.x, world.drone.y
    fp = camera_footprint(camera, cx, cy)
    half_w_cells = (fp.xmax - fp.xmin) / 2.0 / cell
    half_h_cells = (fp.ymax - fp.ymin) / 2.0 / cell
    step = world.step
    alphabet = sorted({o.name for o in world.objects})

    visible = [o for o in world.objects if fp.contains(o.x, o.y)]
    raw = []
    for o in visible:
        gx = (o.x - cx) / cell + _gauss(noise.seed, step, o.id, "px", noise.position_sigma)
        gy = (o.y - cy) / cell + _gauss(noise.seed, step, o.id, "py", noise.position_sigma)
        gx = _clamp(gx, -half_w_cells, half_w_cells)
        gy = _clamp(gy, -half_h_cells, half_h_cells)
        name = o.name
        if noise.misclassify_prob > 0.0 and len(alphabet) > 1:
            if _uniform(noise.seed, step, o.id, "mis") < noise.misclassify_prob:
                others = [n for n in alphabet if n != o.name]
                name = others[int(_uniform(noise.seed, step, o.id, "sub") * len(others))]
        yaw = o.yaw + _gauss(noise.seed, step, o.id, "yaw", noise.orientation_sigma)
        raw.append((o, name, gx, gy, yaw))

    objects = _assign_roles(raw, world, task, cell)

    parts = {}
    robot = world.ground_robot
    if fp.contains(robot.x, robot.y):
        hx = robot.x + world.params.head_offset * math.cos(robot.heading)
        hy = robot.y + world.params.head_offset * math.sin(robot.heading)
        tx = robot.x - world.params.head_offset * math.cos(robot.heading)
        ty = robot.y - world.params.head_offset * math.sin(robot.heading)
        for tag, (px, py) in (("head", (hx, hy)), ("body", (robot.x, robot.y)), ("tail", (tx, ty))):
            gx = (px - cx) / cell + _gauss(noise.seed, step, "robot:" + tag, "px", noise.position_sigma)
            gy = (py - cy) / cell + _gauss(noise.seed, step, "robot:" + tag, "py", noise.position_sigma)
            parts[tag] = (_clamp(gx, -half_w_cells, half_w_cells),
                          _clamp(gy, -half_h_cells, half_h_cells))
        if task.kind != TaskKind.MAP_CONSTRUCTION:
            objects.append(SemanticObject(
                id="robot",
                name="robot",
                x=parts["body"][0],
                y=parts["body"][1],
                frame="grid",
                category=Category.MAIN,
                radius=robot.radius / cell,
            ))
            objects.sort(key=lambda s: s.id)

    return LocalSemanticMap(
        observer_x=cx,
        observer_y=cy,
        altitude=world.drone.altitude,
        cell_m=cell,
        footprint=fp,
        objects=tuple(objects),
        step_index=step,
        parts=parts,
    )


def _assign_roles(raw, world, task: TaskContext, cell: float) -> list[SemanticObject]:
    objects = []
    for o, name, gx, gy, yaw in raw:
        category = None
        direction = None
        obstacle_too = False
        if task.kind != TaskKind.MAP_CONSTRUCTION:
            if o.id == task.carried_object:
                category = Category.MAIN
            elif task.kind == TaskKind.MOVE_TO_OBJECT and name == task.target_name:
                category = Category.TARGET
            elif task.kind == TaskKind.CARRY_TO_RELATION and name == task.target_name:
                category = Category.LANDMARK
                direction = task.relation
                obstacle_too = True
            else:
                category = Category.OBSTACLE
        objects.append(SemanticObject(
            id=o.id,
            name=name,
            x=gx,
            y=gy,
            frame="grid",
            category=category,
            direction=direction,
            is_obstacle_too=obstacle_too,
            orientation=yaw,
            radius=o.radius / cell,
        ))
    if task.kind == TaskKind.MOVE_TO_COORDINATE:
        # navigation to a coordinate anchors the target role at the image
        # zero point instead of any physical object
        objects.append(SemanticObject(
            id="zero-point",
            name="zero",
            x=0.0,
            y=0.0,
            frame="grid",
            category=Category.TARGET,
        ))
    objects.sort(key=lambda s: s.id)
    return objects


def classify_roles(objects, task: TaskContext):
    """Task-conditioned role labels for already-projected semantic objects.

    Standalone form of the labeling used inside observe(): map construction
    assigns no roles; the carried object is main; the task's goal object is
    target; a relation reference is a landmark carrying its direction and
    doubling as an obstacle; everything else is an obstacle.
    """
    relabeled = []
    for o in objects:
        if task.kind == TaskKind.MAP_CONSTRUCTION:
            relabeled.append(SemanticObject(
                id=o.id, name=o.name, x=o.x, y=o.y, frame=o.frame,
                orientation=o.orientation, radius=o.radius,
            ))
            continue
        category = Category.OBSTACLE
        direction = None
        obstacle_too = False
        if o.id == "robot" or o.id == task.carried_object:
            category = Category.MAIN
        elif task.kind == TaskKind.MOVE_TO_OBJECT and o.name == task.target_name:
            category = Category.TARGET
        elif task.kind == TaskKind.CARRY_TO_RELATION and o.name == task.target_name:
            category = Category.LANDMARK
            direction = task.relation
            obstacle_too = True
        relabeled.append(SemanticObject(
            id=o.id, name=o.name, x=o.x, y=o.y, frame=o.frame,
            category=category, direction=direction, is_obstacle_too=obstacle_too,
            orientation=o.orientation, radius=o.radius,
        ))
    return relabeled

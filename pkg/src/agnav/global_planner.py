"""Global path optimization for the aerial robot.

The cost J over a sampled B-spline balances path length, discrete curvature,
and a quadratic obstacle-clearance penalty:

    L = sum_{i=1..m}   |S(u_i) - S(u_{i-1})|
    K = sum_{i=2..m-1} |S(u_{i+1}) - 2 S(u_i) + S(u_{i-1})|
    O = sum_j sum_{i=1..m} max(0, d_safe - (|S(u_i) - o_j| - r_j))^2
    J = q_length * L + q_curvature * K + q_obstacle * O

Obstacles are center/radius pairs; radius 0 recovers the pure point form.
Minimization is deterministic gradient descent on the interior control
points (endpoints stay pinned to main and target) with central-difference
gradients and a backtracking Armijo line search along the normalized
descent direction, which makes the argmin invariant under a common positive
scaling of the three weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spline import SplinePath, basis_matrix, clamped_uniform_knots, make_clamped_uniform


class PlanningError(RuntimeError):
    pass


@dataclass(frozen=True)
class GlobalCostWeights:
    q_length: float = 1.0
    q_curvature: float = 5.0
    q_obstacle: float = 50.0
    d_safe: float = 1.5  # grid cells
    sample_count: int = 64

    def __post_init__(self):
        if min(self.q_length, self.q_curvature, self.q_obstacle) < 0:
            raise ValueError("weights must be non-negative")
        if self.d_safe <= 0:
            raise ValueError("d_safe must be positive")
        if self.sample_count < 2:
            raise ValueError("sample_count must be at least 2")


@dataclass(frozen=True)
class ObstacleSet:
    """Disc obstacles: (N, 2) centers and (N,) radii in grid cells."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        r = np.asarray(self.radii, dtype=float).reshape(-1)
        if len(c) != len(r):
            raise ValueError("centers and radii must have equal length")
        if np.any(r < 0):
            raise ValueError("radii must be non-negative")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @classmethod
    def from_pairs(cls, pairs) -> "ObstacleSet":
        if not pairs:
            return cls(np.zeros((0, 2)), np.zeros(0))
        return cls(
            np.array([[p[0][0], p[0][1]] for p in pairs], dtype=float),
            np.array([p[1] for p in pairs], dtype=float),
        )

    def __len__(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class CostBreakdown:
    length: float
    curvature: float
    obstacle: float
    total: float


@dataclass
class GlobalPlanResult:
    path: SplinePath
    cost_history: list[float]
    breakdown: CostBreakdown
    converged: bool
    already_at_goal: bool = False


def straight_line_init(main, target, n_controls: int) -> tuple[np.ndarray, bool]:
    """Control points equally spaced from main to target, both inclusive.

    Returns (points, already_at_goal); a coincident main/target collapses to
    a single-point polygon with the flag set.
    """
    a = np.asarray(main, dtype=float)
    b = np.asarray(target, dtype=float)
    if np.array_equal(a, b):
        return a.reshape(1, 2), True
    if n_controls < 2:
        raise ValueError("need at least 2 control points")
    t = np.linspace(0.0, 1.0, n_controls)[:, None]
    return (1.0 - t) * a + t * b, False


def _terms_from_samples(pts: np.ndarray, weights: GlobalCostWeights, obstacles: ObstacleSet) -> CostBreakdown:
    seg = np.diff(pts, axis=0)
    length = float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))
    m = len(pts) - 1
    curvature = 0.0
    if m >= 3:
        # second differences at i = 2 .. m-1
        sec = pts[3:] - 2.0 * pts[2:-1] + pts[1:-2]
        curvature = float(np.sum(np.hypot(sec[:, 0], sec[:, 1])))
    obstacle = 0.0
    if len(obstacles) and weights.q_obstacle > 0.0:
        inner = pts[1:]  # samples i = 1 .. m
        d = np.hypot(
            inner[:, None, 0] - obstacles.centers[None, :, 0],
            inner[:, None, 1] - obstacles.centers[None, :, 1],
        ) - obstacles.radii[None, :]
        pen = np.maximum(0.0, weights.d_safe - d)
        obstacle = float(np.sum(pen * pen))
    total = weights.q_length * length + weights.q_curvature * curvature + weights.q_obstacle * obstacle
    return CostBreakdown(length, curvature, obstacle, total)


def cost_global(path: SplinePath, weights: GlobalCostWeights, obstacles: ObstacleSet) -> CostBreakdown:
    """J over the path sampled at u_i = i/m with m = weights.sample_count."""
    us = np.arange(weights.sample_count + 1) / weights.sample_count
    B = basis_matrix(path.knots, path.degree, us)
    return _terms_from_samples(B @ path.control_points, weights, obstacles)


def _min_clearance(pts: np.ndarray, obstacles: ObstacleSet) -> float:
    if not len(obstacles):
        return math.inf
    d = np.hypot(
        pts[:, None, 0] - obstacles.centers[None, :, 0],
        pts[:, None, 1] - obstacles.centers[None, :, 1],
    ) - obstacles.radii[None, :]
    return float(d.min())


@dataclass(frozen=True)
class OptimizeOptions:
    degree: int = 3
    max_iters: int = 500
    step: float = 1.0  # initial line-search step, grid cells
    tolerance: float = 1e-8  # relative cost change
    fd_step: float = 1e-4  # central-difference increment, grid cells
    armijo: float = 1e-4


def _batch_totals(batch: np.ndarray, B: np.ndarray, weights: GlobalCostWeights,
                  obstacles: ObstacleSet) -> np.ndarray:
    """Total cost for a (batch, n_controls, 2) stack of control polygons."""
    pts = np.einsum("mn,bnd->bmd", B, batch)
    seg = np.diff(pts, axis=1)
    length = np.sqrt(np.sum(seg * seg, axis=-1)).sum(axis=-1)
    m = pts.shape[1] - 1
    curvature = np.zeros(len(batch))
    if m >= 3:
        sec = pts[:, 3:] - 2.0 * pts[:, 2:-1] + pts[:, 1:-2]
        curvature = np.sqrt(np.sum(sec * sec, axis=-1)).sum(axis=-1)
    obstacle = np.zeros(len(batch))
    if len(obstacles) and weights.q_obstacle > 0.0:
        inner = pts[:, 1:]
        diff = inner[:, :, None, :] - obstacles.centers[None, None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1)) - obstacles.radii[None, None, :]
        pen = np.maximum(0.0, weights.d_safe - d)
        obstacle = np.sum(pen * pen, axis=(-1, -2))
    return (weights.q_length * length + weights.q_curvature * curvature
            + weights.q_obstacle * obstacle)


def _descend(controls: np.ndarray, knots: np.ndarray, B: np.ndarray,
             weights: GlobalCostWeights, obstacles: ObstacleSet,
             opts: OptimizeOptions) -> tuple[np.ndarray, list[float], bool]:
    """Monotone descent over the interior control points. Returns the final
    polygon, the accepted-cost history (seed cost first), and convergence."""

    def cost_of(c: np.ndarray) -> float:
        return _terms_from_samples(B @ c, weights, obstacles).total

    c = controls.copy()
    n_int = len(c) - 2
    f = cost_of(c)
    if not math.isfinite(f):
        raise PlanningError("non-finite cost at the initial control polygon")
    history = [f]
    if n_int <= 0 or f == 0.0:
        return c, history, True
    alpha = opts.step
    converged = False
    h = opts.fd_step
    for _ in range(opts.max_iters):
        # central differences over all interior coordinates in one batch
        batch = np.repeat(c[None, :, :], 4 * n_int, axis=0)
        for i in range(n_int):
            batch[4 * i + 0, i + 1, 0] += h
            batch[4 * i + 1, i + 1, 0] -= h
            batch[4 * i + 2, i + 1, 1] += h
            batch[4 * i + 3, i + 1, 1] -= h
        totals = _batch_totals(batch, B, weights, obstacles)
        grad = np.empty((n_int, 2))
        grad[:, 0] = (totals[0::4] - totals[1::4]) / (2.0 * h)
        grad[:, 1] = (totals[2::4] - totals[3::4]) / (2.0 * h)
        gnorm = float(np.sqrt(np.sum(grad * grad)))
        if gnorm == 0.0:
            converged = True
            break
        direction = -grad / gnorm
        slope = float(np.sum(grad * direction))
        # backtracking ladder a, a/2, ... evaluated in batched chunks; taking
        # the first Armijo-passing rung matches the sequential halving loop
        n_rungs = max(1, int(math.ceil(math.log2(alpha / 1e-12))) + 1)
        found = None
        for lo in range(0, n_rungs, 6):
            rungs = alpha * np.power(0.5, np.arange(lo, min(lo + 6, n_rungs)))
            trials = np.repeat(c[None, :, :], len(rungs), axis=0)
            trials[:, 1:-1] += rungs[:, None, None] * direction[None, :, :]
            fts = _batch_totals(trials, B, weights, obstacles)
            if not np.all(np.isfinite(fts)):
                raise PlanningError("non-finite cost during line search")
            passing = np.nonzero(fts <= f + opts.armijo * rungs * slope)[0]
            if len(passing):
                r = int(passing[0])
                found = (float(rungs[r]), float(fts[r]), trials[r])
                break
        if found is None:
            converged = True
            break
        a, ft, trial = found
        rel = abs(f - ft) <= opts.tolerance * abs(f)
        c = trial
        f = ft
        history.append(f)
        alpha = min(a * 2.0, opts.step)
        if rel:
            converged = True
            break
    return c, history, converged


def optimize(init_controls, weights: GlobalCostWeights, obstacles: ObstacleSet,
             options: OptimizeOptions | None = None) -> GlobalPlanResult:
    """Minimize J over the interior control points; endpoints never move.

    Deterministic: when the straight seed penetrates the d_safe band the
    descent can sit on a symmetry saddle, so two laterally bowed seeds are
    also descended and the lowest final cost wins (ties prefer the straight
    seed). The returned history is the winning branch's accepted costs,
    non-increasing by construction, and the final cost never exceeds the
    initial straight-seed cost.
    """
    opts = options or OptimizeOptions()
    controls = np.atleast_2d(np.asarray(init_controls, dtype=float))
    if len(controls) == 1:
        path = make_clamped_uniform(np.repeat(controls, opts.degree + 1, axis=0), opts.degree)
        bd = cost_global(path, weights, obstacles)
        return GlobalPlanResult(path, [bd.total], bd, True, already_at_goal=True)
    if len(controls) < opts.degree + 1:
        raise ValueError(f"need at least degree+1 = {opts.degree + 1} control points")

    knots = clamped_uniform_knots(len(controls), opts.degree)
    us = np.arange(weights.sample_count + 1) / weights.sample_count
    B = basis_matrix(knots, opts.degree, us)

    seeds = [controls]
    if _min_clearance(B @ controls, obstacles) < weights.d_safe:
        chord = controls[-1] - controls[0]
        norm = float(np.hypot(chord[0], chord[1]))
        if norm > 0.0:
            perp = np.array([-chord[1], chord[0]]) / norm
            amp = weights.d_safe + (float(obstacles.radii.max()) if len(obstacles) else 0.0)
            bump = np.sin(np.linspace(0.0, math.pi, len(controls)))[:, None] * perp[None, :]
            seeds.append(controls + amp * bump)
            seeds.append(controls - amp * bump)

    best = None
    for seed in seeds:
        c, history, converged = _descend(seed, knots, B, weights, obstacles, opts)
        final = history[-1]
        if best is None or final < best[1]:
            best = (c, final, history, converged)
    c, _, history, converged = best
    path = SplinePath(c, opts.degree, knots)
    bd = _terms_from_samples(B @ c, weights, obstacles)
    return GlobalPlanResult(path, history, bd, converged)

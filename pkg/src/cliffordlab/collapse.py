"""Finite-size-scaling data collapse.

Rescale (q, L, y) points to x = (q - q_c) * L^(1/nu), fit a 12th-order
polynomial to the rescaled cloud, and minimize the mean squared residue of
the best fit over (q_c, nu) with a Nelder-Mead simplex. Uncertainties come
from the region where the residue stays below 1.1x its minimum.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DataPoint:
    q: float
    L: int
    y: float
    sigma_y: float = 0.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if self.sigma_y < 0:
            raise ValueError("sigma_y must be >= 0")


@dataclass(frozen=True)
class CollapseParams:
    q_c: float
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")


@dataclass
class CollapseOutput:
    q_c: float
    nu: float
    epsilon_min: float
    q_c_interval: tuple[float, float]
    nu_interval: tuple[float, float]
    n_points: int


def rescale(points: list[DataPoint], params: CollapseParams) -> np.ndarray:
    """(x, y) pairs with x = (q - q_c) * L^(1/nu)."""
    if not params.nu > 0:
        raise ValueError("nu must be positive")
    out = np.empty((len(points), 2))
    for i, pt in enumerate(points):
        out[i, 0] = (pt.q - params.q_c) * pt.L ** (1.0 / params.nu)
        out[i, 1] = pt.y
    return out


def polyfit_residue(xy: np.ndarray, degree: int = 12,
                    weights: np.ndarray | None = None) -> float:
    """Mean squared deviation of the best least-squares polynomial fit.

    weights, when given, are 1/sigma per point: the fit minimizes the weighted
    square sum and the residue is the weighted mean squared deviation.
    """
    xy = np.asarray(xy, float)
    n = xy.shape[0]
    if n < degree + 1:
        raise ValueError(f"need at least {degree + 1} points for degree {degree}")
    x, y = xy[:, 0], xy[:, 1]
    if np.ptp(x) == 0:
        return float(np.mean((y - y.mean()) ** 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", np.exceptions.RankWarning)
        poly = np.polynomial.Polynomial.fit(x, y, degree, w=weights)
    resid = y - poly(x)
    if weights is None:
        return float(np.mean(resid ** 2))
    w2 = weights.astype(float) ** 2
    return float(np.sum(w2 * resid ** 2) / np.sum(w2))


def nelder_mead(objective, initial: CollapseParams,
                steps: tuple[float, float] = (0.01, 0.1),
                diameter_tol: float = 1e-6, max_iter: int = 500):
    """Simplex minimization with reflection 1.0, expansion 2.0, contraction
    0.5, shrink 0.5; stops when the simplex diameter drops below the tolerance
    or after max_iter iterations. Returns (CollapseParams, value)."""
    x0 = np.array([initial.q_c, initial.nu], float)
    simplex = [x0, x0 + np.array([steps[0], 0.0]), x0 + np.array([0.0, steps[1]])]
    vals = []
    for v in simplex:
        f = float(objective(v[0], v[1]))
        if not np.isfinite(f):
            raise ValueError("objective is not finite on the initial simplex")
        vals.append(f)
    for _ in range(max_iter):
        order = np.argsort(vals, kind="stable")
        simplex = [simplex[i] for i in order]
        vals = [vals[i] for i in order]
        diam = max(np.linalg.norm(simplex[i] - simplex[j])
                   for i in range(3) for j in range(i + 1, 3))
        if diam < diameter_tol:
            break
        centroid = (simplex[0] + simplex[1]) / 2.0
        worst = simplex[2]
        xr = centroid + 1.0 * (centroid - worst)
        fr = float(objective(xr[0], xr[1]))
        if not np.isfinite(fr):
            raise ValueError("objective became non-finite during iteration")
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = float(objective(xe[0], xe[1]))
            if fe < fr:
                simplex[2], vals[2] = xe, fe
            else:
                simplex[2], vals[2] = xr, fr
        elif fr < vals[1]:
            simplex[2], vals[2] = xr, fr
        else:
            if fr < vals[2]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid - 0.5 * (centroid - worst)
            fc = float(objective(xc[0], xc[1]))
            if fc < min(fr, vals[2]):
                simplex[2], vals[2] = xc, fc
            else:
                for i in (1, 2):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    vals[i] = float(objective(simplex[i][0], simplex[i][1]))
    order = np.argsort(vals, kind="stable")
    best = simplex[order[0]]
    return CollapseParams(q_c=float(best[0]), nu=float(best[1])), float(vals[order[0]])


def uncertainty_region(objective, optimum: CollapseParams, epsilon_min: float,
                       q_step: float = 1e-3, nu_step: float = 1e-2,
                       threshold_factor: float = 1.1, max_steps: int = 400):
    """Bounding box of the connected sublevel region around the optimum where
    the objective stays <= threshold_factor * epsilon_min, on a grid with the
    given steps. Returns (q_interval, nu_interval)."""
    if epsilon_min < 0:
        raise ValueError("epsilon_min must be >= 0")
    thr = threshold_factor * epsilon_min
    seen = {}

    def inside(i: int, j: int) -> bool:
        if abs(i) > max_steps or abs(j) > max_steps:
            return False
        if (i, j) not in seen:
            qv = optimum.q_c + i * q_step
            nv = optimum.nu + j * nu_step
            if nv <= 0:
                seen[(i, j)] = False
            else:
                seen[(i, j)] = float(objective(qv, nv)) <= thr
        return seen[(i, j)]

    lo_i = hi_i = lo_j = hi_j = 0
    queue = deque([(0, 0)])
    visited = {(0, 0)}
    while queue:
        i, j = queue.popleft()
        if not inside(i, j):
            continue
        lo_i, hi_i = min(lo_i, i), max(hi_i, i)
        lo_j, hi_j = min(lo_j, j), max(hi_j, j)
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (i + di, j + dj)
            if nb not in visited:
                visited.add(nb)
                queue.append(nb)
    q_int = (optimum.q_c + lo_i * q_step, optimum.q_c + hi_i * q_step)
    nu_int = (optimum.nu + lo_j * nu_step, optimum.nu + hi_j * nu_step)
    return q_int, nu_int


def collapse(points: list[DataPoint], initial: CollapseParams,
             degree: int = 12, weighted: bool = False,
             x_window: float | None = None,
             q_step: float = 1e-3, nu_step: float = 1e-2,
             threshold_factor: float = 1.1,
             region_max_steps: int = 400) -> CollapseOutput:
    """Full pipeline: residue objective -> Nelder-Mead -> threshold region."""
    if len({pt.L for pt in points}) < 3:
        warnings.warn("fewer than 3 distinct system sizes: collapse is "
                      "poorly constrained", stacklevel=2)
    if weighted and any(pt.sigma_y <= 0 for pt in points):
        raise ValueError("weighted fit needs positive sigma_y on every point")

    def objective(q_c: float, nu: float) -> float:
        if nu <= 1e-3:
            return 1e50 * (1.0 + abs(nu))
        xy = rescale(points, CollapseParams(q_c=q_c, nu=max(nu, 1e-3)))
        w = None
        if weighted:
            w = np.array([1.0 / pt.sigma_y for pt in points])
        if x_window is not None:
            keep = np.abs(xy[:, 0]) <= x_window
            xy = xy[keep]
            if w is not None:
                w = w[keep]
        return polyfit_residue(xy, degree=degree, weights=w)

    best, eps_min = nelder_mead(objective, initial)
    q_int, nu_int = uncertainty_region(objective, best, eps_min,
                                       q_step=q_step, nu_step=nu_step,
                                       threshold_factor=threshold_factor,
                                       max_steps=region_max_steps)
    return CollapseOutput(q_c=best.q_c, nu=best.nu, epsilon_min=eps_min,
                          q_c_interval=q_int, nu_interval=nu_int,
                          n_points=len(points))

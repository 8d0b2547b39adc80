"""Unconstrained minimizers used across the package.

`lbfgs` is a limited-memory quasi-Newton loop with Armijo backtracking.  The
objective may return +inf outside its domain; the line search treats that as
a rejected step, which is how scale-invariant quotients with an open domain
(positive loop action, positive support values) are kept feasible without
explicit constraints.

`batched_descent` runs many small gradient descents in lockstep with per-row
adaptive steps.  It is deliberately simple: the callers (directional gauge
maximization, infimal convolution of support functions) have convex or
benign landscapes and need throughput over asymptotic rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class MinimizeResult:
    x: np.ndarray
    f: float
    grad_norm: float
    iterations: int
    converged: bool
    status: str


def _wolfe_search(fg, x, f, g, d, slope, armijo, curvature, max_evals=60):
    """Strong-Wolfe line search by bracketing and bisection.

    Accepts a step t with sufficient decrease (Armijo, parameter `armijo`)
    and |directional derivative| reduced below `curvature` * |slope|, which
    guarantees s.y > 0 for the quasi-Newton update and expands along long
    valleys instead of creeping.  Non-finite trial values (domain guard)
    count as Armijo failures.  Returns (t, f_t, g_t), falling back to the
    best Armijo-feasible point seen when the bracket collapses; t = 0 means
    total failure.
    """
    lo, hi = 0.0, np.inf
    t = 1.0
    best = (0.0, f, g)
    for _ in range(max_evals):
        x_t = x + t * d
        f_t, g_t = fg(x_t)
        if not np.isfinite(f_t) or f_t > f + armijo * t * slope:
            hi = t  # overshot: no sufficient decrease
        else:
            if f_t < best[1]:
                best = (t, f_t, g_t)
            dd = np.dot(g_t, d)
            if dd < curvature * slope:
                lo = t  # still descending steeply: the minimum lies farther out
            elif dd > -curvature * slope:
                hi = t  # slope already turned positive: overshot the minimum
            else:
                return t, f_t, g_t
        t = 2.0 * lo if np.isinf(hi) else 0.5 * (lo + hi)
        if np.isfinite(hi) and hi - lo <= 1e-16 * max(1.0, hi):
            break
    return best


def lbfgs(
    fg: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    grad_tol: float = 1e-10,
    max_iter: int = 500,
    memory: int = 10,
    armijo: float = 1e-4,
    curvature: float = 0.9,
    stall_patience: int = 30,
) -> MinimizeResult:
    """Minimize fg = (value, gradient) from x0.

    Convergence is declared when the sup-norm of the gradient drops below
    grad_tol.  The weak-Wolfe line search keeps the curvature pairs usable;
    pairs with non-positive s.y (possible only on fallback acceptances) are
    skipped.  A run that makes no measurable function progress for
    `stall_patience` consecutive iterations returns early with status
    "stall": grinding at the roundoff floor costs many line-search
    evaluations per step and cannot improve the iterate.
    """
    x = np.asarray(x0, dtype=float).copy()
    f, g = fg(x)
    if not np.isfinite(f):
        raise ValueError("lbfgs started outside the objective domain")

    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    status = "max_iter"
    it = 0
    f_best = f
    stalled = 0

    for it in range(1, max_iter + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= grad_tol:
            return MinimizeResult(x, f, gnorm, it - 1, True, "gradient")

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * np.dot(s, q)
            alphas.append(a)
            q -= a * y
        if y_hist:
            y_last = y_hist[-1]
            gamma = np.dot(s_hist[-1], y_last) / np.dot(y_last, y_last)
            q *= gamma
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * np.dot(y, q)
            q += s * (a - b)
        d = -q

        slope = np.dot(g, d)
        if slope >= 0:  # bad direction, fall back to steepest descent
            d = -g
            slope = -np.dot(g, g)

        step, f_new, g_new = _wolfe_search(fg, x, f, g, d, slope, armijo, curvature)
        if step == 0.0:
            status = "line_search"
            break
        x_new = x + step * d

        s = x_new - x
        y = g_new - g
        sy = np.dot(s, y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)

        x, f, g = x_new, f_new, g_new
        if f < f_best - 1e-14 * (1.0 + abs(f_best)):
            f_best = f
            stalled = 0
        else:
            stalled += 1
            if stalled >= stall_patience:
                status = "stall"
                break

    gnorm = float(np.max(np.abs(g)))
    return MinimizeResult(x, f, gnorm, it, gnorm <= grad_tol, status)


def batched_descent(
    fg: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    x0: np.ndarray,
    max_iter: int = 200,
    grad_tol: float = 1e-10,
    step0: float = 0.5,
    grow: float = 1.3,
    shrink: float = 0.5,
    project: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimize B independent objectives in lockstep.

    fg maps an (B, d) array to per-row values (B,) and gradients (B, d).
    Rows whose trial step fails (Armijo-free: any increase or non-finite
    value counts as failure) keep their old iterate and halve their step;
    successful rows grow theirs.  If `project` is given, trial points are
    projected before evaluation (used for sphere-constrained ascent).
    Returns the best (x, f) seen per row.
    """
    x = np.array(x0, dtype=float)
    f, g = fg(x)
    steps = np.full(x.shape[0], step0)
    best_x = x.copy()
    best_f = f.copy()
    for _ in range(max_iter):
        gn = np.linalg.norm(g, axis=1)
        active = gn > grad_tol
        if not np.any(active):
            break
        trial = x - steps[:, None] * g
        if project is not None:
            trial = project(trial)
        f_t, g_t = fg(trial)
        ok = np.isfinite(f_t) & (f_t < f) & active
        x = np.where(ok[:, None], trial, x)
        f = np.where(ok, f_t, f)
        g = np.where(ok[:, None], g_t, g)
        steps = np.where(ok, steps * grow, steps * shrink)
        steps = np.maximum(steps, 1e-18)
        better = f < best_f
        best_x[better] = x[better]
        best_f[better] = f[better]
    return best_x, best_f

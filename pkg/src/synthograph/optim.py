"""Deterministic full-batch gradient descent with a backtracking line search.

All trainers in the package share this minimizer so that objective traces
are monotone by construction and runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ObjectiveAndGradient = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class OptimResult:
    x: np.ndarray
    objective: float
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def minimize_batch_gd(
    fun_grad: ObjectiveAndGradient,
    x0: np.ndarray,
    *,
    max_iters: int,
    rel_tol: float,
    init_step: float = 1.0,
    armijo: float = 1e-4,
    shrink: float = 0.5,
    grow: float = 2.0,
    max_step: float = 1e6,
    min_step: float = 1e-20,
) -> OptimResult:
    """Minimize a differentiable objective by steepest descent.

    Steps are accepted only under the Armijo sufficient-decrease condition,
    so `trace` (objective at x0 followed by every accepted iterate) never
    increases. Stops when the relative objective change drops below
    `rel_tol`, the gradient vanishes, no decreasing step exists above
    `min_step`, or `max_iters` accepted steps have been taken.
    """
    x = np.array(x0, dtype=float, copy=True)
    f, g = fun_grad(x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the initial point")
    trace = [float(f)]
    step = float(init_step)
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        gnorm2 = float(np.dot(g, g))
        if gnorm2 == 0.0:
            converged = True
            iterations -= 1
            break
        accepted = False
        cand_f, cand_g, cand_x = f, g, x
        while step >= min_step:
            cand_x = x - step * g
            cand_f, cand_g = fun_grad(cand_x)
            if np.isfinite(cand_f) and cand_f <= f - armijo * step * gnorm2:
                accepted = True
                break
            step *= shrink
        if not accepted:
            converged = True
            iterations -= 1
            break
        drop = f - cand_f
        x, f, g = cand_x, cand_f, cand_g
        trace.append(float(f))
        step = min(step * grow, max_step)
        if drop / max(1.0, abs(f)) < rel_tol:
            converged = True
            break
    return OptimResult(x=x, objective=float(f), trace=trace, iterations=iterations, converged=converged)

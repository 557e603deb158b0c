"""Deterministic full-batch gradient descent with Armijo backtracking.

Step proposals use the Barzilai-Borwein ratio ``s's / s'y`` from the
previous iteration (falling back to the configured initial step), then
backtrack until the Armijo condition holds, so the recorded objective
trace is nonincreasing.  Objective evaluations that leave a loss domain
count as failed trial steps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergenceWarning, UsageError

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerSettings:
    max_iters: int = 2000
    step_size: float = 1.0
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    shrink: float = 0.5
    min_step: float = 1e-20
    barzilai_borwein: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise UsageError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.grad_tol > 0:
            raise UsageError(f"grad_tol must be positive, got {self.grad_tol}")
        if not self.step_size > 0:
            raise UsageError(f"step_size must be positive, got {self.step_size}")


@dataclass
class OptimResult:
    theta: np.ndarray
    value: float
    grad_norm: float
    converged: bool
    n_iter: int
    trace: list[float] = field(default_factory=list)
    grad_trace: list[float] = field(default_factory=list)
    path: list[np.ndarray] | None = None


def _safe_eval(fun: Objective, theta: np.ndarray):
    try:
        value, grad = fun(theta)
    except DomainError:
        return np.inf, None
    if not np.isfinite(value) or grad is None or not np.all(np.isfinite(grad)):
        return np.inf, None
    return float(value), np.asarray(grad, dtype=float)


def gradient_descent(
    fun: Objective,
    theta0,
    settings: OptimizerSettings = OptimizerSettings(),
    record_path: bool = False,
) -> OptimResult:
    """Minimise ``fun`` (returning ``(value, grad)``) from ``theta0``.

    Raises :class:`DomainError` if the starting point is outside the loss
    domain.  When ``max_iters`` is exhausted, or the line search cannot
    make progress, the best iterate is returned with ``converged=False``
    and a :class:`NonConvergenceWarning` is emitted.
    """
    theta = np.array(theta0, dtype=float)
    try:
        value, grad = fun(theta)
    except DomainError as exc:
        raise DomainError(f"initial iterate is outside the loss domain: {exc}", exc.index, exc.value) from None
    value = float(value)
    grad = np.asarray(grad, dtype=float)
    trace = [value]
    gnorm = float(np.linalg.norm(grad))
    grad_trace = [gnorm]
    path = [theta.copy()] if record_path else None
    step = settings.step_size
    prev = None
    it = 0
    stalled = False
    while gnorm > settings.grad_tol and it < settings.max_iters:
        if settings.barzilai_borwein and prev is not None:
            s = theta - prev[0]
            y = grad - prev[1]
            sy = float(s @ y)
            if sy > 0:
                step = float(s @ s) / sy
            else:
                step = settings.step_size
        t = step
        g2 = gnorm**2
        while True:
            cand = theta - t * grad
            v_new, g_new = _safe_eval(fun, cand)
            if v_new <= value - settings.armijo * t * g2:
                break
            t *= settings.shrink
            if t < settings.min_step:
                stalled = True
                break
        if stalled:
            break
        prev = (theta, grad)
        theta, value, grad = cand, v_new, g_new
        gnorm = float(np.linalg.norm(grad))
        trace.append(value)
        grad_trace.append(gnorm)
        if record_path:
            path.append(theta.copy())
        if not settings.barzilai_borwein:
            step = settings.step_size
        it += 1
    converged = gnorm <= settings.grad_tol
    if not converged:
        reason = "line search stalled" if stalled else f"max_iters={settings.max_iters} reached"
        warnings.warn(
            f"gradient descent did not converge ({reason}); |grad| = {gnorm:.3e}",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return OptimResult(theta, value, gnorm, converged, it, trace, grad_trace, path)

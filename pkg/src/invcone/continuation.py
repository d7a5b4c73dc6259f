"""Pseudo-arclength path following for square-plus-one nonlinear systems.

The solvers describe a branch by ``fun(u) -> (R, J)`` with ``m`` residuals,
``m + 1`` unknowns and a Jacobian ``J`` of shape ``(m, m + 1)``. The last
entry of ``u`` is the continuation parameter.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationStall, ConvergenceError

__all__ = ["StepControl", "tangent", "correct", "newton", "follow"]


@dataclass
class StepControl:
    initial: float = 1e-2
    minimum: float = 1e-8
    maximum: float = 1.0
    max_param_step: float = np.inf
    target_iterations: int = 4
    max_corrector_iterations: int = 12
    tol: float = 1e-10
    max_points: int = 5000


def newton(fun, u, tol=1e-10, maxiter=30):
    """Plain Newton for a square system ``fun(u) -> (R, J)``."""
    u = np.array(u, dtype=float)
    for it in range(maxiter + 1):
        R, J = fun(u)
        res = np.linalg.norm(R, np.inf)
        if not np.isfinite(res):
            raise ConvergenceError("residual became non-finite", it, res)
        if res <= tol:
            return u, it
        if it == maxiter:
            break
        try:
            du = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Newton matrix: {exc}", it, res) from exc
        u = u + du
    raise ConvergenceError(f"Newton did not converge in {maxiter} iterations (residual {res:.3g})", maxiter, res)


def tangent(J, previous=None):
    """Unit null vector of the ``(m, m+1)`` Jacobian, oriented along ``previous``."""
    m = J.shape[0]
    if previous is None:
        _, _, Vt = np.linalg.svd(J)
        t = Vt[-1]
        if t[-1] < 0:
            t = -t
        return t
    A = np.vstack([J, previous])
    rhs = np.zeros(m + 1)
    rhs[-1] = 1.0
    t = np.linalg.solve(A, rhs)
    t /= np.linalg.norm(t)
    if t @ previous < 0:
        t = -t
    return t


def correct(fun, u_pred, t, tol, maxiter):
    """Newton corrector constrained to the hyperplane orthogonal to ``t``
    through the prediction. Returns ``(u, iterations)``."""
    u = u_pred.copy()
    for it in range(maxiter + 1):
        R, J = fun(u)
        g = t @ (u - u_pred)
        res = max(np.linalg.norm(R, np.inf), abs(g))
        if not np.isfinite(res):
            break
        if res <= tol:
            return u, max(it, 1), J
        if it == maxiter:
            break
        A = np.vstack([J, t])
        try:
            du = np.linalg.solve(A, -np.append(R, g))
        except np.linalg.LinAlgError:
            break
        u = u + du
    raise ConvergenceError("corrector failed", maxiter, res)


def follow(fun, u0, control, accept=None, direction=None):
    """Trace a branch from the converged point ``u0``.

    ``accept(u, J) -> str or None`` is called on every corrected point; a
    returned string stops the trace (the point is kept unless the string
    starts with ``"reject"``). ``direction`` orients the first tangent; by
    default the parameter increases.

    Returns ``(points, info)`` with ``info`` holding the stop reason and the
    corrector iteration counts.
    """
    u = np.array(u0, dtype=float)
    _, J = fun(u)
    t = tangent(J)
    if direction is not None and t @ direction < 0:
        t = -t
    s = control.initial
    points = [u.copy()]
    iters = []
    reason = "max-points"
    while len(points) < control.max_points:
        s = min(s, control.maximum)
        if abs(t[-1]) * s > control.max_param_step:
            s = control.max_param_step / abs(t[-1])
        u_pred = u + s * t
        try:
            u_new, k, J_new = correct(fun, u_pred, t, control.tol, control.max_corrector_iterations)
        except (ConvergenceError, ValueError, ArithmeticError) as exc:
            s *= 0.5
            if s < control.minimum:
                raise ContinuationStall(f"step size below {control.minimum:g} ({exc})") from exc
            continue
        status = accept(u_new, J_new) if accept is not None else None
        if status is not None and status.startswith("reject"):
            s *= 0.5
            if s < control.minimum:
                reason = status
                break
            continue
        iters.append(k)
        t = tangent(J_new, t)
        u = u_new
        points.append(u.copy())
        if status is not None:
            reason = status
            break
        s *= float(np.clip(control.target_iterations / k, 0.5, 2.0))
    return points, {"reason": reason, "corrector_iterations": iters}

"""Damped least-squares with box bounds and standard errors.

The solver is a Levenberg-style loop with Marquardt scaling: the normal
equations are damped by lambda * diag(J^T J), lambda shrinking tenfold on
every accepted step and growing tenfold on every rejection. Steps are
projected onto the box; a step is accepted only if it does not increase
the cost, so the accepted-cost history is monotone by construction.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable

import numpy as np

MAX_ITERATIONS = 500
STEP_TOL = 1e-10          # relative parameter step
COST_TOL = 1e-12          # relative cost decrease
LAMBDA_LIMIT = 1e12       # no descent below this damping: stationary point
NULL_COLUMN_REL = 1e-10   # Jacobian column norm below this is unidentifiable


@dataclasses.dataclass(frozen=True)
class FitResult:
    """Named parameters with standard errors for the identifiable ones.

    std_errors is populated only for converged fits, and omits parameters
    whose Jacobian column is numerically null (unidentifiable directions)
    or that were held fixed.
    """

    params: dict[str, float]
    std_errors: dict[str, float]
    residual_norm: float
    converged: bool
    n_iterations: int
    cost_history: tuple[float, ...]

    def __post_init__(self):
        if not np.isfinite(self.residual_norm):
            raise ValueError("residual norm must be finite")


@dataclasses.dataclass(frozen=True)
class _Solution:
    x: np.ndarray
    converged: bool
    n_iterations: int
    cost_history: tuple[float, ...]
    jacobian: np.ndarray
    residual: np.ndarray


def _numeric_jacobian(
    residual: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    """Central-difference Jacobian, one-sided against an active bound."""
    r0 = residual(x)
    jac = np.empty((len(r0), len(x)))
    for i in range(len(x)):
        # absolute floor keeps the step sane for parameters sitting at 0
        h = max(1e-6 * abs(x[i]), 1e-8)
        x_plus = x.copy()
        x_minus = x.copy()
        x_plus[i] = min(x[i] + h, hi[i])
        x_minus[i] = max(x[i] - h, lo[i])
        width = x_plus[i] - x_minus[i]
        if width == 0.0:
            jac[:, i] = 0.0
        else:
            jac[:, i] = (residual(x_plus) - residual(x_minus)) / width
    return jac


def levenberg_fit(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    max_iterations: int = MAX_ITERATIONS,
) -> _Solution:
    """Minimize ||residual(x)||^2 over the box [lo, hi] starting at x0."""
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    r = residual(x)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    converged = False
    iteration = 0
    jac = _numeric_jacobian(residual, x, lo, hi)

    while iteration < max_iterations and not converged:
        iteration += 1
        gradient = jac.T @ r
        normal = jac.T @ jac
        scale = np.diag(normal).copy()
        scale = np.maximum(scale, max(scale.max(), 1e-300) * 1e-14)

        while True:
            damped = normal + lam * np.diag(scale)
            try:
                step = np.linalg.solve(damped, -gradient)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(damped, -gradient, rcond=None)[0]
            x_new = np.clip(x + step, lo, hi)
            r_new = residual(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                step_rel = np.linalg.norm(x_new - x) / max(np.linalg.norm(x), 1e-300)
                cost_rel = (cost - cost_new) / max(cost, 1e-300)
                x, r, cost = x_new, r_new, cost_new
                history.append(cost)
                lam = max(lam / 10.0, 1e-12)
                if step_rel < STEP_TOL or cost_rel < COST_TOL:
                    converged = True
                break
            lam *= 10.0
            if lam > LAMBDA_LIMIT:
                # no direction decreases the cost: stationary to precision
                converged = True
                history.append(cost)
                break
        jac = _numeric_jacobian(residual, x, lo, hi)

    return _Solution(
        x=x,
        converged=converged,
        n_iterations=iteration,
        cost_history=tuple(history),
        jacobian=jac,
        residual=r,
    )


def standard_errors(solution: _Solution, names: list[str]) -> dict[str, float]:
    """sigma^2 (J^T J)^-1 errors over the identifiable parameter subset."""
    if not solution.converged:
        return {}
    jac = solution.jacobian
    m, n = jac.shape
    col_norms = np.linalg.norm(jac, axis=0)
    identifiable = col_norms > NULL_COLUMN_REL * max(col_norms.max(), 1e-300)
    k = int(np.sum(identifiable))
    if k == 0 or m <= k:
        return {}
    sub = jac[:, identifiable]
    cost = float(solution.residual @ solution.residual)
    sigma_sq = cost / (m - k)
    try:
        cov = sigma_sq * np.linalg.inv(sub.T @ sub)
    except np.linalg.LinAlgError:
        return {}
    variances = np.diag(cov)
    if np.any(variances < 0):
        return {}
    errors = {}
    j = 0
    for i, name in enumerate(names):
        if identifiable[i]:
            errors[name] = float(np.sqrt(variances[j]))
            j += 1
    return errors


def build_result(solution: _Solution, names: list[str]) -> FitResult:
    """Package a solution with named parameters and standard errors."""
    return FitResult(
        params={name: float(v) for name, v in zip(names, solution.x)},
        std_errors=standard_errors(solution, names),
        residual_norm=float(np.linalg.norm(solution.residual)),
        converged=solution.converged,
        n_iterations=solution.n_iterations,
        cost_history=solution.cost_history,
    )

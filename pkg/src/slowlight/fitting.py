"""Damped least-squares fitting used by every model fit in the package.

Thin layer over :func:`scipy.optimize.least_squares` (Levenberg-Marquardt)
that fixes the tolerances, turns non-convergence into :class:`FitError`
and attaches standard errors from the Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError

XTOL = 1e-10
MAX_ITERATIONS = 200


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray
    rss: float
    nfev: int
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.residuals.size)


def damped_least_squares(residual_fn, p0, *, jac="2-point", bounds=None,
                         x_scale="jac", max_iterations=MAX_ITERATIONS,
                         xtol=XTOL) -> FitResult:
    """Minimise ``sum(residual_fn(p)**2)`` starting from ``p0``.

    ``max_iterations`` counts Jacobian evaluations; the function-evaluation
    budget handed to scipy is scaled by the number of parameters so that a
    finite-difference Jacobian does not eat the iteration budget.
    """
    p0 = np.asarray(p0, dtype=float)
    if not np.all(np.isfinite(p0)):
        raise FitError("non-finite starting point", best=p0)
    method = "lm" if bounds is None else "trf"
    kwargs = {}
    if bounds is not None:
        kwargs["bounds"] = bounds
    try:
        sol = least_squares(residual_fn, p0, jac=jac, method=method,
                            xtol=xtol, ftol=1e-15, gtol=1e-15,
                            x_scale=x_scale,
                            max_nfev=max_iterations * (p0.size + 1), **kwargs)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitError(f"least-squares solver failed: {exc}", best=p0) from exc

    res = np.asarray(sol.fun, dtype=float)
    rss = float(res @ res)
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)) or not np.isfinite(rss):
        raise FitError(f"fit did not converge: {sol.message}", best=sol.x,
                       diagnostics={"rss": rss, "nfev": sol.nfev})
    return FitResult(params=sol.x, stderr=_stderr(sol.jac, rss, res.size),
                     residuals=res, rss=rss, nfev=int(sol.nfev),
                     message=str(sol.message))


def _stderr(jac, rss, n):
    jac = np.asarray(jac, dtype=float)
    dof = max(n - jac.shape[1], 1)
    try:
        cov = np.linalg.pinv(jac.T @ jac) * rss / dof
    except np.linalg.LinAlgError:
        return np.full(jac.shape[1], np.nan)
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))

"""Descent on the Kapustin-Witten residual functional.

``R(A, phi) = ||(c X - s Y)^+||^2 + ||(s X + c Y)^-||^2 + ||D_A^* phi||^2`` is
non-negative and vanishes exactly on solutions of the theta-family.  Its
gradient is assembled from the adjoint of the residual linearization, so it
is the exact gradient of the discrete functional.
"""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .kw import adjoint_linearization, kw_residual

__all__ = ["IterationLog", "minimize_kw", "residual_and_gradient"]

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("iter", "R", "r_plus", "r_minus", "r_moment", "step")


@dataclass
class IterationLog:
    rows: list = field(default_factory=list)
    status: str = "running"

    def append(self, it, res, step):
        self.rows.append((it, res.value, res.plus_norm, res.minus_norm, res.moment_norm, step))

    @property
    def values(self):
        return np.array([r[1] for r in self.rows])

    @property
    def n_iter(self):
        return self.rows[-1][0] if self.rows else 0

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_COLUMNS)
            for row in self.rows:
                writer.writerow([row[0], *(repr(float(v)) for v in row[1:])])


def residual_and_gradient(cfg, theta, scheme=None):
    """``(KWResidual, grad R)``."""
    res = kw_residual(cfg, theta, scheme)
    c, s = np.cos(theta), np.sin(theta)
    U = c * res.r_plus + s * res.r_minus
    V = -s * res.r_plus + c * res.r_minus
    g = adjoint_linearization(cfg, U, V, res.r_moment, scheme)
    return res, 2.0 * g


def minimize_kw(
    cfg0,
    theta,
    step_rule="armijo",
    tol=1e-6,
    max_iter=5000,
    step0=0.1,
    armijo=1e-4,
    shrink=0.5,
    max_backtracks=40,
    scheme=None,
):
    """Steepest descent with backtracking until ``R <= tol``.

    ``step_rule="armijo"`` lets the trial step double after every accepted
    step; ``"fixed"`` restarts each line search from ``step0``.

    Every accepted step decreases ``R``.  If no step length passes the Armijo
    test after ``max_backtracks`` halvings the run stops with status
    ``"stalled"`` and returns the best iterate so far.  Returns
    ``(configuration, IterationLog)``.
    """
    if step_rule not in ("armijo", "fixed"):
        raise ValueError(f"unknown step rule {step_rule!r}")
    if cfg0.grid.dim != 4:
        raise ValueError("minimize_kw needs dimension 4")
    cfg = cfg0
    res, grad = residual_and_gradient(cfg, theta, scheme)
    log = IterationLog()
    log.append(0, res, 0.0)
    step = step0
    for it in range(1, max_iter + 1):
        if res.value <= tol:
            log.status = "converged"
            return cfg, log
        g2 = grad.norm2()
        alpha = step
        for _ in range(max_backtracks):
            trial = cfg.shifted(grad, -alpha)
            trial_res, trial_grad = residual_and_gradient(trial, theta, scheme)
            if trial_res.value <= res.value - armijo * alpha * g2:
                break
            alpha *= shrink
        else:
            logger.warning("line search stalled at iteration %d (R=%.3g)", it, res.value)
            log.status = "stalled"
            return cfg, log
        cfg, res, grad = trial, trial_res, trial_grad
        log.append(it, res, alpha)
        step = 2 * alpha if step_rule == "armijo" else step0
    log.status = "converged" if res.value <= tol else "max_iter"
    return cfg, log

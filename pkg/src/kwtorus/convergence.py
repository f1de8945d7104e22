"""Refinement studies: every O(h^p) claim becomes a measured slope.

A *check* maps a grid size ``n`` (plus keyword parameters) to a scalar
defect.  :func:`convergence_study` evaluates it on several grids and fits
``log(defect) = p log(h) + c`` by least squares.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .calculus import bianchi_defect, complex_curvature, curvature, project_pm
from .flow import flow_diagnostics, integrate_flow
from .functionals import topological_pairing
from .gauge import apply_gauge, gauge_from_algebra
from .kw import weitzenbock_check
from .lattice import AdjointForm, Configuration, TorusGrid, random_configuration
from .lie import adjoint_matrix, bracket
from .moment import moment_map

__all__ = [
    "CHECKS",
    "ConvergenceResult",
    "StepHalvingResult",
    "convergence_study",
    "fit_order",
    "spectral_curvature",
    "step_halving_study",
]

FLOOR = 1e-11


@dataclass(frozen=True)
class ConvergenceResult:
    check: str
    sizes: tuple
    spacings: tuple
    defects: tuple
    order: float
    fit_residual: float
    status: str

    def to_dict(self):
        return asdict(self)


def fit_order(spacings, defects):
    """Least-squares slope of ``log(defect)`` against ``log(h)`` and the RMS residual."""
    x = np.log(np.asarray(spacings, dtype=float))
    y = np.log(np.maximum(np.asarray(defects, dtype=float), 1e-300))
    coef, *_ = np.linalg.lstsq(np.stack([x, np.ones_like(x)], axis=1), y, rcond=None)
    resid = y - (coef[0] * x + coef[1])
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def _cfg(n, dim=4, seed=1, amplitude=0.3, band=1, **_):
    return random_configuration(TorusGrid(dim, n), seed, amplitude, band)


def _smooth_gauge(grid, strength=0.1):
    # nonabelian on purpose: an abelian 1-d profile is flat even on the grid
    x = grid.coordinates()
    chi = np.zeros((1, *grid.shape, 3))
    chi[0, ..., 1] = strength * np.sin(x[0])
    chi[0, ..., 2] = strength * np.cos(x[1])
    chi[0, ..., 0] = strength * np.sin(x[-1] + x[0])
    return gauge_from_algebra(AdjointForm(grid, 0, chi))


def spectral_curvature(A):
    """``dA + 1/2 [A ^ A]`` with exact (Fourier) derivatives.

    Exact for band-limited fields whose frequencies stay below Nyquist, so it
    is an independent oracle for the finite-difference curvature.
    """
    grid = A.grid
    k = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.spacing)
    k[grid.n // 2] = 0.0
    axes = tuple(range(1, grid.dim + 1))

    def deriv(f, j):
        shape = [1] * grid.dim
        shape[j] = grid.n
        mult = (1j * k).reshape(shape)[None, ..., None]
        return np.fft.ifftn(np.fft.fftn(f, axes=axes) * mult, axes=axes).real

    pairs = [(j, l) for j in range(grid.dim) for l in range(j + 1, grid.dim)]
    data = np.empty((len(pairs), *grid.shape, 3))
    a = A.data
    for c, (j, l) in enumerate(pairs):
        dj = deriv(a[l][None], j)[0]
        dl = deriv(a[j][None], l)[0]
        data[c] = dj - dl + bracket(a[j], a[l])
    return AdjointForm(grid, 2, data)


def _bianchi(n, **kw):
    return bianchi_defect(_cfg(n, **kw), kw.get("scheme")).norm()


def _weitzenbock(n, **kw):
    return weitzenbock_check(_cfg(n, **kw), kw.get("scheme")).r_weitz


def _weitzenbock_reduced(n, **kw):
    return weitzenbock_check(_cfg(n, **kw), kw.get("scheme")).r_cym_reduced


def _topological(n, **kw):
    kw.setdefault("dim", 4)
    return abs(topological_pairing(_cfg(n, **kw), kw.get("scheme")))


def _pm_sum(n, **kw):
    kw["dim"] = 4
    T = complex_curvature(_cfg(n, **kw), kw.get("scheme"))
    return (project_pm(T, 1) + project_pm(T, -1) - T).norm()


def _curvature_oracle(n, **kw):
    A = _cfg(n, **kw).A
    return (curvature(A, kw.get("scheme")) - spectral_curvature(A)).norm()


def _pure_gauge(n, dim=4, scheme=None, **_):
    grid = TorusGrid(dim, n)
    cfg = apply_gauge(Configuration.zeros(grid), _smooth_gauge(grid), scheme=scheme)
    return curvature(cfg.A, scheme).norm()


def _moment_covariance(n, **kw):
    cfg = _cfg(n, **kw)
    g = _smooth_gauge(cfg.grid)
    mu_g = moment_map(apply_gauge(cfg, g, scheme=kw.get("scheme")), kw.get("scheme"))
    r = adjoint_matrix(g.matrices).real
    rotated = np.einsum("...ab,j...b->j...a", r, moment_map(cfg, kw.get("scheme")).data)
    return (mu_g - AdjointForm(cfg.grid, 0, rotated)).norm()


def _flow_run(n, seed=2, amplitude=0.2, band=1, theta=0.3, t_final=0.5, scheme=None, **_):
    # dt = 1/n keeps dt / h = 1 / (2 pi) fixed below the 0.2 stability guard
    grid = TorusGrid(3, n)
    start = random_configuration(grid, seed, amplitude, band)
    start = Configuration(start.A, AdjointForm.zeros(grid, 1))
    steps = max(1, round(t_final * n))
    state = integrate_flow(start, theta, t_final / steps, steps, scheme=scheme)
    return flow_diagnostics(state, scheme)


def _flow_balance(n, **kw):
    return _flow_run(n, **kw).relative_gap


def _flow_moment_drift(n, **kw):
    return _flow_run(n, **kw).moment_drift


def _flow_chain_rule(n, **kw):
    return _flow_run(n, **kw).chain_rule_defect


CHECKS = {
    "bianchi": _bianchi,
    "weitzenbock": _weitzenbock,
    "weitzenbock_reduced": _weitzenbock_reduced,
    "topological": _topological,
    "pm_sum": _pm_sum,
    "curvature_oracle": _curvature_oracle,
    "pure_gauge": _pure_gauge,
    "moment_covariance": _moment_covariance,
    "flow_balance": _flow_balance,
    "flow_moment_drift": _flow_moment_drift,
    "flow_chain_rule": _flow_chain_rule,
}


def convergence_study(check, sizes, floor=FLOOR, **params):
    """Measure the refinement order of a named check (or a callable ``n -> defect``).

    Status is ``"floor reached"`` when every defect is below ``floor`` (an
    exact identity; the order is then NaN), ``"no clean order"`` when the
    defects do not decrease strictly with ``h`` and ``"ok"`` otherwise.
    """
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) < 3:
        raise ValueError("a convergence study needs at least 3 grid sizes")
    if callable(check):
        name, func = getattr(check, "__name__", "custom"), check
    else:
        if check not in CHECKS:
            raise KeyError(f"unknown check {check!r}; choose from {sorted(CHECKS)}")
        name, func = check, CHECKS[check]
    sizes = tuple(sorted(sizes))
    length = params.pop("length", 2 * math.pi)
    spacings = tuple(length / n for n in sizes)
    defects = tuple(float(func(n, **params)) for n in sizes)
    if max(defects) <= floor:
        return ConvergenceResult(name, sizes, spacings, defects, math.nan, math.nan, "floor reached")
    order, resid = fit_order(spacings, defects)
    clean = all(b < a for a, b in zip(defects, defects[1:]))
    return ConvergenceResult(
        name, sizes, spacings, defects, order, resid, "ok" if clean else "no clean order"
    )


@dataclass(frozen=True)
class StepHalvingResult:
    steps: tuple
    differences: tuple
    orders: tuple

    @property
    def order(self):
        return min(self.orders)


def step_halving_study(cfg, theta, t_final, steps0, levels=4, method="rk4", scheme=None):
    """Observed order of a time stepper from successive halvings of ``dt``.

    ``differences[i] = ||u(dt_i) - u(dt_{i+1})||`` at ``t_final``; each order
    is ``log2(differences[i] / differences[i + 1])``.
    """
    if levels < 3:
        raise ValueError("step halving needs at least 3 levels")
    steps = tuple(steps0 * 2**k for k in range(levels))
    finals = [integrate_flow(cfg, theta, t_final / s, s, method=method, scheme=scheme).cfg for s in steps]
    diffs = tuple((a - b).norm() for a, b in zip(finals, finals[1:]))
    orders = tuple(math.log2(a / b) for a, b in zip(diffs, diffs[1:]))
    return StepHalvingResult(steps, diffs, orders)

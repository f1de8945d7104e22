"""Scalar functionals: Yang-Mills, complex Yang-Mills, Chern-Simons, topological term.

``tr`` throughout is :func:`kwtorus.lie.trace_form`, i.e. ``-<X, Y>`` in the
orthonormal normalization.  With it ``|X|^2 = -tr(X conj(X))`` and every
identity below holds exactly on the grid (pointwise algebra plus exact
summation by parts), except where a docstring says O(h^2).
"""

import json
from dataclasses import asdict, dataclass
from math import pi

import numpy as np

from .calculus import (
    complex_curvature,
    covariant_codiff,
    covariant_d,
    curvature,
    flat_part,
    project_pm,
    wedge_bracket,
    wedge_trace,
)
from .lattice import AdjointForm

__all__ = [
    "DecompositionReport",
    "EnergyBreakdown",
    "chern_simons",
    "chern_simons_variation",
    "decomposition_identity",
    "energies",
    "integrate",
    "topological_expansion",
    "topological_pairing",
    "yang_mills",
]

EIGHT_PI2 = 8 * pi**2


def integrate(grid, density):
    """Riemann sum of a scalar density (top-form coefficient) over the torus."""
    total = np.sum(density) * grid.volume_element
    return complex(total) if np.iscomplexobj(total) else float(total)


def yang_mills(A, scheme=None):
    """``int |F_A|^2``."""
    return curvature(A, scheme).norm2()


@dataclass(frozen=True)
class EnergyBreakdown:
    ym: float
    cym: float
    augmented: float
    flat_part: float
    dphi_part: float
    moment_part: float
    sd_defect: float | None = None
    topo: complex | None = None
    k_estimate: float | None = None
    theta: float | None = None

    def to_dict(self):
        out = asdict(self)
        if self.topo is not None:
            out["topo"] = [self.topo.real, self.topo.imag]
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def energies(cfg, theta=None, scheme=None):
    """All energy parts of a configuration.

    ``sd_defect = 2 int |(e^{i theta} F_C)^-|^2`` and ``topo = int tr(F_C ^ F_C)``
    are only defined in dimension 4; passing ``theta`` on a 3-torus is an error.
    In dimension 4, ``theta`` defaults to 0.
    """
    grid = cfg.grid
    if grid.dim != 4 and theta is not None:
        raise ValueError("sd_defect and topo need dimension 4")
    x = flat_part(cfg, scheme)
    y = covariant_d(cfg.A, cfg.phi, scheme)
    mu = covariant_codiff(cfg.A, cfg.phi, scheme)
    flat, dphi, moment = x.norm2(), y.norm2(), mu.norm2()
    ym = yang_mills(cfg.A, scheme)
    extra = {}
    if grid.dim == 4:
        theta = 0.0 if theta is None else float(theta)
        fc = AdjointForm(grid, 2, x.data + 1j * y.data)
        rotated = fc * np.exp(1j * theta)
        topo = integrate(grid, wedge_trace(fc, fc)[0])
        extra = dict(
            sd_defect=2 * project_pm(rotated, -1).norm2(),
            topo=complex(topo),
            k_estimate=complex(topo).real / EIGHT_PI2,
            theta=theta,
        )
    return EnergyBreakdown(
        ym=ym,
        cym=flat + dphi,
        augmented=flat + dphi + moment,
        flat_part=flat,
        dphi_part=dphi,
        moment_part=moment,
        **extra,
    )


def chern_simons(cfg, scheme=None):
    """Complex Chern-Simons functional on a trivial bundle over a 3-torus.

    ``CS(a) = int 1/2 tr(a ^ da) + 1/6 tr(a ^ [a ^ a])`` with ``a = A + i phi``.
    The normalization is the one for which the first variation along
    ``B + i psi`` is exactly ``int tr(F_C ^ (B + i psi))``.
    """
    grid = cfg.grid
    if grid.dim != 3:
        raise ValueError(f"Chern-Simons needs a 3-torus, got dim {grid.dim}")
    a = cfg.connection()
    da = covariant_d(None, a, scheme)
    quadratic = wedge_trace(a, da)[0]
    cubic = wedge_trace(a, wedge_bracket(a, a))[0]
    return complex(integrate(grid, 0.5 * quadratic + cubic / 6))


def chern_simons_variation(cfg, t, scheme=None):
    """``int tr(F_C ^ (B + i psi))`` on a 3-torus."""
    if cfg.grid.dim != 3:
        raise ValueError(f"Chern-Simons needs a 3-torus, got dim {cfg.grid.dim}")
    fc = complex_curvature(cfg, scheme)
    var = AdjointForm(cfg.grid, 1, t.B.data + 1j * t.psi.data)
    return complex(integrate(cfg.grid, wedge_trace(fc, var)[0]))


def topological_pairing(cfg, scheme=None):
    """``int tr(F_C ^ F_C)`` on a closed 4-torus; ``8 pi^2 k`` with ``k = 0`` here."""
    if cfg.grid.dim != 4:
        raise ValueError("the topological pairing needs dimension 4")
    x = flat_part(cfg, scheme)
    y = covariant_d(cfg.A, cfg.phi, scheme)
    # tr(F_C ^ F_C) = tr(x^x) - tr(y^y) + 2i tr(x^y); real pieces keep memory down
    re = integrate(cfg.grid, wedge_trace(x, x)[0]) - integrate(cfg.grid, wedge_trace(y, y)[0])
    im = 2 * integrate(cfg.grid, wedge_trace(x, y)[0])
    return complex(re, im)


def topological_expansion(cfg, scheme=None):
    """The three pieces ``int tr(X^X)``, ``int tr(Y^Y)``, ``int tr(X^Y)``.

    ``X = F_A - 1/2 [phi ^ phi]`` and ``Y = D_A phi``, so that
    ``topological_pairing = XX - YY + 2i XY``.
    """
    x = flat_part(cfg, scheme)
    y = covariant_d(cfg.A, cfg.phi, scheme)
    g = cfg.grid
    return (
        integrate(g, wedge_trace(x, x)[0]),
        integrate(g, wedge_trace(y, y)[0]),
        integrate(g, wedge_trace(x, y)[0]),
    )


@dataclass(frozen=True)
class DecompositionReport:
    """``YM = 2 int |F^+|^2 + int tr(F^F) = 2 int |F^-|^2 - int tr(F^F)``."""

    ym: float
    plus_norm2: float
    minus_norm2: float
    topo: float
    plus_defect: float
    minus_defect: float

    @property
    def max_defect(self):
        return max(self.plus_defect, self.minus_defect)


def decomposition_identity(A, scheme=None):
    if A.grid.dim != 4:
        raise ValueError("the self-dual decomposition needs dimension 4")
    F = curvature(A, scheme)
    ym = F.norm2()
    plus = project_pm(F, 1).norm2()
    minus = project_pm(F, -1).norm2()
    topo = integrate(A.grid, wedge_trace(F, F)[0])
    return DecompositionReport(
        ym=ym,
        plus_norm2=plus,
        minus_norm2=minus,
        topo=topo,
        plus_defect=abs(ym - (2 * plus + topo)),
        minus_defect=abs(ym - (2 * minus - topo)),
    )

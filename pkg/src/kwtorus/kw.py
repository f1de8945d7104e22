"""Kapustin-Witten residuals, complex Yang-Mills equations and Weitzenbock checks.

With ``X = F_A - 1/2 [phi ^ phi]``, ``Y = D_A phi``, ``c = cos(theta)`` and
``s = sin(theta)`` the theta-family reads

    (c X - s Y)^+ = 0,    (s X + c Y)^- = 0,    D_A^* phi = 0.

Under the complex projection ``T^+/- = 1/2 (T +/- *conj T)`` the first two
lines together are exactly ``(e^{i theta} F_C)^+ = 0``, since
``(e^{i theta} F_C)^+ = (c X - s Y)^+ + i (s X + c Y)^-``.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .calculus import (
    _scheme,
    bracket_contract,
    contract_dot,
    covariant_codiff,
    covariant_d,
    curvature,
    flat_part,
    hodge_star,
    nabla,
    project_pm,
    rough_laplacian,
    wedge_bracket,
)
from .lattice import AdjointForm, TangentPair
from .lie import bracket

__all__ = [
    "AltFormUndefinedError",
    "ELResidual",
    "EstimateDiagnostics",
    "KWResidual",
    "QSplit",
    "WeitzenbockReport",
    "adjoint_linearization",
    "el_residual",
    "estimate_diagnostics",
    "is_alt_form_pole",
    "kw_alt_check",
    "kw_alt_field",
    "kw_residual",
    "linearize",
    "q_split",
    "weitzenbock_check",
]


class AltFormUndefinedError(ValueError):
    pass


def _require_dim4(grid):
    if grid.dim != 4:
        raise ValueError(f"the Kapustin-Witten system needs dimension 4, got {grid.dim}")


def _xy(cfg, scheme=None):
    return flat_part(cfg, scheme), covariant_d(cfg.A, cfg.phi, scheme)


@dataclass(frozen=True, eq=False)
class KWResidual:
    theta: float
    r_plus: AdjointForm
    r_minus: AdjointForm
    r_moment: AdjointForm
    complex_plus_norm: float
    complex_minus_norm: float

    @property
    def plus_norm(self):
        return self.r_plus.norm()

    @property
    def minus_norm(self):
        return self.r_minus.norm()

    @property
    def moment_norm(self):
        return self.r_moment.norm()

    @property
    def value(self):
        """``||r_plus||^2 + ||r_minus||^2 + ||r_moment||^2``; zero exactly on solutions."""
        return self.r_plus.norm2() + self.r_minus.norm2() + self.r_moment.norm2()

    @property
    def equivalence_defect(self):
        """``| ||(e^{i theta} F_C)^+||^2 - ||r_plus||^2 - ||r_minus||^2 |``."""
        return abs(self.complex_plus_norm**2 - self.r_plus.norm2() - self.r_minus.norm2())


def kw_residual(cfg, theta, scheme=None):
    _require_dim4(cfg.grid)
    c, s = np.cos(theta), np.sin(theta)
    x, y = _xy(cfg, scheme)
    r_plus = project_pm(c * x - s * y, 1)
    r_minus = project_pm(s * x + c * y, -1)
    rotated = AdjointForm(cfg.grid, 2, np.exp(1j * theta) * (x.data + 1j * y.data))
    return KWResidual(
        theta=float(theta),
        r_plus=r_plus,
        r_minus=r_minus,
        r_moment=covariant_codiff(cfg.A, cfg.phi, scheme),
        complex_plus_norm=project_pm(rotated, 1).norm(),
        complex_minus_norm=project_pm(rotated, -1).norm(),
    )


def is_alt_form_pole(theta, tol=1e-12):
    return abs(np.sin(2 * theta)) < tol


def kw_alt_field(cfg, theta, scheme=None):
    """``X + cot(2 theta) Y - csc(2 theta) *Y``; equals ``r_plus/cos + r_minus/sin``."""
    _require_dim4(cfg.grid)
    if is_alt_form_pole(theta):
        raise AltFormUndefinedError(f"alt form undefined at theta={theta} (cot/csc pole)")
    x, y = _xy(cfg, scheme)
    s2 = np.sin(2 * theta)
    return x + (np.cos(2 * theta) / s2) * y - (1 / s2) * hodge_star(y)


def kw_alt_check(cfg, theta, scheme=None):
    """L^2 defect of the rearranged form ``X = -cot(2 theta) Y + csc(2 theta) *Y``."""
    return kw_alt_field(cfg, theta, scheme).norm()


@dataclass(frozen=True)
class EstimateDiagnostics:
    """Size diagnostics for the interior estimates; nothing here is asserted.

    ``bound_excess`` is ``max_x (|F_A| - |[phi, phi]| - 2 (cot 2theta + csc 2theta) |nabla_A phi|)``,
    the pointwise estimate evaluated literally with its printed factor 2.
    """

    phi_l2sq: float
    curvature_l2sq: float
    phi_sup: float
    bound_lhs_max: float
    bound_rhs_max: float
    bound_excess: float

    def to_dict(self):
        return asdict(self)


def estimate_diagnostics(cfg, theta, scheme=None):
    if is_alt_form_pole(theta):
        raise AltFormUndefinedError(f"estimate undefined at theta={theta} (cot/csc pole)")
    A, phi = cfg.A, cfg.phi
    F = curvature(A, scheme)
    lhs = np.sqrt(F.pointwise_norm2())
    # |[phi, phi]| with components [phi_j, phi_k], j < k
    comm = np.sqrt((0.5 * wedge_bracket(phi, phi)).pointwise_norm2())
    grad = np.sqrt(np.sum(nabla(A, phi, scheme) ** 2, axis=(0, 1, -1)))
    coef = 2 * (np.cos(2 * theta) + 1) / np.sin(2 * theta)
    rhs = comm + coef * grad
    return EstimateDiagnostics(
        phi_l2sq=phi.norm2(),
        curvature_l2sq=F.norm2(),
        phi_sup=float(np.max(np.sqrt(phi.pointwise_norm2()))),
        bound_lhs_max=float(np.max(lhs)),
        bound_rhs_max=float(np.max(rhs)),
        bound_excess=float(np.max(lhs - rhs)),
    )


def linearize(cfg, t, scheme=None):
    """Directional derivatives ``(dX, dY, d mu)`` of the residual pieces along ``t``."""
    dx = covariant_d(cfg.A, t.B, scheme) - wedge_bracket(t.psi, cfg.phi)
    dy = covariant_d(cfg.A, t.psi, scheme) + wedge_bracket(t.B, cfg.phi)
    dmu = covariant_codiff(cfg.A, t.psi, scheme) + contract_dot(t.B, cfg.phi)
    return dx, dy, dmu


def adjoint_linearization(cfg, U, V, m=None, scheme=None):
    """Adjoint of :func:`linearize`.

    Returns the tangent pair ``g`` with
    ``<U, dX(t)> + <V, dY(t)> + <m, dmu(t)> = <g, t>`` for every ``t``.
    """
    A, phi = cfg.A, cfg.phi
    gB = covariant_codiff(A, U, scheme) - bracket_contract(V, phi)
    gpsi = bracket_contract(U, phi) + covariant_codiff(A, V, scheme)
    if m is not None:
        gB = gB + AdjointForm(cfg.grid, 1, bracket(m.data[0][None], phi.data))
        gpsi = gpsi + covariant_d(A, m, scheme)
    return TangentPair(gB, gpsi)


@dataclass(frozen=True, eq=False)
class ELResidual:
    """``el_A = D_A^* X - [Y, phi]'`` and ``el_phi = D_A^* Y + [X, phi]'``.

    The L^2 gradient of ``int |F_C|^2`` is exactly ``2 (el_A, el_phi)``.
    """

    el_A: AdjointForm
    el_phi: AdjointForm

    @property
    def norms(self):
        return self.el_A.norm(), self.el_phi.norm()

    def as_tangent(self):
        return TangentPair(self.el_A, self.el_phi)


def el_residual(cfg, scheme=None):
    x, y = _xy(cfg, scheme)
    g = adjoint_linearization(cfg, x, y, scheme=scheme)
    return ELResidual(g.B, g.psi)


@dataclass(frozen=True, eq=False)
class WeitzenbockReport:
    r_weitz: float
    r_cym_reduced: float
    ric2_field: np.ndarray

    @property
    def ric2_min(self):
        return float(np.min(self.ric2_field))


def weitzenbock_check(cfg, scheme=None):
    """Flat-torus Weitzenbock identities (Ricci = 0).

    * ``r_weitz``: ``||nabla^* nabla phi - [F_A, phi]' - D^*D phi - D D^* phi||``, O(h^2).
    * ``r_cym_reduced``: ``(nabla^* nabla phi - 1/2 [[phi ^ phi], phi]')`` minus
      (Weitzenbock defect + el_phi + D_A D_A^* phi), which vanishes identically.
    * ``ric2_field``: ``1/2 lap|phi|^2 - |nabla phi|^2 - sum_jk |[phi_j, phi_k]|^2``,
      zero for smooth solutions of the complex Yang-Mills equations.
    """
    A, phi = cfg.A, cfg.phi
    grid = cfg.grid
    F = curvature(A, scheme)
    lap = rough_laplacian(A, phi, scheme)
    dphi = covariant_d(A, phi, scheme)
    dstar_d = covariant_codiff(A, dphi, scheme)
    d_dstar = covariant_d(A, covariant_codiff(A, phi, scheme), scheme)
    w42 = lap - bracket_contract(F, phi) - dstar_d - d_dstar

    x = flat_part(cfg, scheme)
    el_phi = bracket_contract(x, phi) + dstar_d
    w43 = lap - 0.5 * bracket_contract(wedge_bracket(phi, phi), phi)
    reduced = w43 - w42 - el_phi - d_dstar

    s = _scheme(scheme)
    phi2 = np.sum(phi.data**2, axis=(0, -1))
    lap_phi2 = sum(
        s.apply(s.apply(phi2, j, grid.spacing), j, grid.spacing) for j in range(grid.dim)
    )
    grad2 = np.sum(nabla(A, phi, scheme) ** 2, axis=(0, 1, -1))
    comm2 = np.zeros(grid.shape)
    for j in range(grid.dim):
        for k in range(grid.dim):
            if j != k:
                comm2 += np.sum(bracket(phi.data[j], phi.data[k]) ** 2, axis=-1)
    return WeitzenbockReport(
        r_weitz=w42.norm(),
        r_cym_reduced=reduced.norm(),
        ric2_field=0.5 * lap_phi2 - grad2 - comm2,
    )


@dataclass(frozen=True, eq=False)
class QSplit:
    """Rotated fields ``q1 = cA - s phi``, ``q2 = sA + c phi`` and the split system."""

    theta: float
    q1: AdjointForm
    q2: AdjointForm
    lines: tuple
    repackaging_defect: float

    @property
    def residual_norms(self):
        return tuple(line.norm() for line in self.lines)


def q_split(cfg, theta, scheme=None):
    """Linear-plus-quadratic form ``L(Q) = P(Q, Q)`` of the gauge-fixed system.

    The four lines are assembled from ``(q1, q2)`` alone:

        d^+ q1 + (c/2 [A^A] - c/2 [phi^phi] - s [A^phi])^+
        d^* q1 - s [A, *phi]
        d^- q2 + (s/2 [A^A] - s/2 [phi^phi] + c [A^phi])^-
        d^* q2 + c [A, *phi]

    with ``A = c q1 + s q2`` and ``phi = -s q1 + c q2`` inside the quadratic
    terms.  ``repackaging_defect`` compares them against ``r_plus``,
    ``c d^*A - s mu``, ``r_minus`` and ``s d^*A + c mu``.
    """
    _require_dim4(cfg.grid)
    c, s = np.cos(theta), np.sin(theta)
    q1 = c * cfg.A - s * cfg.phi
    q2 = s * cfg.A + c * cfg.phi

    A = c * q1 + s * q2
    phi = -s * q1 + c * q2
    half_aa = 0.5 * wedge_bracket(A, A)
    half_pp = 0.5 * wedge_bracket(phi, phi)
    a_phi = wedge_bracket(A, phi)
    a_dot_phi = contract_dot(A, phi)
    lines = (
        project_pm(covariant_d(None, q1, scheme) + c * half_aa - c * half_pp - s * a_phi, 1),
        covariant_codiff(None, q1, scheme) - s * a_dot_phi,
        project_pm(covariant_d(None, q2, scheme) + s * half_aa - s * half_pp + c * a_phi, -1),
        covariant_codiff(None, q2, scheme) + c * a_dot_phi,
    )

    res = kw_residual(cfg, theta, scheme)
    gauge = covariant_codiff(None, cfg.A, scheme)
    expected = (
        res.r_plus,
        c * gauge - s * res.r_moment,
        res.r_minus,
        s * gauge + c * res.r_moment,
    )
    defect = max((line - exp).norm() for line, exp in zip(lines, expected))
    return QSplit(float(theta), q1, q2, lines, defect)

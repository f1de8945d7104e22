"""Covariant exterior calculus on the periodic grid.

Derivatives are central differences.  Because the stencil is antisymmetric on
a periodic grid, summation by parts is exact: ``covariant_codiff`` is the exact
L^2 adjoint of ``covariant_d`` (for real or complex A with an ad-invariant
pairing), not just an approximation of it.

Conventions, for one-forms ``a, b``:

* ``[a ^ b]_jk = [a_j, b_k] - [a_k, b_j]``, so ``1/2 [phi ^ phi]_jk = [phi_j, phi_k]``
* ``F_A = dA + 1/2 [A ^ A]``, i.e. ``F_jk = d_j A_k - d_k A_j + [A_j, A_k]``
* ``F_C = F_A - 1/2 [phi ^ phi] + i D_A phi``
* ``D_A^* w = -sum_j D_j w_{j...}``
"""

from dataclasses import dataclass

import numpy as np

from . import _indices
from .lattice import AdjointForm, _check_same_grid
from .lie import bracket, trace_form

__all__ = [
    "CENTRAL2",
    "CENTRAL4",
    "DifferenceScheme",
    "bianchi_defect",
    "bracket_contract",
    "complex_curvature",
    "contract_dot",
    "covariant_codiff",
    "covariant_d",
    "curvature",
    "flat_part",
    "hodge_star",
    "nabla",
    "project_pm",
    "rough_laplacian",
    "star_data",
    "wedge_bracket",
    "wedge_trace",
]


@dataclass(frozen=True)
class DifferenceScheme:
    """Antisymmetric periodic first-derivative stencil.

    ``offsets[i]`` is paired with ``weights[i]``; the stencil reads
    ``sum_i w_i f(x + o_i h) / h``.
    """

    name: str
    order: int
    offsets: tuple
    weights: tuple

    def apply(self, arr, axis, h):
        out = None
        for o, w in zip(self.offsets, self.weights):
            term = w * np.roll(arr, -o, axis=axis)
            out = term if out is None else out + term
        return out / h


CENTRAL2 = DifferenceScheme("central-2", 2, (1, -1), (0.5, -0.5))
CENTRAL4 = DifferenceScheme("central-4", 4, (2, 1, -1, -2), (-1 / 12, 8 / 12, -8 / 12, 1 / 12))
SCHEMES = {s.name: s for s in (CENTRAL2, CENTRAL4)}


def _scheme(scheme):
    if scheme is None:
        return CENTRAL2
    if isinstance(scheme, str):
        try:
            return SCHEMES[scheme]
        except KeyError:
            raise ValueError(f"unknown stencil {scheme!r}; choose from {sorted(SCHEMES)}") from None
    return scheme


def _result_dtype(*arrays):
    return np.complex128 if any(np.iscomplexobj(a) for a in arrays) else np.float64


def covariant_d(A, w, scheme=None):
    """``D_A w`` for a p-form ``w``; ``A=None`` gives the plain exterior derivative.

    ``A`` may itself be complex (e.g. ``A + i phi``), giving ``d w + [a ^ w]``.
    """
    grid, p = w.grid, w.degree
    if p >= grid.dim:
        raise ValueError(f"degree overflow: cannot differentiate a {p}-form in dim {grid.dim}")
    if A is not None:
        _check_same_grid(A.grid, grid)
    s = _scheme(scheme)
    h = grid.spacing
    table = _indices.d_table(grid.dim, p)
    arrays = (w.data,) if A is None else (w.data, A.data)
    out = np.zeros((len(table), *grid.shape, 3), _result_dtype(*arrays))
    for K, terms in enumerate(table):
        for axis, slot, sign in terms:
            comp = w.data[slot]
            term = s.apply(comp, axis, h)
            if A is not None:
                term = term + bracket(A.data[axis], comp)
            if sign > 0:
                out[K] += term
            else:
                out[K] -= term
    return AdjointForm(grid, p + 1, out)


def covariant_codiff(A, w, scheme=None):
    """``D_A^* w = -sum_j D_j w_{j...}``: the exact discrete adjoint of :func:`covariant_d`."""
    grid, p = w.grid, w.degree
    if p < 1:
        raise ValueError("degree underflow: cannot take the codifferential of a 0-form")
    if A is not None:
        _check_same_grid(A.grid, grid)
    s = _scheme(scheme)
    h = grid.spacing
    table = _indices.codiff_table(grid.dim, p)
    arrays = (w.data,) if A is None else (w.data, A.data)
    out = np.zeros((len(table), *grid.shape, 3), _result_dtype(*arrays))
    for I, terms in enumerate(table):
        for axis, slot, sign in terms:
            comp = w.data[slot]
            term = s.apply(comp, axis, h)
            if A is not None:
                term = term + bracket(A.data[axis], comp)
            if sign > 0:
                out[I] -= term
            else:
                out[I] += term
    return AdjointForm(grid, p - 1, out)


def wedge_bracket(alpha, beta):
    """``[alpha ^ beta]`` with the pointwise Lie bracket."""
    _check_same_grid(alpha.grid, beta.grid)
    grid = alpha.grid
    table = _indices.wedge_table(grid.dim, alpha.degree, beta.degree)
    out = np.zeros((len(table), *grid.shape, 3), _result_dtype(alpha.data, beta.data))
    for K, terms in enumerate(table):
        for i, j, sign in terms:
            out[K] += sign * bracket(alpha.data[i], beta.data[j])
    return AdjointForm(grid, alpha.degree + beta.degree, out)


def wedge_trace(alpha, beta):
    """Densities of ``tr(alpha ^ beta)``, shape ``(ncomp, *sites)``.

    ``tr`` is :func:`kwtorus.lie.trace_form`.  For a top-degree result the single
    component is the coefficient of ``dx^1 ^ ... ^ dx^dim``.
    """
    _check_same_grid(alpha.grid, beta.grid)
    grid = alpha.grid
    table = _indices.wedge_table(grid.dim, alpha.degree, beta.degree)
    out = np.zeros((len(table), *grid.shape), _result_dtype(alpha.data, beta.data))
    for K, terms in enumerate(table):
        for i, j, sign in terms:
            out[K] += sign * trace_form(alpha.data[i], beta.data[j])
    return out


def _half_bracket_square(w):
    # 1/2 [w ^ w]_jk = [w_j, w_k]
    grid = w.grid
    pairs = _indices.multi_indices(grid.dim, 2)
    out = np.empty((len(pairs), *grid.shape, 3), w.data.dtype)
    for K, (j, k) in enumerate(pairs):
        out[K] = bracket(w.data[j], w.data[k])
    return AdjointForm(grid, 2, out)


def curvature(A, scheme=None):
    """``F_jk = d_j A_k - d_k A_j + [A_j, A_k]``."""
    return covariant_d(None, A, scheme) + _half_bracket_square(A)


def flat_part(cfg, scheme=None):
    """``F_A - 1/2 [phi ^ phi]``, the real part of the complex curvature."""
    return covariant_d(None, cfg.A, scheme) + AdjointForm(
        cfg.grid, 2, _half_bracket_square(cfg.A).data - _half_bracket_square(cfg.phi).data
    )


def complex_curvature(cfg, scheme=None):
    """``F_C = F_A - 1/2 [phi ^ phi] + i D_A phi``."""
    x = flat_part(cfg, scheme)
    y = covariant_d(cfg.A, cfg.phi, scheme)
    return AdjointForm(cfg.grid, 2, x.data + 1j * y.data)


def star_data(data, dim, p):
    """Hodge star on stacked component data of any site shape."""
    table = _indices.star_table(dim, p)
    out = np.empty((len(table), *data.shape[1:]), data.dtype)
    for J, (I, sign) in enumerate(table):
        out[J] = sign * data[I]
    return out


def hodge_star(w):
    """Flat Euclidean Hodge star, ``*dx^I = sign(I, J) dx^J``."""
    return AdjointForm(w.grid, w.grid.dim - w.degree, star_data(w.data, w.grid.dim, w.degree))


def project_pm(T, sign):
    """``T^{+/-} = 1/2 (T +/- *conj(T))`` on two-forms in dimension four."""
    if T.grid.dim != 4 or T.degree != 2:
        raise ValueError("project_pm needs a two-form in dimension 4")
    if sign not in (1, -1, "+", "-"):
        raise ValueError("sign must be +1 or -1")
    sign = {"+": 1, "-": -1}.get(sign, sign)
    sc = star_data(np.conj(T.data) if T.is_complex else T.data, 4, 2)
    return AdjointForm(T.grid, 2, 0.5 * (T.data + sign * sc))


def bianchi_defect(cfg, scheme=None):
    """``(D_A + i phi) F_C``: zero in the continuum, O(h^2) on the grid."""
    return covariant_d(cfg.connection(), complex_curvature(cfg, scheme), scheme)


def nabla(A, phi, scheme=None):
    """Full covariant derivative: array ``out[j, k] = d_j phi_k + [A_j, phi_k]``."""
    s = _scheme(scheme)
    grid = phi.grid
    dim = grid.dim
    out = np.empty((dim, dim, *grid.shape, 3), _result_dtype(A.data, phi.data))
    for j in range(dim):
        for k in range(dim):
            out[j, k] = s.apply(phi.data[k], j, grid.spacing) + bracket(A.data[j], phi.data[k])
    return out


def rough_laplacian(A, phi, scheme=None):
    """``nabla_A^* nabla_A phi = -sum_j D_j D_j phi`` (adjoint of D_j is -D_j)."""
    s = _scheme(scheme)
    grid = phi.grid
    first = nabla(A, phi, scheme)
    out = np.zeros_like(phi.data, dtype=first.dtype)
    for j in range(grid.dim):
        for k in range(grid.dim):
            out[k] -= s.apply(first[j, k], j, grid.spacing) + bracket(A.data[j], first[j, k])
    return AdjointForm(grid, phi.degree, out)


def _full_two_form(S):
    # S_jk for all ordered pairs, zeros on the diagonal
    dim = S.grid.dim
    imap = _indices.index_map(dim, 2)

    def get(j, k):
        if j == k:
            return None
        if j < k:
            return S.data[imap[(j, k)]], 1
        return S.data[imap[(k, j)]], -1

    return get


def bracket_contract(S, phi):
    """``[S, phi]'_j = sum_k [S_jk, phi_k]`` for a two-form S and one-form phi."""
    _check_same_grid(S.grid, phi.grid)
    dim = S.grid.dim
    get = _full_two_form(S)
    out = np.zeros((dim, *S.grid.shape, 3), _result_dtype(S.data, phi.data))
    for j in range(dim):
        for k in range(dim):
            entry = get(j, k)
            if entry is None:
                continue
            comp, sign = entry
            out[j] += sign * bracket(comp, phi.data[k])
    return AdjointForm(S.grid, 1, out)


def contract_dot(A, phi):
    """``[A, *phi] = -sum_j [A_j, phi_j]``, so that ``D_A^* phi = d^* phi + [A, *phi]``."""
    _check_same_grid(A.grid, phi.grid)
    out = -np.sum(bracket(A.data, phi.data), axis=0)
    return AdjointForm(A.grid, 0, out[None])

"""Gauge transformations and Coulomb gauge fixing.

``A -> g A g^{-1} - (dg) g^{-1}`` uses the same central difference as every
other derivative, so gauge covariance of curvature-type quantities holds to
O(h^2), not exactly.  The discrete Maurer-Cartan form ``(dg) g^{-1}`` is not
exactly Lie-algebra valued either; it is projected (onto su(2) for real
gauge fields, onto the traceless part for complex ones).
"""

import logging

import numpy as np

from .calculus import _scheme, covariant_codiff
from .lattice import AdjointForm, Configuration, GaugeField, _check_same_grid
from .lie import adjoint_matrix, exp_map, from_matrix

__all__ = [
    "GaugeFixingError",
    "apply_gauge",
    "coulomb_gauge_fix",
    "gauge_from_algebra",
    "maurer_cartan",
    "transform_connection",
]

logger = logging.getLogger(__name__)


class GaugeFixingError(RuntimeError):
    pass


def gauge_from_algebra(chi):
    """Pointwise ``exp`` of a 0-form; complex coefficients give an SL(2, C) field."""
    if chi.degree != 0:
        raise ValueError("gauge generators are 0-forms")
    return GaugeField(chi.grid, exp_map(chi.data[0]), complex_=chi.is_complex)


def maurer_cartan(g, scheme=None, real=True):
    """Coefficients of ``(d_j g) g^{-1}``, shape ``(dim, *sites, 3)``."""
    s = _scheme(scheme)
    grid = g.grid
    ginv = np.linalg.inv(g.matrices)
    out = []
    for j in range(grid.dim):
        dg = s.apply(g.matrices, j, grid.spacing)
        out.append(from_matrix(dg @ ginv, real=real))
    return np.stack(out)


def transform_connection(a, g, scheme=None):
    """Gauge action on a (real or complex) connection one-form."""
    _check_same_grid(a.grid, g.grid)
    real = not g.complex_ and not a.is_complex
    r = adjoint_matrix(g.matrices)
    if real:
        r = r.real
    rotated = np.einsum("...ab,j...b->j...a", r, a.data)
    return AdjointForm(a.grid, 1, rotated - maurer_cartan(g, scheme, real=real))


def apply_gauge(cfg, g, mode="real", scheme=None):
    """``g . (A, phi)``.

    ``mode="real"``: ``A -> g A g^-1 - (dg) g^-1`` and ``phi -> g phi g^-1``.
    ``mode="complex"``: ``A + i phi`` is transformed as one complex connection.
    """
    _check_same_grid(cfg.grid, g.grid)
    if mode == "real":
        if g.complex_:
            raise ValueError("real gauge action needs an SU(2) gauge field")
        r = adjoint_matrix(g.matrices).real
        A = transform_connection(cfg.A, g, scheme)
        phi = AdjointForm(cfg.grid, 1, np.einsum("...ab,j...b->j...a", r, cfg.phi.data))
        return Configuration(A, phi)
    if mode == "complex":
        cg = g if g.complex_ else GaugeField(g.grid, g.matrices, complex_=True)
        return Configuration.from_connection(transform_connection(cfg.connection(), cg, scheme))
    raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")


def _laplace_symbol(grid, scheme):
    # symbol of d^*d = -sum_j d_j d_j for the antisymmetric stencil
    s = _scheme(scheme)
    k = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.spacing)
    sig = sum(w * np.sin(o * k * grid.spacing) for o, w in zip(s.offsets, s.weights)) / grid.spacing
    sig2 = sig**2
    total = np.zeros(grid.shape)
    for j in range(grid.dim):
        shape = [1] * grid.dim
        shape[j] = grid.n
        total = total + sig2.reshape(shape)
    return total


def _solve_laplace(div, symbol):
    out = np.empty_like(div)
    mask = symbol > 1e-12 * symbol.max()
    inv = np.zeros_like(symbol)
    inv[mask] = 1 / symbol[mask]
    for a in range(div.shape[-1]):
        out[..., a] = np.fft.ifftn(np.fft.fftn(div[..., a]) * inv).real
    return out


def coulomb_gauge_fix(A, tol=1e-10, max_iter=30, scheme=None):
    """Iterate to a gauge with ``||d^* A'|| <= tol``.

    Each step solves ``d^*d chi = d^*A`` by FFT and applies ``exp(chi)``; to
    first order this removes ``d^*A`` entirely.  Returns the accumulated gauge
    field and the transformed connection.  Raises :class:`GaugeFixingError`
    when the iteration does not reach ``tol`` (the field is too large for it).
    """
    grid = A.grid
    symbol = _laplace_symbol(grid, scheme)
    total = GaugeField.identity(grid)
    div_norm = covariant_codiff(None, A, scheme).norm()
    start = div_norm
    for it in range(max_iter + 1):
        if div_norm <= tol:
            logger.debug("coulomb gauge reached after %d iterations", it)
            return total, A
        if it == max_iter:
            break
        div = covariant_codiff(None, A, scheme)
        chi = AdjointForm(grid, 0, _solve_laplace(div.data[0], symbol)[None])
        g = gauge_from_algebra(chi)
        A = transform_connection(A, g, scheme)
        total = g @ total
        div_norm = covariant_codiff(None, A, scheme).norm()
        if not np.isfinite(div_norm) or div_norm > 1e6 * max(start, 1.0):
            break
    raise GaugeFixingError(
        f"gauge fixing did not converge (field too large): ||d*A|| = {div_norm:.3g} "
        f"after {max_iter} iterations"
    )

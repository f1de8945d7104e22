"""su(2), SU(2) and their complexifications.

Algebra elements are stored as coefficient vectors in the basis
``e_a = -(i/2) sigma_a``, which satisfies ``[e_a, e_b] = eps_abc e_c``.  A real
vector of length 3 is an element of su(2); a complex vector is an element of
``su(2) (x) C = sl(2, C)``, its real and imaginary parts being the ``re`` and
``im`` components.  All functions broadcast over leading axes, so a whole grid
of values is just an array of shape ``(..., 3)``.

Group elements are 2x2 complex matrices, again with arbitrary leading axes.

Normalization: ``pairing(X, Y) = -2 tr(XY)`` in the fundamental representation,
which makes ``{e_a}`` orthonormal.  The ``trace_form`` used in wedge/trace
identities is ``-pairing``, so that ``|X|^2 = -trace_form(X, conj(X))``.
"""

import numpy as np

__all__ = [
    "BASIS",
    "SIGMA",
    "DegenerateGroupElementError",
    "adjoint_action",
    "adjoint_matrix",
    "bracket",
    "check_group_element",
    "exp_map",
    "from_matrix",
    "norm2",
    "pairing",
    "to_matrix",
    "trace_form",
]

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

#: Coefficient vectors of e_1, e_2, e_3.
BASIS = np.eye(3)

_GROUP_TOL = 1e-12


class DegenerateGroupElementError(ValueError):
    pass


def bracket(x, y):
    """Lie bracket; with the chosen basis this is the cross product."""
    return np.cross(x, y)


def pairing(x, y):
    """Symmetric, complex-bilinear invariant form ``-2 tr(XY)``."""
    return np.sum(np.asarray(x) * np.asarray(y), axis=-1)


def trace_form(x, y):
    """``-pairing``: plays the role of ``tr`` in wedge-trace identities."""
    return -pairing(x, y)


def norm2(x):
    """Hermitian squared norm ``pairing(X, conj X)``, summed over the last axis."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return np.sum(x.real**2 + x.imag**2, axis=-1)
    return np.sum(x * x, axis=-1)


def to_matrix(x):
    """Coefficients ``(..., 3)`` -> 2x2 matrices ``(..., 2, 2)``."""
    x = np.asarray(x)
    return -0.5j * np.einsum("...a,aij->...ij", x, SIGMA)


def from_matrix(m, real=False):
    """Inverse of :func:`to_matrix` on traceless matrices.

    The trace part of ``m`` is discarded.  With ``real=True`` the result is
    projected onto su(2) (the anti-Hermitian part).
    """
    c = 1j * np.einsum("...ij,aji->...a", m, SIGMA)
    if real:
        return c.real.copy()
    return c


def exp_map(x):
    """Closed-form exponential of (complex) algebra coefficients.

    ``exp(X) = cos(w) I + sin(w)/w X`` with ``w = sqrt(x . x) / 2``, using the
    fact that ``X^2 = -w^2 I`` for every element of sl(2, C).
    """
    x = np.asarray(x)
    if np.iscomplexobj(x):
        w = np.sqrt(pairing(x, x).astype(complex)) / 2
    else:
        w = np.sqrt(pairing(x, x)) / 2
    # sin(w)/w = sinc(w/pi) in numpy's convention; works for complex w
    cos_w = np.cos(w)
    sinc_w = np.sinc(w / np.pi)
    eye = np.eye(2, dtype=complex)
    return cos_w[..., None, None] * eye + sinc_w[..., None, None] * to_matrix(x)


def check_group_element(g, real=True, tol=_GROUP_TOL):
    """Raise unless every matrix in ``g`` is in SU(2) (``real``) or SL(2, C)."""
    g = np.asarray(g)
    if g.shape[-2:] != (2, 2):
        raise ValueError(f"group elements must be 2x2 matrices, got shape {g.shape}")
    det = np.linalg.det(g)
    if not np.all(np.isfinite(g)) or np.max(np.abs(det), initial=0.0) < tol:
        raise DegenerateGroupElementError("degenerate group element")
    if np.max(np.abs(det - 1), initial=0.0) > tol:
        raise DegenerateGroupElementError(
            f"group element has det != 1 (max deviation {np.max(np.abs(det - 1)):.3g})"
        )
    if real:
        gg = g @ np.conj(np.swapaxes(g, -1, -2))
        if np.max(np.abs(gg - np.eye(2)), initial=0.0) > tol:
            raise ValueError("group element is not unitary")


def _inverse_sl2(g):
    # inverse of a det-1 2x2 matrix is its adjugate
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    return inv


def adjoint_matrix(g):
    """3x3 matrix ``R`` of ``X -> g X g^{-1}`` on coefficients, ``(..., 3, 3)``.

    Real (orthogonal) for ``g`` in SU(2), complex orthogonal for SL(2, C).
    """
    g = np.asarray(g, dtype=complex)
    ginv = _inverse_sl2(g)
    # R[:, b] = coefficients of g e_b g^{-1}
    e = to_matrix(BASIS)  # (3, 2, 2)
    conj = np.einsum("...ij,bjk,...kl->...bil", g, e, ginv)
    return np.swapaxes(from_matrix(conj), -1, -2)


def adjoint_action(g, x):
    """``g X g^{-1}`` on coefficient vectors.

    Raises :class:`DegenerateGroupElementError` for singular ``g``.
    """
    g = np.asarray(g, dtype=complex)
    det = np.linalg.det(g)
    if np.min(np.abs(det), initial=np.inf) < _GROUP_TOL:
        raise DegenerateGroupElementError("degenerate group element")
    # rescale to det 1; conjugation is insensitive to the scale
    g = g / np.sqrt(det)[..., None, None]
    r = adjoint_matrix(g)
    out = np.einsum("...ab,...b->...a", r, np.asarray(x))
    if np.isrealobj(x) and np.allclose(r.imag, 0.0, atol=1e-14):
        return out.real.copy()
    return out

"""Flat Kahler structure on configuration space and the moment map.

Sign conventions are fixed so that the Hamiltonian of the real gauge action
generates exactly ``(delta A, delta phi) = (D_A V, [phi, V])``:

* ``omega(B1 + i psi1, B2 + i psi2) = <B1, psi2> - <B2, psi1>``
* ``mu(A, phi) = D_A^* phi``
* ``H(A, phi; V) = int tr(mu . V) = -<mu, V>``

and then ``dH(t) = omega(t, (D_A V, [phi, V]))`` holds exactly on the grid.
"""

from .calculus import contract_dot, covariant_codiff, covariant_d
from .lattice import AdjointForm, TangentPair, _check_same_grid
from .lie import bracket

__all__ = [
    "TangentPair",
    "gauge_action",
    "hamiltonian",
    "hamiltonian_variation",
    "kahler_pairing",
    "moment_identity_check",
    "moment_map",
]


def kahler_pairing(t1, t2):
    _check_same_grid(t1.grid, t2.grid)
    return t1.B.inner(t2.psi) - t2.B.inner(t1.psi)


def moment_map(cfg, scheme=None):
    return covariant_codiff(cfg.A, cfg.phi, scheme)


def hamiltonian(cfg, V, scheme=None):
    return -moment_map(cfg, scheme).inner(V)


def hamiltonian_variation(cfg, V, t, scheme=None):
    """Exact linearization of :func:`hamiltonian` along ``t``."""
    dmu = covariant_codiff(cfg.A, t.psi, scheme) + contract_dot(t.B, cfg.phi)
    return -dmu.inner(V)


def gauge_action(cfg, V, scheme=None):
    """Infinitesimal real gauge action ``[D_A + i phi, V] = D_A V + i [phi, V]``."""
    if V.degree != 0:
        raise ValueError("gauge generators are 0-forms")
    dA = covariant_d(cfg.A, V, scheme)
    dphi = AdjointForm(cfg.grid, 1, bracket(cfg.phi.data, V.data[0][None]))
    return TangentPair(dA, dphi)


def moment_identity_check(cfg, V, t, scheme=None):
    """``|dH(t) - omega(t, action of V)|``."""
    lhs = hamiltonian_variation(cfg, V, t, scheme)
    rhs = kahler_pairing(t, gauge_action(cfg, V, scheme))
    return abs(lhs - rhs)

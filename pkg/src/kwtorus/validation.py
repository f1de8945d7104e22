"""Input coercion shared by the estimator wrappers and the command line."""

import math

import numpy as np

from .lattice import AdjointForm, Configuration, TorusGrid

__all__ = ["check_configuration", "check_connection", "check_theta"]


def _grid_from_sites(dim, sites, length):
    n = sites[0]
    if len(sites) != dim or any(s != n for s in sites):
        raise ValueError(f"expected {dim} equal site axes, got shape {sites}")
    return TorusGrid(dim, n, length)


def check_connection(X, length=2 * math.pi):
    """A real one-form: an :class:`AdjointForm` or an array ``(dim, n, ..., n, 3)``."""
    if isinstance(X, AdjointForm):
        form = X
    else:
        arr = np.asarray(X)
        if arr.ndim < 2 or arr.shape[-1] != 3:
            raise ValueError(f"a connection array has shape (dim, n, ..., n, 3), got {arr.shape}")
        grid = _grid_from_sites(arr.shape[0], arr.shape[1:-1], length)
        form = AdjointForm(grid, 1, arr)
    if form.degree != 1 or form.is_complex:
        raise ValueError("expected a real one-form")
    if not np.all(np.isfinite(form.data)):
        raise ValueError("connection contains non-finite values")
    return form


def check_configuration(X, dim=None, length=2 * math.pi):
    """Coerce ``X`` to a :class:`Configuration`.

    Accepted: a Configuration; a real array ``(2, dim, n, ..., n, 3)`` holding
    ``A`` and ``phi``; or a complex array ``(dim, n, ..., n, 3)`` holding
    ``A + i phi``.
    """
    if isinstance(X, Configuration):
        cfg = X
    else:
        arr = np.asarray(X)
        if np.iscomplexobj(arr):
            if arr.ndim < 2 or arr.shape[-1] != 3:
                raise ValueError(f"complex connection must be (dim, n, ..., n, 3), got {arr.shape}")
            grid = _grid_from_sites(arr.shape[0], arr.shape[1:-1], length)
            cfg = Configuration(AdjointForm(grid, 1, arr.real.copy()), AdjointForm(grid, 1, arr.imag.copy()))
        else:
            if arr.ndim < 3 or arr.shape[0] != 2 or arr.shape[-1] != 3:
                raise ValueError(f"configuration array must be (2, dim, n, ..., n, 3), got {arr.shape}")
            grid = _grid_from_sites(arr.shape[1], arr.shape[2:-1], length)
            cfg = Configuration(AdjointForm(grid, 1, arr[0]), AdjointForm(grid, 1, arr[1]))
    if dim is not None and cfg.grid.dim != dim:
        raise ValueError(f"expected a configuration on a {dim}-torus, got dim {cfg.grid.dim}")
    if not (np.all(np.isfinite(cfg.A.data)) and np.all(np.isfinite(cfg.phi.data))):
        raise ValueError("configuration contains non-finite values")
    return cfg


def check_theta(theta):
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    return theta

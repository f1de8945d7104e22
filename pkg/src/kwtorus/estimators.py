"""scikit-learn style wrappers around gauge fixing, the KW minimizer and the CS flow.

Each "sample" is one whole field configuration, so these are not meant for
batched tabular data; they give the algorithms the familiar
``get_params`` / ``fit`` / ``transform`` surface and make them clonable.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .flow import flow_diagnostics, integrate_flow
from .gauge import coulomb_gauge_fix
from .kw import kw_residual
from .lattice import AdjointForm, Configuration
from .lie import adjoint_matrix
from .solver import minimize_kw
from .validation import check_configuration, check_connection, check_theta

__all__ = ["ChernSimonsFlow", "CoulombGauge", "KWMinimizer"]


class CoulombGauge(TransformerMixin, BaseEstimator):
    """Move a connection (or a whole configuration) into Coulomb gauge ``d^*A = 0``.

    Stateless: ``fit`` only validates.  ``transform`` of a configuration also
    conjugates ``phi`` by the same gauge field.
    """

    def __init__(self, tol=1e-10, max_iter=30, stencil="central-2"):
        self.tol = tol
        self.max_iter = max_iter
        self.stencil = stencil

    def fit(self, X, y=None):
        self._coerce(X)
        self.fitted_ = True
        return self

    @staticmethod
    def _coerce(X):
        if isinstance(X, Configuration) or (isinstance(X, np.ndarray) and X.ndim >= 3 and X.shape[0] == 2):
            return check_configuration(X)
        return check_connection(X)

    def transform(self, X):
        check_is_fitted(self)
        X = self._coerce(X)
        A = X.A if isinstance(X, Configuration) else X
        g, fixed = coulomb_gauge_fix(A, self.tol, self.max_iter, self.stencil)
        if not isinstance(X, Configuration):
            return fixed
        r = adjoint_matrix(g.matrices).real
        phi = AdjointForm(X.grid, 1, np.einsum("...ab,j...b->j...a", r, X.phi.data))
        return Configuration(fixed, phi)


class KWMinimizer(BaseEstimator):
    """Drive the Kapustin-Witten residual of a 4-d configuration below ``tol``."""

    def __init__(self, theta=math.pi / 4, tol=1e-6, max_iter=5000, step0=0.1,
                 step_rule="armijo", stencil="central-2"):
        self.theta = theta
        self.tol = tol
        self.max_iter = max_iter
        self.step0 = step0
        self.step_rule = step_rule
        self.stencil = stencil

    def fit(self, X, y=None):
        cfg = check_configuration(X, dim=4)
        self.configuration_, self.log_ = minimize_kw(
            cfg,
            check_theta(self.theta),
            step_rule=self.step_rule,
            tol=self.tol,
            max_iter=self.max_iter,
            step0=self.step0,
            scheme=self.stencil,
        )
        self.n_iter_ = self.log_.n_iter
        self.residual_ = float(self.log_.values[-1])
        self.status_ = self.log_.status
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).configuration_

    def score(self, X, y=None):
        """Negative residual ``-R(X)`` (larger is better)."""
        cfg = check_configuration(X, dim=4)
        return -kw_residual(cfg, check_theta(self.theta), self.stencil).value


class ChernSimonsFlow(BaseEstimator):
    """Integrate the ``Re(e^{2i theta} CS)`` flow of a 3-d configuration to ``t_final``.

    ``dt=None`` picks the largest step ``<= 0.2 h`` that divides ``t_final``.
    """

    def __init__(self, theta=0.0, t_final=0.5, dt=None, method="rk4", stencil="central-2"):
        self.theta = theta
        self.t_final = t_final
        self.dt = dt
        self.method = method
        self.stencil = stencil

    def fit(self, X, y=None):
        cfg = check_configuration(X, dim=3)
        dt = self.dt if self.dt is not None else 0.2 * cfg.grid.spacing
        steps = max(1, math.ceil(self.t_final / dt - 1e-12))
        state = integrate_flow(cfg, check_theta(self.theta), self.t_final / steps, steps,
                               method=self.method, scheme=self.stencil)
        self.state_ = state
        self.history_ = np.array(state.history, dtype=float)
        self.diagnostics_ = flow_diagnostics(state, self.stencil)
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).state_.cfg

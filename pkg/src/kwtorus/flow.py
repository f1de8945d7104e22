"""Gradient flow of ``Re(e^{2i theta} CS)`` on a 3-torus.

In temporal gauge (``A_t = 0``, ``phi_t = 0``) the flow reads

    dA/dt = *Re(e^{2i theta} F_C),    dphi/dt = -*Im(e^{2i theta} F_C)

with the three-dimensional star.  With the Chern-Simons normalization of
:func:`kwtorus.functionals.chern_simons` this is steepest descent:
``d/dt Re(e^{2i theta} CS) = -||rhs||^2``.
"""

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import _indices
from .calculus import complex_curvature, covariant_codiff, star_data
from .functionals import chern_simons, chern_simons_variation
from .lattice import AdjointForm, Configuration, TangentPair

__all__ = [
    "FlowDiagnostics",
    "FlowDivergedError",
    "FlowRecord",
    "FlowState",
    "flow_diagnostics",
    "flow_rhs",
    "integrate_flow",
    "reconstruct_spacetime_curvature",
]

logger = logging.getLogger(__name__)


class FlowDivergedError(RuntimeError):
    """Raised when a field norm exceeds the blowup threshold; carries the partial state."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


class FlowRecord(NamedTuple):
    t: float
    re_cs: float
    im_cs: float
    grad2: float
    mu_norm: float
    fc2: float
    pairing: float


@dataclass
class FlowState:
    """Current configuration, time and per-step history of a flow run.

    ``trajectory`` holds ``(t, cfg)`` snapshots when the run keeps them;
    they are needed for the spacetime reconstruction only.
    """

    cfg: Configuration
    theta: float
    t: float = 0.0
    history: list = field(default_factory=list)
    trajectory: list | None = None

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(FlowRecord._fields)
            for rec in self.history:
                writer.writerow([repr(float(v)) for v in rec])


def _require_dim3(grid):
    if grid.dim != 3:
        raise ValueError(f"the flow lives on a 3-torus, got dim {grid.dim}")


def flow_rhs(cfg, theta, scheme=None):
    """``(dA/dt, dphi/dt) = (*Re G, -*Im G)`` with ``G = e^{2i theta} F_C``."""
    _require_dim3(cfg.grid)
    g = np.exp(2j * theta) * complex_curvature(cfg, scheme).data
    star = star_data(g, 3, 2)
    return TangentPair(AdjointForm(cfg.grid, 1, star.real.copy()), AdjointForm(cfg.grid, 1, -star.imag))


def _record(cfg, t, theta, scheme):
    rot = np.exp(2j * theta)
    cs = rot * chern_simons(cfg, scheme)
    rhs = flow_rhs(cfg, theta, scheme)
    pairing = (rot * chern_simons_variation(cfg, rhs, scheme)).real
    return FlowRecord(
        t=float(t),
        re_cs=cs.real,
        im_cs=cs.imag,
        grad2=rhs.norm2(),
        mu_norm=covariant_codiff(cfg.A, cfg.phi, scheme).norm(),
        fc2=complex_curvature(cfg, scheme).norm2(),
        pairing=float(pairing),
    )


def _step(cfg, theta, dt, method, scheme):
    f = lambda c: flow_rhs(c, theta, scheme)  # noqa: E731
    if method == "euler":
        return cfg.shifted(f(cfg), dt)
    k1 = f(cfg)
    k2 = f(cfg.shifted(k1, dt / 2))
    k3 = f(cfg.shifted(k2, dt / 2))
    k4 = f(cfg.shifted(k3, dt))
    return cfg.shifted(k1 + 2.0 * k2 + 2.0 * k3 + k4, dt / 6)


def integrate_flow(
    state0,
    theta,
    dt,
    steps,
    method="rk4",
    keep_trajectory=False,
    blowup_factor=1e3,
    cfl=0.2,
    scheme=None,
):
    """Advance the flow by ``steps`` explicit steps of size ``dt``.

    ``state0`` may be a :class:`Configuration` (time 0) or a previous
    :class:`FlowState`.  ``dt`` must not exceed ``cfl * h``.  When the field
    norm exceeds ``blowup_factor`` times its initial value the run stops with
    :class:`FlowDivergedError`, whose ``state`` holds the history so far.
    """
    if method not in ("rk4", "euler"):
        raise ValueError(f"unknown time stepper {method!r}")
    if not 0 < cfl <= 0.2:
        raise ValueError("cfl factor must lie in (0, 0.2]")
    if isinstance(state0, Configuration):
        state0 = FlowState(state0, float(theta))
    elif state0.theta != theta:
        raise ValueError("cannot continue a flow run with a different theta")
    cfg = state0.cfg
    _require_dim3(cfg.grid)
    if not 0 < dt <= cfl * cfg.grid.spacing:
        raise ValueError(f"time step {dt} violates dt <= {cfl} h = {cfl * cfg.grid.spacing:.4g}")

    history = list(state0.history) or [_record(cfg, state0.t, theta, scheme)]
    trajectory = None
    if keep_trajectory:
        trajectory = list(state0.trajectory or [(state0.t, cfg)])
    limit = blowup_factor * cfg.norm()
    state = replace(state0, history=history, trajectory=trajectory)
    t0 = state0.t
    for i in range(1, steps + 1):
        new = _step(cfg, theta, dt, method, scheme)
        t = t0 + i * dt
        size = new.norm()
        if not np.isfinite(size) or size > limit:
            state.cfg, state.t = cfg, t - dt
            raise FlowDivergedError(f"flow diverged at t={t:.6g} (norm {size:.3g})", state)
        cfg = new
        history.append(_record(cfg, t, theta, scheme))
        if trajectory is not None:
            trajectory.append((t, cfg))
    state.cfg, state.t = cfg, t0 + steps * dt
    return state


def reconstruct_spacetime_curvature(state, scheme=None):
    """4-d ``e^{i theta} F_C`` at interior trajectory snapshots, time coordinate first.

    ``F_{t j} = d a_j / dt`` with ``a = A + i phi`` (temporal gauge), taken by
    central differences of the stored snapshots; spatial components are the
    3-d complex curvature.  Returns a list of ``(t, data)`` with data shape
    ``(6, *sites, 3)``.
    """
    traj = state.trajectory
    if traj is None or len(traj) < 3:
        raise ValueError("reconstruction needs a stored trajectory of at least 3 snapshots")
    rot = np.exp(1j * state.theta)
    out = []
    for (t0, c0), (t1, c1), (t2, c2) in zip(traj, traj[1:], traj[2:]):
        adot = (c2.connection().data - c0.connection().data) / (t2 - t0)
        fc = complex_curvature(c1, scheme).data
        out.append((t1, rot * np.concatenate([adot, fc])))
    return out


@dataclass(frozen=True)
class FlowDiagnostics:
    cs_drop: float
    slab_energy: float
    relative_gap: float
    imag_drift: float
    moment_drift: float
    chain_rule_defect: float
    direction: str
    succinct_defect: float | None = None


def _time_derivative(t, y):
    """Finite-difference dy/dt at interior samples (5-point when possible)."""
    dt = t[1] - t[0]
    if len(y) >= 5:
        d = (8 * (y[3:-1] - y[1:-3]) - (y[4:] - y[:-4])) / (12 * dt)
        return d, slice(2, -2)
    if len(y) >= 3:
        return (y[2:] - y[:-2]) / (2 * dt), slice(1, -1)
    return np.diff(y) / dt, None


def flow_diagnostics(state, scheme=None):
    """Energy balance, chain rule and moment-map drift along a flow history.

    * ``cs_drop = Re e^{2i theta} (CS(0) - CS(T))``.
    * ``slab_energy``: trapezoid-rule time integral of the spacetime
      ``int |F_C|^2 = ||dA/dt||^2 + ||dphi/dt||^2 + ||F_C||^2``.  The
      balance is ``2 cs_drop = slab_energy``; ``relative_gap`` measures it.
    * ``chain_rule_defect``: max over interior samples of
      ``|d/dt Re CS_theta - <grad CS_theta, rhs>|``.
    * ``moment_drift = max_t | ||mu(t)|| - ||mu(0)|| |``.
    * ``succinct_defect`` (only with a stored trajectory):
      max relative ``||T - *conj T||`` of the reconstructed ``T = e^{i theta} F_C``.
    """
    hist = state.history
    if len(hist) < 2:
        raise ValueError("flow diagnostics need at least two history records")
    arr = np.array(hist, dtype=float)
    t, re_cs, im_cs, grad2, mu, fc2, pairing = arr.T
    cs_drop = re_cs[0] - re_cs[-1]
    slab = float(np.trapezoid(grad2 + fc2, t))
    gap = abs(2 * cs_drop - slab) / slab if slab > 0 else abs(2 * cs_drop)

    deriv, sl = _time_derivative(t, re_cs)
    if sl is None:
        target = 0.5 * (pairing[1:] + pairing[:-1])
    else:
        target = pairing[sl]
    chain = float(np.max(np.abs(deriv - target)))

    if np.all(pairing == 0):
        direction = "stationary"
    else:
        direction = "descent" if np.sum(pairing) < 0 else "ascent"

    succinct = None
    if state.trajectory is not None and len(state.trajectory) >= 3:
        star = _indices.star_table(4, 2)
        worst = 0.0
        for _, T in reconstruct_spacetime_curvature(state, scheme):
            dual = np.stack([sign * np.conj(T[i]) for i, sign in star])
            size = np.sqrt(np.sum(np.abs(T) ** 2))
            if size > 0:
                worst = max(worst, float(np.sqrt(np.sum(np.abs(T - dual) ** 2)) / size))
        succinct = worst

    return FlowDiagnostics(
        cs_drop=float(cs_drop),
        slab_energy=slab,
        relative_gap=float(gap),
        imag_drift=float(np.max(np.abs(im_cs - im_cs[0]))),
        moment_drift=float(np.max(np.abs(mu - mu[0]))),
        chain_rule_defect=chain,
        direction=direction,
        succinct_defect=succinct,
    )

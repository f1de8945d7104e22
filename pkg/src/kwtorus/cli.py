"""``kw`` command line: validated run configuration, scenarios, reports.

    kw <scenario> [--config run.toml] [--n N] [--dim D] [--seed S] [--theta T]
                  [--amplitude A] [--band B] [--profile smooth|rough]
                  [--stencil NAME] [--out DIR]

Flags override values from the TOML file.  Exit status: 0 all checks pass,
2 usage or configuration error, 3 a check failed, 4 numerical divergence.
``KW_THREADS`` caps the thread pools of the numerical kernels.
"""

import argparse
import csv
import logging
import math
import os
import sys
import types
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import acceptance
from .calculus import SCHEMES, covariant_codiff
from .convergence import CHECKS, convergence_study, step_halving_study
from .flow import FlowDivergedError, flow_diagnostics, integrate_flow
from .functionals import energies
from .gauge import GaugeFixingError, coulomb_gauge_fix
from .io import write_field
from .kw import estimate_diagnostics, is_alt_form_pole, kw_alt_check, kw_residual
from .lattice import AdjointForm, Configuration, TorusGrid, random_configuration, rough_form
from .report import Record, Report, bound_record, order_record
from .solver import minimize_kw

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "main", "run"]

logger = logging.getLogger(__name__)

SCENARIOS = ("identities", "kw-check", "gauge-fix", "minimize", "flow", "converge")
EXIT_PASS, EXIT_USAGE, EXIT_FAIL, EXIT_DIVERGED = 0, 2, 3, 4
DEFAULT_CHECKS = (
    "topological",
    "bianchi",
    "weitzenbock",
    "pm_sum",
    "curvature_oracle",
    "flow_chain_rule",
    "flow_moment_drift",
    "rk4_step_halving",
)


class ConfigError(ValueError):
    pass


def _field_type(f):
    """``(type, optional)`` from a dataclass field annotation."""
    t = f.type
    if isinstance(t, types.UnionType):
        args = [a for a in t.__args__ if a is not type(None)]
        return args[0], True
    return t, False


@dataclass
class RunConfig:
    scenario: str
    n: int = 8
    dim: int | None = None
    length: float = 2 * math.pi
    seed: int = 1
    amplitude: float = 0.1
    band: int = 2
    profile: str = "smooth"
    theta: float = math.pi / 4
    stencil: str = "central-2"
    identity_tol: float = 1e-10
    derivative_tol: float = 1e-6
    residual_tol: float = 1e-6
    max_iter: int = 5000
    gauge_tol: float = 1e-8
    gauge_max_iter: int = 30
    dt: float | None = None
    t_final: float = 0.5
    flow_method: str = "rk4"
    flow_zero_phi: bool = True
    chain_rule_tol: float = 1e-3
    balance_tol: float = 5e-2
    drift_tol: float = 1e-2
    sizes: list = field(default_factory=lambda: [8, 16, 32])
    checks: list = field(default_factory=lambda: list(DEFAULT_CHECKS))
    min_order: float = 1.8
    out: str = "kw-out"

    def __post_init__(self):
        self.validate()

    @property
    def grid_dim(self):
        if self.dim is not None:
            return self.dim
        return 3 if self.scenario == "flow" else 4

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        for f in fields(self):
            kind, optional = _field_type(f)
            value = getattr(self, f.name)
            if value is None and optional:
                continue
            if kind is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
                setattr(self, f.name, value)
            if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
                raise ConfigError(f"{f.name} must be of type {kind.__name__}, got {value!r}")

        need(self.scenario in SCENARIOS, f"unknown scenario {self.scenario!r}")
        need(self.n >= 4 and self.n % 2 == 0, "n must be even and >= 4")
        need(self.grid_dim in (3, 4), "dim must be 3 or 4")
        need(self.length > 0, "length must be positive")
        need(self.amplitude >= 0, "amplitude must be non-negative")
        need(0 <= self.band and 2 * self.band < self.n, "band must satisfy 0 <= 2 band < n")
        need(math.isfinite(self.theta), "theta must be finite")
        need(self.profile in ("smooth", "rough"), "profile must be 'smooth' or 'rough'")
        need(self.stencil in SCHEMES, f"stencil must be one of {sorted(SCHEMES)}")
        need(self.flow_method in ("rk4", "euler"), "flow_method must be rk4 or euler")
        for name in ("identity_tol", "derivative_tol", "residual_tol", "gauge_tol", "t_final",
                     "chain_rule_tol", "balance_tol", "drift_tol", "min_order"):
            need(getattr(self, name) > 0, f"{name} must be positive")
        need(self.max_iter >= 0 and self.gauge_max_iter >= 0, "iteration limits must be >= 0")
        need(self.dt is None or self.dt > 0, "dt must be positive")
        need(len(self.sizes) >= 3, "a convergence study needs at least 3 sizes")
        need(all(isinstance(m, int) and m >= 4 and m % 2 == 0 for m in self.sizes),
             "sizes must be even integers >= 4")
        unknown = [c for c in self.checks if c not in CHECKS and c != "rk4_step_halving"]
        need(not unknown, f"unknown checks {unknown}")
        if self.scenario in ("kw-check", "minimize"):
            need(self.grid_dim == 4, f"{self.scenario} needs dim 4")
        if self.scenario == "flow":
            need(self.grid_dim == 3, "flow needs dim 3")

    @classmethod
    def from_mapping(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        if "scenario" not in data:
            raise ConfigError("scenario missing")
        return cls(**data)

    def grid(self):
        return TorusGrid(self.grid_dim, self.n, self.length)


def load_config(path, overrides):
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return RunConfig.from_mapping(data)


def _environment(cfg):
    return {
        "grid": {"dim": cfg.grid_dim, "n": cfg.n, "length": cfg.length},
        "seed": cfg.seed,
        "stencil": cfg.stencil,
        "theta": cfg.theta,
        # the output location is not part of what was computed
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
    }


def _start(cfg):
    grid = cfg.grid()
    if cfg.profile == "rough":
        return Configuration(
            rough_form(grid, cfg.seed, cfg.amplitude), rough_form(grid, cfg.seed + 1, cfg.amplitude)
        )
    return random_configuration(grid, cfg.seed, cfg.amplitude, cfg.band)


def _identities(cfg, report, out):
    """Algebraic identities; on the default n = 8 grid these are criteria 1-3, 6, 7."""
    n, seed = cfg.n, cfg.seed
    report.add(acceptance.pm_algebra(seed))
    report.add(acceptance.energy_decompositions(n, seed))
    report.add(acceptance.theta_family(n, seed))
    report.add(acceptance.variational(n, seed))
    report.add(acceptance.moment_identity(n, seed))


def _kw_check(cfg, report, out):
    state = _start(cfg)
    res = kw_residual(state, cfg.theta, cfg.stencil)
    e = energies(state, cfg.theta, cfg.stencil)
    report.add(Record("r_plus_norm", res.plus_norm, True))
    report.add(Record("r_minus_norm", res.minus_norm, True))
    report.add(Record("r_moment_norm", res.moment_norm, True))
    report.add(Record("residual_value", res.value, True))
    report.add(bound_record("family_equivalence", res.equivalence_defect, cfg.identity_tol))
    identity = abs(e.cym - (-(np.exp(2j * cfg.theta) * e.topo).real + e.sd_defect))
    report.add(bound_record("cym_theta_identity", identity / max(1.0, e.cym), cfg.identity_tol))
    if not is_alt_form_pole(cfg.theta):
        c, s = math.cos(cfg.theta), math.sin(cfg.theta)
        alt = kw_alt_check(state, cfg.theta, cfg.stencil)
        combo = (res.r_plus / c + res.r_minus / s).norm()
        report.add(bound_record("alt_form_combination", abs(alt - combo), cfg.identity_tol))
        diag = estimate_diagnostics(state, cfg.theta, cfg.stencil)
        report.add(Record("estimate_diagnostics", diag.to_dict(), True, note="reported, not asserted"))
    report.add(Record("energies", e.to_dict(), True))
    write_field(out / "configuration.bin", state, role="initial")


def _gauge_fix(cfg, report, out):
    state = _start(cfg)
    g, A = coulomb_gauge_fix(state.A, cfg.gauge_tol, cfg.gauge_max_iter, cfg.stencil)
    report.add(bound_record("coulomb_divergence", covariant_codiff(None, A, cfg.stencil).norm(),
                            cfg.gauge_tol))
    write_field(out / "connection.bin", A, role="coulomb-gauge connection")


def _minimize(cfg, report, out):
    state = _start(cfg)
    final, log = minimize_kw(state, cfg.theta, tol=cfg.residual_tol, max_iter=cfg.max_iter,
                             scheme=cfg.stencil)
    log.to_csv(out / "minimize.csv")
    values = log.values
    report.add(bound_record("final_residual", values[-1], cfg.residual_tol, note=log.status))
    monotone = bool(np.all(np.diff(values) <= 0))
    report.add(Record("monotone_decrease", monotone, monotone))
    report.add(Record("iterations", log.n_iter, log.status == "converged"))
    write_field(out / "minimizer.bin", final, role="minimizer")


def _flow(cfg, report, out):
    grid = cfg.grid()
    state = _start(cfg)
    if cfg.flow_zero_phi:
        state = Configuration(state.A, AdjointForm.zeros(grid, 1))
    dt = cfg.dt if cfg.dt is not None else 1.0 / cfg.n
    steps = max(1, round(cfg.t_final / dt))
    run = integrate_flow(state, cfg.theta, cfg.t_final / steps, steps, method=cfg.flow_method,
                         scheme=cfg.stencil)
    run.to_csv(out / "flow_history.csv")
    write_field(out / "flow_final.bin", run.cfg, role="flow final")
    d = flow_diagnostics(run, cfg.stencil)
    report.add(bound_record("chain_rule_defect", d.chain_rule_defect, cfg.chain_rule_tol))
    report.add(bound_record("cs_energy_balance", d.relative_gap, cfg.balance_tol,
                            note="|2 CS drop - slab energy| / slab energy"))
    report.add(bound_record("moment_drift", d.moment_drift, cfg.drift_tol))
    report.add(Record("flow_direction", d.direction, True))
    report.add(Record("imag_cs_drift", d.imag_drift, True))


def _converge(cfg, report, out):
    rows = []
    params = dict(seed=cfg.seed, amplitude=cfg.amplitude, band=cfg.band)
    for name in cfg.checks:
        if name == "rk4_step_halving":
            start = random_configuration(TorusGrid(3, cfg.sizes[0]), cfg.seed, cfg.amplitude, 1)
            h = step_halving_study(start, 0.3, cfg.t_final, steps0=max(4, math.ceil(
                cfg.t_final / (0.2 * 2 * math.pi / cfg.sizes[0]))))
            report.add(Record(name, h.order, h.order >= 3.5, expected_order=3.5))
            rows += [(name, s, cfg.t_final / s, d) for s, d in zip(h.steps, h.differences)]
            continue
        kw = dict(params)
        if name.startswith("flow_"):
            kw["band"] = 1
        elif name != "topological":
            kw["band"] = min(cfg.band, 1)
        if name not in ("topological", "pm_sum") and not name.startswith("flow_"):
            kw["dim"] = cfg.grid_dim
            kw["scheme"] = cfg.stencil
        study = convergence_study(name, cfg.sizes, **kw)
        expected = 3.5 if (name == "curvature_oracle" and cfg.stencil == "central-4") else cfg.min_order
        report.add(order_record(name, study, expected))
        rows += [(name, n, h, d) for n, h, d in zip(study.sizes, study.spacings, study.defects)]
    with open(out / "convergence.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("check", "n_or_steps", "h_or_dt", "defect"))
        writer.writerows([(a, b, repr(float(c)), repr(float(d))) for a, b, c, d in rows])


RUNNERS = {
    "identities": _identities,
    "kw-check": _kw_check,
    "gauge-fix": _gauge_fix,
    "minimize": _minimize,
    "flow": _flow,
    "converge": _converge,
}


def run(cfg):
    """Execute a scenario, write ``report.json`` and artifacts; return ``(Report, exit code)``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = Report(cfg.scenario, _environment(cfg))
    code = EXIT_PASS
    try:
        RUNNERS[cfg.scenario](cfg, report, out)
    except (FlowDivergedError, GaugeFixingError) as exc:
        report.add(Record("divergence", str(exc), False))
        if isinstance(exc, FlowDivergedError):
            exc.state.to_csv(out / "flow_history.csv")
        code = EXIT_DIVERGED
    if code == EXIT_PASS and not report.passed:
        code = EXIT_FAIL
    report.write(out / "report.json")
    return report, code


def _thread_limit():
    value = os.environ.get("KW_THREADS")
    if not value:
        return nullcontext()
    try:
        limit = int(value)
    except ValueError:
        raise ConfigError(f"KW_THREADS must be an integer, got {value!r}") from None
    if limit < 1:
        raise ConfigError("KW_THREADS must be >= 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)


def build_parser():
    p = argparse.ArgumentParser(prog="kw", description="Kapustin-Witten lattice checks on flat tori")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--n", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--band", type=int)
    p.add_argument("--profile", choices=("smooth", "rough"))
    p.add_argument("--stencil")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        cfg = load_config(args.config, overrides)
        limit = _thread_limit()
    except ConfigError as exc:
        print(f"kw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with limit:
        report, code = run(cfg)
    for rec in report.records:
        print(rec.summary())
    print(f"report written to {Path(cfg.out) / 'report.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())

import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from conftest import five_point, random_form, random_tangent
from kwtorus.calculus import wedge_trace
from kwtorus.convergence import fit_order
from kwtorus.functionals import (
    chern_simons,
    chern_simons_variation,
    decomposition_identity,
    energies,
    integrate,
    topological_expansion,
    topological_pairing,
    yang_mills,
)
from kwtorus.lattice import AdjointForm, Configuration, TorusGrid, random_configuration


def _constant_form(grid, degree, vectors):
    vectors = np.asarray(vectors)
    shape = (len(vectors), *([1] * grid.dim), 3)
    return AdjointForm(grid, degree, np.broadcast_to(vectors.reshape(shape), (len(vectors), *grid.shape, 3)).copy())


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 1)])
def test_wedge_trace_matches_matrix_oracle(p, q, rng):
    grid = TorusGrid(4, 4)
    a = random_form(grid, p, rng, complex_=True)
    b = random_form(grid, q, rng, complex_=True)
    got = wedge_trace(a, b)
    expected = orc.wedge_trace_oracle(a.data, b.data, 4, p, q)
    assert np.max(np.abs(got - expected)) <= 1e-13


def test_integrate_constant():
    grid = TorusGrid(3, 4)
    assert math.isclose(integrate(grid, np.ones(grid.shape)), (2 * math.pi) ** 3, rel_tol=1e-14)
    assert isinstance(integrate(grid, np.ones(grid.shape, complex)), complex)


def test_yang_mills_constant_nonabelian():
    grid = TorusGrid(4, 4)
    A = _constant_form(grid, 1, [[1.0, 0, 0], [0, 1.0, 0], [0, 0, 0], [0, 0, 0]])
    # F_12 = [e1, e2] = e3 from the matrix model
    comm = orc.mat([1, 0, 0]) @ orc.mat([0, 1, 0]) - orc.mat([0, 1, 0]) @ orc.mat([1, 0, 0])
    assert np.allclose(comm, orc.mat([0, 0, 1]))
    assert math.isclose(yang_mills(A), (2 * math.pi) ** 4, rel_tol=1e-14)


def test_topological_constant_connection_vanishes():
    # for constant fields tr(F^F) = d(CS density) of a constant, hence zero
    grid = TorusGrid(4, 4)
    rng = np.random.default_rng(3)
    cfg = Configuration(
        _constant_form(grid, 1, rng.standard_normal((4, 3))),
        _constant_form(grid, 1, rng.standard_normal((4, 3))),
    )
    assert yang_mills(cfg.A) > 1
    assert abs(topological_pairing(cfg)) <= 1e-11


@given(st.integers(0, 2**31), st.floats(0.01, 2.0))
def test_decomposition_identity(seed, amplitude):
    cfg = random_configuration(TorusGrid(4, 4), seed, amplitude, band=1)
    rep = decomposition_identity(cfg.A)
    assert rep.max_defect <= 1e-12 * max(1.0, rep.ym)
    assert rep.plus_norm2 >= 0 and rep.minus_norm2 >= 0


def test_decomposition_needs_dim4(cfg3):
    with pytest.raises(ValueError):
        decomposition_identity(cfg3.A)


@given(st.integers(0, 2**31), st.floats(0, 2 * math.pi))
def test_cym_theta_identity(seed, theta):
    cfg = random_configuration(TorusGrid(4, 4), seed, 0.5, band=1)
    e = energies(cfg, theta)
    rot = (np.exp(2j * theta) * e.topo).real
    assert abs(e.cym - (e.sd_defect - rot)) <= 1e-12 * max(1.0, e.cym)


def test_energy_parts(cfg4):
    e = energies(cfg4)
    assert e.theta == 0.0
    assert e.cym == pytest.approx(e.flat_part + e.dphi_part, rel=1e-15)
    assert e.augmented == pytest.approx(e.cym + e.moment_part, rel=1e-15)
    assert e.k_estimate == pytest.approx(e.topo.real / (8 * math.pi**2))
    xx, yy, xy = topological_expansion(cfg4)
    assert abs(topological_pairing(cfg4) - complex(xx - yy, 2 * xy)) <= 1e-12
    assert abs(topological_pairing(cfg4) - e.topo) <= 1e-12
    d = e.to_dict()
    assert d["topo"] == [e.topo.real, e.topo.imag]


def test_energies_zero_phi_reduces_to_ym(cfg4):
    cfg = Configuration(cfg4.A, AdjointForm.zeros(cfg4.grid, 1))
    e = energies(cfg)
    assert e.cym == pytest.approx(yang_mills(cfg.A), rel=1e-15)
    assert e.dphi_part == 0 and e.moment_part == 0


def test_energies_dim3(cfg3):
    e = energies(cfg3)
    assert e.topo is None and e.sd_defect is None
    with pytest.raises(ValueError):
        energies(cfg3, 0.3)


def test_chern_simons_constant_matrix_oracle():
    grid = TorusGrid(3, 4)
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    cfg = Configuration(_constant_form(grid, 1, a.real), _constant_form(grid, 1, a.imag))
    # with tr_pair = 2 tr_matrix and [a^a] = 2 a^a the density is the textbook tr(a da + 2/3 a^3)
    M = orc.mat(a)
    cube = sum(
        orc.perm_parity(s) * (M[s[0]] @ M[s[1]] @ M[s[2]]) for s in itertools.permutations(range(3))
    )
    expected = (2 / 3) * np.trace(cube) * (2 * math.pi) ** 3
    assert abs(chern_simons(cfg) - expected) <= 1e-10 * abs(expected)


def test_chern_simons_abelian_symbolic():
    x = orc.coords(3)
    # a = e1 alpha with alpha a Beltrami (ABC) field, so the helicity is nonzero
    alpha = [sp.sin(x[2]) + sp.cos(x[1]), sp.sin(x[0]) + sp.cos(x[2]), sp.sin(x[1]) + sp.cos(x[0])]
    dalpha = {
        (j, k): sp.diff(alpha[k], x[j]) - sp.diff(alpha[j], x[k])
        for j, k in itertools.combinations(range(3), 2)
    }
    top = alpha[0] * dalpha[(1, 2)] - alpha[1] * dalpha[(0, 2)] + alpha[2] * dalpha[(0, 1)]
    # tr(e1 e1) = -1, and CS = 1/2 int tr(a ^ da)
    exact = -0.5 * sp.integrate(top, *[(xi, 0, 2 * sp.pi) for xi in x])
    exact = float(exact)
    errs = []
    for n in (16, 32, 64):
        grid = TorusGrid(3, n)
        form = {(j,): orc.vec(alpha[j], 0, 0) for j in range(3)}
        A = AdjointForm(grid, 1, orc.evaluate(form, grid, 1, x))
        errs.append(abs(chern_simons(Configuration(A, AdjointForm.zeros(grid, 1))) - exact))
    assert exact != 0
    assert fit_order([1 / 16, 1 / 32, 1 / 64], errs)[0] >= 1.8


@given(st.integers(0, 2**31))
def test_chern_simons_variation_fd(seed):
    rng = np.random.default_rng(seed)
    cfg = random_configuration(TorusGrid(3, 4), seed, 0.5, band=1)
    t = random_tangent(cfg.grid, rng)
    fd = five_point(lambda e: chern_simons(cfg.shifted(t, e)), 1e-2)
    exact = chern_simons_variation(cfg, t)
    assert abs(fd - exact) <= 1e-8 * max(1.0, abs(exact))


def test_chern_simons_needs_dim3(cfg4):
    with pytest.raises(ValueError):
        chern_simons(cfg4)
    with pytest.raises(ValueError):
        topological_pairing(random_configuration(TorusGrid(3, 4), 0))


from itertools import combinations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from conftest import random_form
from kwtorus.calculus import (
    CENTRAL4,
    complex_curvature,
    covariant_codiff,
    covariant_d,
    curvature,
    hodge_star,
    nabla,
    project_pm,
    rough_laplacian,
    wedge_trace,
)
from kwtorus.convergence import convergence_study, fit_order
from kwtorus.gauge import apply_gauge, gauge_from_algebra
from kwtorus.lattice import AdjointForm, Configuration, TorusGrid, random_configuration


def _form(grid, p, data):
    return AdjointForm(grid, p, data)


def _order_against(symbolic, p, discrete_fn, dim=3, sizes=(16, 32, 64)):
    x = orc.coords(dim)
    errs = []
    for n in sizes:
        grid = TorusGrid(dim, n)
        exact = orc.evaluate(symbolic, grid, p, x)
        errs.append(np.max(np.abs(discrete_fn(grid) - exact)))
    return fit_order([2 * np.pi / n for n in sizes], errs)[0], errs


def test_d_abelian_example():
    x = orc.coords(3)
    phi = {(0,): orc.vec(sp.sin(x[1]), 0, 0)}
    exact = orc.d_form(None, phi, 3, 1, x)
    assert sp.simplify(exact[(0, 1)][0] + sp.cos(x[1])) == 0

    def discrete(grid):
        return covariant_d(None, _form(grid, 1, orc.evaluate(phi, grid, 1, x))).data

    order, errs = _order_against(exact, 2, discrete)
    assert order >= 1.8 and errs[-1] < 5e-3


def test_d_constants_exact(grid4):
    w = _form(grid4, 1, np.broadcast_to([0.3, 1.0, -2.0], (4, *grid4.shape, 3)))
    assert not covariant_d(None, w).data.any()
    grid = TorusGrid(3, 8)
    A = AdjointForm.from_function(grid, 1, lambda *x: {(0,): np.array([1.0, 0, 0])})
    phi = AdjointForm.from_function(grid, 1, lambda *x: {(1,): np.array([0, 1.0, 0])})
    D = covariant_d(A, phi)
    assert np.array_equal(D.component((0, 1)), np.broadcast_to([0, 0, 1.0], (*grid.shape, 3)))
    assert not D.component((0, 2)).any()


def _nonabelian_fields(x):
    A = {
        (0,): orc.vec(sp.sin(x[1]), 0.5 * sp.cos(x[2]), 0),
        (1,): orc.vec(0, sp.cos(x[0]), 0.3 * sp.sin(x[2])),
        (2,): orc.vec(0.2 * sp.sin(x[0] + x[1]), 0, sp.cos(x[1])),
    }
    w = {
        (0, 1): orc.vec(sp.cos(x[2]), sp.sin(x[0]), 0),
        (0, 2): orc.vec(0, sp.sin(x[1]), sp.cos(x[0])),
        (1, 2): orc.vec(sp.sin(x[0] - x[2]), 0, 0.5),
    }
    return A, w


@pytest.mark.parametrize("p", [1, 2])
def test_covariant_d_nonabelian_oracle(p):
    x = orc.coords(3)
    A, w2 = _nonabelian_fields(x)
    w = A if p == 1 else w2
    exact = orc.d_form(A, w, 3, p, x)

    def discrete(grid):
        a = _form(grid, 1, orc.evaluate(A, grid, 1, x))
        return covariant_d(a, _form(grid, p, orc.evaluate(w, grid, p, x))).data

    order, _ = _order_against(exact, p + 1, discrete)
    assert order >= 1.8


@pytest.mark.parametrize("p", [1, 2, 3])
def test_codiff_nonabelian_oracle(p):
    x = orc.coords(3)
    A, w2 = _nonabelian_fields(x)
    w1 = {(0,): orc.vec(sp.cos(x[0]), sp.sin(x[2]), 0), (1,): orc.vec(0, sp.sin(x[1]), sp.cos(x[0])), (2,): orc.vec(0.5, 0, sp.sin(x[2]))}
    w = {1: w1, 2: w2, 3: {(0, 1, 2): orc.vec(sp.sin(x[0]), sp.cos(x[1] + x[2]), 0)}}[p]
    exact = orc.codiff_form(A, w, 3, p, x)

    def discrete(grid):
        a = _form(grid, 1, orc.evaluate(A, grid, 1, x))
        return covariant_codiff(a, _form(grid, p, orc.evaluate(w, grid, p, x))).data

    order, _ = _order_against(exact, p - 1, discrete)
    assert order >= 1.8


def test_codiff_example():
    x = orc.coords(3)
    phi = {(0,): orc.vec(sp.sin(x[0]), 0, 0)}
    exact = orc.codiff_form(None, phi, 3, 1, x)
    assert sp.simplify(exact[()][0] + sp.cos(x[0])) == 0

    def discrete(grid):
        return covariant_codiff(None, _form(grid, 1, orc.evaluate(phi, grid, 1, x))).data

    order, _ = _order_against(exact, 0, discrete)
    assert order >= 1.8


@pytest.mark.parametrize("dim,p", [(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (4, 4)])
def test_adjointness(dim, p, rng):
    grid = TorusGrid(dim, 6)
    alpha = random_form(grid, p - 1, rng, complex_=True)
    beta = random_form(grid, p, rng, complex_=True)
    A_real = random_form(grid, 1, rng)
    lhs = covariant_d(A_real, alpha).inner(beta)
    rhs = alpha.inner(covariant_codiff(A_real, beta))
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_degree_errors(grid3):
    with pytest.raises(ValueError, match="degree overflow"):
        covariant_d(None, AdjointForm.zeros(grid3, 3))
    with pytest.raises(ValueError, match="degree underflow"):
        covariant_codiff(None, AdjointForm.zeros(grid3, 0))


def test_curvature_examples():
    grid = TorusGrid(3, 8)
    assert not curvature(AdjointForm.zeros(grid, 1)).data.any()
    A = AdjointForm.from_function(
        grid, 1, lambda *x: {(0,): np.array([1.0, 0, 0]), (1,): np.array([0, 1.0, 0])}
    )
    F = curvature(A)
    assert np.array_equal(F.component((0, 1)), np.broadcast_to([0, 0, 1.0], (*grid.shape, 3)))

    x = orc.coords(3)
    ab = {(0,): orc.vec(sp.sin(2 * x[1]) + sp.cos(x[1]), 0, 0)}
    exact = orc.curvature_form(ab, 3, x)
    assert sp.simplify(exact[(0, 1)][0] + sp.diff(ab[(0,)][0], x[1])) == 0

    def discrete(g):
        return curvature(_form(g, 1, orc.evaluate(ab, g, 1, x))).data

    order, _ = _order_against(exact, 2, discrete)
    assert order >= 1.8


def test_curvature_nonabelian_oracle():
    x = orc.coords(3)
    A, _ = _nonabelian_fields(x)
    exact = orc.curvature_form(A, 3, x)
    order, _ = _order_against(exact, 2, lambda g: curvature(_form(g, 1, orc.evaluate(A, g, 1, x))).data)
    assert order >= 1.8
    order4, _ = _order_against(
        exact, 2, lambda g: curvature(_form(g, 1, orc.evaluate(A, g, 1, x)), CENTRAL4).data
    )
    assert order4 >= 3.5


def test_complex_curvature_reductions(grid3):
    cfg = random_configuration(grid3, 3, 0.4)
    fc = complex_curvature(Configuration(cfg.A, AdjointForm.zeros(grid3, 1)))
    assert np.array_equal(fc.data.real, curvature(cfg.A).data) and not fc.data.imag.any()

    phi = AdjointForm.from_function(
        grid3, 1, lambda *x: {(0,): np.array([1.0, 0, 0]), (1,): np.array([0, 1.0, 0])}
    )
    fc = complex_curvature(Configuration(AdjointForm.zeros(grid3, 1), phi))
    assert np.array_equal(fc.component((0, 1)).real, np.broadcast_to([0, 0, -1.0], (*grid3.shape, 3)))
    assert not fc.data.imag.any()


def test_complex_gauge_conjugates_fc():
    def defect(n):
        grid = TorusGrid(3, n)
        cfg = random_configuration(grid, 5, 0.3, 1)
        x = grid.coordinates()
        chi = np.zeros((1, *grid.shape, 3), dtype=complex)
        chi[0, ..., 0] = 0.2j * np.sin(x[1])
        chi[0, ..., 1] = 0.1 * np.cos(x[2]) + 0.1j * np.cos(x[0])
        g = gauge_from_algebra(AdjointForm(grid, 0, chi))
        out = complex_curvature(apply_gauge(cfg, g, mode="complex"))
        from kwtorus.lie import adjoint_matrix

        r = adjoint_matrix(g.matrices)
        rotated = np.einsum("...ab,j...b->j...a", r, complex_curvature(cfg).data)
        return (out - AdjointForm(grid, 2, rotated)).norm()

    study = convergence_study(defect, [8, 16, 32])
    assert study.status == "ok" and study.order >= 1.8


def _star_oracle(dim, p):
    """Exhaustive table: *dx^I = sign(I J) dx^J with J the sorted complement."""
    table = {}
    for I in combinations(range(dim), p):
        J = tuple(k for k in range(dim) if k not in I)
        table[I] = (J, orc.perm_parity(I + J))
    return table


@pytest.mark.parametrize("dim", [3, 4])
def test_hodge_star_sign_table(dim):
    grid = TorusGrid(dim, 4)
    for p in range(dim + 1):
        for I, (J, sign) in _star_oracle(dim, p).items():
            w = AdjointForm.from_function(grid, p, lambda *x, I=I: {I: np.array([1.0, 2.0, 3.0])})
            out = hodge_star(w)
            expected = np.broadcast_to(sign * np.array([1.0, 2.0, 3.0]), (*grid.shape, 3))
            assert np.array_equal(out.component(J), expected)
            assert np.sum(np.abs(out.data)) == np.sum(np.abs(expected))


@pytest.mark.parametrize("dim", [3, 4])
def test_star_star_and_isometry(dim, rng):
    grid = TorusGrid(dim, 4)
    for p in range(dim + 1):
        w = random_form(grid, p, rng, complex_=True)
        ss = hodge_star(hodge_star(w))
        assert np.max(np.abs(ss.data - (-1) ** (p * (dim - p)) * w.data)) <= 1e-15
        assert np.isclose(hodge_star(w).norm(), w.norm(), rtol=1e-14)


def test_star_4d_example(grid4):
    w = AdjointForm.from_function(grid4, 2, lambda *x: {(0, 1): np.array([1.0, 0, 0])})
    assert np.array_equal(hodge_star(w).component((2, 3)), w.component((0, 1)))


def test_project_pm_identities(grid4, rng):
    T = random_form(grid4, 2, rng, complex_=True)
    plus, minus = project_pm(T, 1), project_pm(T, -1)
    assert np.max(np.abs((plus + minus - T).data)) <= 1e-15
    assert np.max(np.abs(hodge_star(plus).data - project_pm(T.conj(), 1).data)) <= 1e-15
    assert np.max(np.abs(hodge_star(plus).data - plus.conj().data)) <= 1e-15
    assert np.max(np.abs(hodge_star(minus).data + minus.conj().data)) <= 1e-15
    # Re <T+, T-> vanishes both as an L2 pairing and as a wedge integral
    assert abs(plus.inner(minus).real) <= 1e-12 * T.norm2()
    wedge = np.sum(wedge_trace(plus, minus.conj())[0]).real * grid4.volume_element
    assert abs(wedge) <= 1e-12 * T.norm2()


def test_project_pm_self_dual_real(grid4, rng):
    w = random_form(grid4, 2, rng)
    sd = (w + hodge_star(w)) * 0.5
    assert np.max(np.abs(project_pm(sd, 1).data - sd.data)) <= 1e-15
    assert np.max(np.abs(project_pm(sd, -1).data)) <= 1e-15


def test_project_pm_wrong_dimension(grid3):
    with pytest.raises(ValueError):
        project_pm(AdjointForm.zeros(grid3, 2), 1)


@given(st.integers(0, 2**31))
def test_pointwise_norm_identity(seed):
    grid = TorusGrid(4, 4)
    T = random_form(grid, 2, np.random.default_rng(seed), complex_=True)
    lhs = -T.pointwise_norm2()
    rhs = wedge_trace(T, T)[0].real - 2 * project_pm(T, -1).pointwise_norm2()
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_nabla_and_flat_bochner(grid4, rng):
    zero = AdjointForm.zeros(grid4, 1)
    const = AdjointForm(grid4, 1, np.broadcast_to(rng.standard_normal((4, 1, 1, 1, 1, 3)), (4, *grid4.shape, 3)))
    assert not np.any(nabla(zero, const))
    phi = random_form(grid4, 1, rng)
    lhs = rough_laplacian(zero, phi)
    rhs = covariant_codiff(None, covariant_d(None, phi)) + covariant_d(None, covariant_codiff(None, phi))
    assert np.max(np.abs((lhs - rhs).data)) <= 1e-12 * np.max(np.abs(lhs.data))


def test_nabla_abelian_oracle():
    x = orc.coords(3)
    phi = {(0,): orc.vec(sp.sin(x[1]), 0, 0), (2,): orc.vec(0, sp.cos(x[0] + x[2]), 0)}
    errs = []
    for n in (16, 32, 64):
        grid = TorusGrid(3, n)
        pts = grid.coordinates()
        data = orc.evaluate(phi, grid, 1, x)
        out = nabla(AdjointForm.zeros(grid, 1), AdjointForm(grid, 1, data))
        err = 0.0
        for j in range(3):
            for k in range(3):
                for a in range(3):
                    f = sp.lambdify(x, sp.diff(orc.comp(phi, (k,))[a], x[j]), "numpy")
                    err = max(err, np.max(np.abs(out[j, k, ..., a] - np.broadcast_to(f(*pts), grid.shape))))
        errs.append(err)
    assert fit_order([1 / 16, 1 / 32, 1 / 64], errs)[0] >= 1.8


def test_bianchi_order():
    study = convergence_study("bianchi", [8, 16, 32], dim=3)
    assert study.status == "ok" and study.order >= 1.8


def test_pm_sum_floor():
    study = convergence_study("pm_sum", [4, 6, 8])
    assert study.status == "floor reached"

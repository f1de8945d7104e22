import json
import struct

import numpy as np
import pytest

from conftest import random_form
from kwtorus.calculus import curvature
from kwtorus.convergence import convergence_study
from kwtorus.gauge import apply_gauge, gauge_from_algebra
from kwtorus.io import (
    DimensionMismatchError,
    MalformedHeaderError,
    TruncatedPayloadError,
    read_field,
    sidecar_path,
    write_field,
)
from kwtorus.lattice import (
    AdjointForm,
    Configuration,
    GaugeField,
    GridMismatchError,
    TorusGrid,
    random_configuration,
    rough_form,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        TorusGrid(2, 8)
    with pytest.raises(ValueError):
        TorusGrid(4, 7)
    g = TorusGrid(3, 8)
    assert np.isclose(g.spacing, 2 * np.pi / 8)
    assert g.ncomp(2) == 3


def test_form_shape_and_immutability(grid4):
    w = AdjointForm.zeros(grid4, 2)
    assert w.data.shape == (6, 8, 8, 8, 8, 3)
    with pytest.raises(ValueError):
        w.data[0, 0, 0, 0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        AdjointForm(grid4, 2, np.zeros((5, 8, 8, 8, 8, 3)))


def test_random_configuration_zero_amplitude(grid4):
    cfg = random_configuration(grid4, seed=3, amplitude=0.0)
    assert not cfg.A.data.any() and not cfg.phi.data.any()


def test_random_configuration_deterministic(grid3):
    a = random_configuration(grid3, seed=11, amplitude=0.2)
    b = random_configuration(grid3, seed=11, amplitude=0.2)
    assert a == b
    assert a != random_configuration(grid3, seed=12, amplitude=0.2)


def test_random_configuration_sup_norm():
    # scan on a much finer grid: the same continuum field is sampled at every n
    for n in (8, 32):
        cfg = random_configuration(TorusGrid(3, n), seed=1, amplitude=0.1, band=2)
        for form in (cfg.A, cfg.phi):
            assert np.sqrt(np.max(np.sum(form.data**2, axis=-1))) <= 0.1
    coarse = random_configuration(TorusGrid(3, 8), seed=1, amplitude=0.1, band=2)
    fine = random_configuration(TorusGrid(3, 16), seed=1, amplitude=0.1, band=2)
    assert np.allclose(coarse.A.data, fine.A.data[:, ::2, ::2, ::2], atol=1e-15)


def test_unresolvable_frequency():
    with pytest.raises(ValueError, match="unresolvable frequency"):
        random_configuration(TorusGrid(3, 8), seed=1, band=4)


def test_grid_mismatch():
    a = AdjointForm.zeros(TorusGrid(3, 8), 1)
    b = AdjointForm.zeros(TorusGrid(3, 10), 1)
    with pytest.raises(GridMismatchError):
        a + b
    with pytest.raises(GridMismatchError):
        Configuration(a, b)


def test_rough_form_bounds(grid3):
    w = rough_form(grid3, seed=0, amplitude=2.0)
    assert np.max(np.abs(w.data)) <= 2.0
    assert w.degree == 1 and w.data.shape == (3, 8, 8, 8, 3)


def _gauge(grid, rng, scale=0.3, smooth=False):
    if smooth:
        x = grid.coordinates()
        chi = np.zeros((1, *grid.shape, 3))
        chi[0, ..., 0] = scale * np.cos(x[1])
        chi[0, ..., 2] = scale * np.sin(x[0])
        return gauge_from_algebra(AdjointForm(grid, 0, chi))
    return gauge_from_algebra(random_form(grid, 0, rng, scale=scale))


def test_identity_gauge_is_noop(cfg4, grid4):
    out = apply_gauge(cfg4, GaugeField.identity(grid4))
    assert np.allclose(out.A.data, cfg4.A.data, atol=1e-15)
    assert np.allclose(out.phi.data, cfg4.phi.data, atol=1e-15)


def test_constant_gauge_keeps_zero(grid3):
    g = gauge_from_algebra(AdjointForm(grid3, 0, np.broadcast_to([0.3, -0.2, 0.5], (1, *grid3.shape, 3))))
    out = apply_gauge(Configuration.zeros(grid3), g)
    assert np.max(np.abs(out.A.data)) < 1e-15 and not out.phi.data.any()


def test_gauge_composition_exact_for_phi_and_constant_g(cfg3, grid3, rng):
    g, h = _gauge(grid3, rng), _gauge(grid3, rng)
    two = apply_gauge(apply_gauge(cfg3, g), h)
    one = apply_gauge(cfg3, h @ g)
    assert np.max(np.abs(two.phi.data - one.phi.data)) <= 1e-12
    # with constant gauge fields no derivative enters, so A composes exactly too
    c1 = gauge_from_algebra(AdjointForm(grid3, 0, np.broadcast_to([0.4, 0.1, -0.3], (1, *grid3.shape, 3))))
    c2 = gauge_from_algebra(AdjointForm(grid3, 0, np.broadcast_to([-0.2, 0.7, 0.2], (1, *grid3.shape, 3))))
    two = apply_gauge(apply_gauge(cfg3, c1), c2)
    one = apply_gauge(cfg3, c2 @ c1)
    assert np.max(np.abs(two.A.data - one.A.data)) <= 1e-12


def test_gauge_composition_of_connection_converges():
    rng = np.random.default_rng(0)

    def defect(n):
        grid = TorusGrid(3, n)
        cfg = random_configuration(grid, 2, 0.3, 1)
        g, h = _gauge(grid, rng, smooth=True), _gauge(grid, rng, 0.2, smooth=True)
        return (apply_gauge(apply_gauge(cfg, g), h).A - apply_gauge(cfg, h @ g).A).norm()

    study = convergence_study(defect, [8, 16, 32])
    assert study.status == "ok" and study.order >= 1.8


def test_phi_norm_exactly_invariant(cfg3, grid3, rng):
    out = apply_gauge(cfg3, _gauge(grid3, rng))
    assert abs(out.phi.norm() - cfg3.phi.norm()) <= 1e-13


def test_curvature_norm_invariant_to_second_order():
    rng = np.random.default_rng(1)

    def defect(n):
        grid = TorusGrid(3, n)
        cfg = random_configuration(grid, 4, 0.3, 1)
        out = apply_gauge(cfg, _gauge(grid, rng, smooth=True))
        return abs(curvature(out.A).norm() - curvature(cfg.A).norm())

    # n = 8 is pre-asymptotic for this gauge profile
    study = convergence_study(defect, [16, 32, 64])
    assert study.order >= 1.8


def test_complex_mode_requires_complex_group_for_real(cfg3, grid3, rng):
    gc = gauge_from_algebra(random_form(grid3, 0, rng, complex_=True, scale=0.2))
    with pytest.raises(ValueError):
        apply_gauge(cfg3, gc, mode="real")
    out = apply_gauge(cfg3, gc, mode="complex")
    assert out.grid == grid3


def test_pure_gauge_curvature_order():
    study = convergence_study("pure_gauge", [8, 16, 32], dim=3)
    assert study.status == "ok" and study.order >= 1.8


# --- snapshots -------------------------------------------------------------


def test_configuration_round_trip(tmp_path, cfg4):
    path = tmp_path / "cfg.bin"
    write_field(path, cfg4)
    back = read_field(path)
    assert back == cfg4
    meta = json.loads(sidecar_path(path).read_text())
    assert meta["dim"] == 4 and meta["n"] == 8 and meta["degree"] == 1
    assert sidecar_path(path).name == "cfg.meta.json"


def test_complex_form_round_trip(tmp_path, grid3, rng):
    w = random_form(grid3, 2, rng, complex_=True)
    write_field(tmp_path / "w.bin", w, role="curvature")
    back = read_field(tmp_path / "w.bin")
    assert back.degree == 2 and np.array_equal(back.data, w.data)


def test_payload_layout(tmp_path):
    grid = TorusGrid(3, 4)
    data = np.arange(3 * 64 * 3, dtype=float).reshape(3, 4, 4, 4, 3)
    write_field(tmp_path / "a.bin", AdjointForm(grid, 1, data))
    raw = (tmp_path / "a.bin").read_bytes()
    assert len(raw) == 16 + 8 * data.size
    magic, version, count = struct.unpack("<6sHQ", raw[:16])
    assert count == data.size and version == 1
    payload = np.frombuffer(raw[16:], "<f8")
    # first site, components innermost: (component 0, algebra 0..2), (component 1, ...)
    assert np.array_equal(payload[:9], np.concatenate([data[0, 0, 0, 0], data[1, 0, 0, 0], data[2, 0, 0, 0]]))


def test_wrong_magic(tmp_path, cfg3):
    path = tmp_path / "c.bin"
    write_field(path, cfg3)
    raw = bytearray(path.read_bytes())
    raw[:6] = b"NOPE!!"
    path.write_bytes(bytes(raw))
    with pytest.raises(MalformedHeaderError, match="malformed header"):
        read_field(path)


def test_dimension_mismatch(tmp_path):
    path = tmp_path / "c.bin"
    write_field(path, random_configuration(TorusGrid(3, 4), 1, band=1))
    meta = json.loads(sidecar_path(path).read_text())
    meta["n"] = 8
    sidecar_path(path).write_text(json.dumps(meta))
    with pytest.raises(DimensionMismatchError, match="dimension mismatch"):
        read_field(path)


def test_truncated_payload(tmp_path, cfg3):
    path = tmp_path / "c.bin"
    write_field(path, cfg3)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(TruncatedPayloadError):
        read_field(path)


def test_missing_sidecar(tmp_path, cfg3):
    path = tmp_path / "c.bin"
    write_field(path, cfg3)
    sidecar_path(path).unlink()
    with pytest.raises(MalformedHeaderError):
        read_field(path)

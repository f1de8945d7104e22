"""Periodic flat tori and the fields that live on them.

Every form is stored as one array of shape ``(ncomp, n, ..., n, 3)``: the
leading axis runs over strictly increasing multi-indices (lexicographic), the
site axes follow, and the trailing axis holds Lie algebra coefficients.  A
complex dtype means a ``g (x) C``-valued form.
"""

from dataclasses import dataclass
from itertools import product
from math import comb, pi

import numpy as np

from . import _indices
from .lie import check_group_element

__all__ = [
    "AdjointForm",
    "Configuration",
    "GaugeField",
    "GridMismatchError",
    "TangentPair",
    "TorusGrid",
    "random_configuration",
    "rough_form",
]


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    """Flat ``dim``-torus with ``n`` sites per axis and period ``length``."""

    dim: int
    n: int
    length: float = 2 * pi

    def __post_init__(self):
        if self.dim not in (3, 4):
            raise ValueError(f"dim must be 3 or 4, got {self.dim}")
        if self.n < 4 or self.n % 2:
            raise ValueError(f"n must be even and >= 4, got {self.n}")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def spacing(self):
        return self.length / self.n

    h = spacing

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def volume_element(self):
        return self.spacing**self.dim

    def coordinates(self):
        """Site coordinates as a tuple of ``dim`` arrays of shape ``self.shape``."""
        x = np.arange(self.n) * self.spacing
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def ncomp(self, degree):
        return comb(self.dim, degree)


def _check_same_grid(*grids):
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")


@dataclass(frozen=True, eq=False)
class AdjointForm:
    """A p-form with (possibly complexified) adjoint-bundle values."""

    grid: TorusGrid
    degree: int
    data: np.ndarray

    def __post_init__(self):
        if not 0 <= self.degree <= self.grid.dim:
            raise ValueError(f"degree {self.degree} out of range for dim {self.grid.dim}")
        expected = (self.grid.ncomp(self.degree), *self.grid.shape, 3)
        data = np.asarray(self.data)
        if data.dtype.kind not in "fc":
            data = data.astype(float)
        if data.shape != expected:
            raise ValueError(f"form data has shape {data.shape}, expected {expected}")
        view = data.view()
        view.flags.writeable = False
        object.__setattr__(self, "data", view)

    @classmethod
    def zeros(cls, grid, degree, complex=False):
        dtype = np.complex128 if complex else np.float64
        return cls(grid, degree, np.zeros((grid.ncomp(degree), *grid.shape, 3), dtype))

    @classmethod
    def from_function(cls, grid, degree, func):
        """Build from ``func(*coords) -> {multi_index: (..., 3) array}``.

        Missing multi-indices are zero; values broadcast against the grid.
        """
        coords = grid.coordinates()
        comps = func(*coords)
        imap = _indices.index_map(grid.dim, degree)
        is_complex = any(np.iscomplexobj(v) for v in comps.values())
        data = np.zeros(
            (grid.ncomp(degree), *grid.shape, 3), np.complex128 if is_complex else np.float64
        )
        for idx, val in comps.items():
            data[imap[tuple(idx)]] = np.broadcast_to(val, (*grid.shape, 3))
        return cls(grid, degree, data)

    @property
    def is_complex(self):
        return np.iscomplexobj(self.data)

    def component(self, index):
        return self.data[_indices.index_map(self.grid.dim, self.degree)[tuple(index)]]

    def _like(self, data):
        return AdjointForm(self.grid, self.degree, data)

    def _other(self, other):
        if not isinstance(other, AdjointForm):
            return NotImplemented
        _check_same_grid(self.grid, other.grid)
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")
        return other.data

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._like(self.data + o)

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._like(self.data - o)

    def __neg__(self):
        return self._like(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._like(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._like(self.data / scalar)

    def conj(self):
        return self._like(np.conj(self.data)) if self.is_complex else self

    @property
    def real(self):
        return self._like(self.data.real.copy())

    @property
    def imag(self):
        return self._like(self.data.imag.copy())

    def pointwise_norm2(self):
        d = self.data
        if self.is_complex:
            return np.sum(d.real**2 + d.imag**2, axis=(0, -1))
        return np.sum(d * d, axis=(0, -1))

    def norm2(self):
        """L^2 norm squared; multi-indices are summed without double counting."""
        return float(np.sum(self.pointwise_norm2()) * self.grid.volume_element)

    def norm(self):
        return self.norm2() ** 0.5

    def inner(self, other):
        """Hermitian L^2 inner product (complex-valued for complex forms)."""
        o = self._other(other)
        val = np.sum(self.data * np.conj(o)) * self.grid.volume_element
        return complex(val) if np.iscomplexobj(val) else float(val)

    def sup_norm(self):
        return float(np.sqrt(np.max(self.pointwise_norm2())))

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"AdjointForm(degree={self.degree}, {kind}, grid={self.grid})"


class _FormPair:
    """Shared behaviour of (A, phi) points and (B, psi) tangent vectors."""

    first: AdjointForm
    second: AdjointForm

    def _check(self):
        _check_same_grid(self.first.grid, self.second.grid)
        if self.first.degree != 1 or self.second.degree != 1:
            raise ValueError("both members must be one-forms")

    @property
    def grid(self):
        return self.first.grid

    def norm2(self):
        return self.first.norm2() + self.second.norm2()

    def norm(self):
        return self.norm2() ** 0.5

    def sup_norm(self):
        return max(self.first.sup_norm(), self.second.sup_norm())


@dataclass(frozen=True, eq=False)
class TangentPair(_FormPair):
    """A variation ``B + i psi`` of a complex connection."""

    B: AdjointForm
    psi: AdjointForm

    def __post_init__(self):
        self._check()

    first = property(lambda self: self.B)
    second = property(lambda self: self.psi)

    @classmethod
    def zeros(cls, grid):
        return cls(AdjointForm.zeros(grid, 1), AdjointForm.zeros(grid, 1))

    def inner(self, other):
        return self.B.inner(other.B) + self.psi.inner(other.psi)

    def __add__(self, other):
        return TangentPair(self.B + other.B, self.psi + other.psi)

    def __sub__(self, other):
        return TangentPair(self.B - other.B, self.psi - other.psi)

    def __neg__(self):
        return TangentPair(-self.B, -self.psi)

    def __mul__(self, scalar):
        return TangentPair(self.B * scalar, self.psi * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Configuration(_FormPair):
    """A point ``D_A + i phi`` of the configuration space."""

    A: AdjointForm
    phi: AdjointForm

    def __post_init__(self):
        self._check()

    first = property(lambda self: self.A)
    second = property(lambda self: self.phi)

    @classmethod
    def zeros(cls, grid):
        return cls(AdjointForm.zeros(grid, 1), AdjointForm.zeros(grid, 1))

    def connection(self):
        """The complex one-form ``A + i phi``."""
        return AdjointForm(self.grid, 1, self.A.data + 1j * self.phi.data)

    @classmethod
    def from_connection(cls, a):
        return cls(a.real, a.imag)

    def shifted(self, t, eps=1.0):
        """``(A + eps B, phi + eps psi)``."""
        return Configuration(self.A + eps * t.B, self.phi + eps * t.psi)

    def __sub__(self, other):
        return TangentPair(self.A - other.A, self.phi - other.phi)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.A.data, other.A.data)
            and np.array_equal(self.phi.data, other.phi.data)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GaugeField:
    """Per-site SU(2) (``complex_=False``) or SL(2, C) matrices, shape ``(*sites, 2, 2)``."""

    grid: TorusGrid
    matrices: np.ndarray
    complex_: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.shape != (*self.grid.shape, 2, 2):
            raise ValueError(f"gauge field has shape {m.shape}, expected {(*self.grid.shape, 2, 2)}")
        check_group_element(m, real=not self.complex_)
        view = m.view()
        view.flags.writeable = False
        object.__setattr__(self, "matrices", view)

    @classmethod
    def identity(cls, grid, complex_=False):
        return cls(grid, np.broadcast_to(np.eye(2, dtype=complex), (*grid.shape, 2, 2)).copy(), complex_)

    def __matmul__(self, other):
        """Pointwise product ``self * other``."""
        _check_same_grid(self.grid, other.grid)
        return GaugeField(self.grid, self.matrices @ other.matrices, self.complex_ or other.complex_)

    def inverse(self):
        return GaugeField(self.grid, np.linalg.inv(self.matrices), self.complex_)


def _trig_field(grid, coeffs, band):
    """Evaluate ``sum_k a_k cos(k.x) + b_k sin(k.x)`` on the grid by inverse FFT."""
    n, dim = grid.n, grid.dim
    spec = np.zeros(grid.shape, dtype=complex)
    ks = np.array(list(product(range(-band, band + 1), repeat=dim)), dtype=int)
    a, b = coeffs[:, 0], coeffs[:, 1]
    plus = tuple((ks % n).T)
    minus = tuple((-ks % n).T)
    np.add.at(spec, plus, (a - 1j * b) / 2)
    np.add.at(spec, minus, (a + 1j * b) / 2)
    # period L: frequencies are in units of 2 pi / L, so integer k on the 2 pi torus
    return np.fft.ifftn(spec).real * n**dim


def random_configuration(grid, seed, amplitude=0.1, band=2):
    """Seeded smooth random configuration.

    Each coefficient function is a real trigonometric polynomial with integer
    frequencies ``|k_j| <= band``.  The random coefficients depend only on
    ``(seed, dim, band)``, never on ``n``, so the same continuum field is
    sampled at every resolution.  The field is scaled so that a coefficient
    bound on its pointwise norm equals ``amplitude``; hence the sup-norm over
    the whole torus (not just the sites) is at most ``amplitude``.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    if band < 0 or 2 * band >= grid.n:
        raise ValueError(f"unresolvable frequency: band {band} needs n > {2 * band}")
    rng = np.random.default_rng(seed)
    nk = (2 * band + 1) ** grid.dim
    raw = rng.standard_normal((2, grid.dim, 3, nk, 2))
    forms = []
    for field in raw:
        bound = np.sqrt(np.sum(np.sum(np.abs(field), axis=(-1, -2)) ** 2))
        scale = amplitude / bound if bound > 0 else 0.0
        data = np.empty((grid.dim, *grid.shape, 3))
        for j in range(grid.dim):
            for a in range(3):
                data[j, ..., a] = _trig_field(grid, field[j, a] * scale, band)
        forms.append(AdjointForm(grid, 1, data))
    return Configuration(*forms)


def rough_form(grid, seed, amplitude=1.0, degree=1):
    """Site-wise uniform noise with every coefficient in ``[-amplitude, amplitude]``.

    Not a sample of any smooth field; used to probe where gauge fixing and
    other small-field iterations break down.
    """
    rng = np.random.default_rng(seed)
    data = rng.uniform(-1.0, 1.0, size=(grid.ncomp(degree), *grid.shape, 3))
    return AdjointForm(grid, degree, amplitude * data)

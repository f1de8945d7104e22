"""Binary field snapshots with a JSON sidecar.

Layout of ``<name>.bin`` (or any suffix):

* 16-byte header: ``b"KWFLD\\0"`` magic, little-endian ``uint16`` format
  version, little-endian ``uint64`` count of f64 values that follow;
* payload: little-endian f64, sites in lexicographic order with all
  components innermost (form index, then algebra index, then real/imag for
  complex data).

``<name>.meta.json`` records dim, n, length, degree, role and the object kind.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .lattice import AdjointForm, Configuration, TorusGrid

__all__ = [
    "DimensionMismatchError",
    "FieldIOError",
    "MalformedHeaderError",
    "TruncatedPayloadError",
    "read_field",
    "sidecar_path",
    "write_field",
]

MAGIC = b"KWFLD\0"
VERSION = 1
_HEADER = struct.Struct("<6sHQ")
_LE_F64 = np.dtype("<f8")


class FieldIOError(ValueError):
    pass


class MalformedHeaderError(FieldIOError):
    pass


class DimensionMismatchError(FieldIOError):
    pass


class TruncatedPayloadError(FieldIOError):
    pass


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def _form_payload(form):
    # (ncomp, *sites, 3) -> (*sites, ncomp, 3[, 2])
    data = np.moveaxis(form.data, 0, -2)
    if form.is_complex:
        data = np.stack([data.real, data.imag], axis=-1)
    return data


def write_field(path, obj, role=None):
    """Write an :class:`AdjointForm` or :class:`Configuration` snapshot."""
    path = Path(path)
    if isinstance(obj, Configuration):
        kind, grid, degree, cplx = "configuration", obj.grid, 1, False
        payload = np.stack([_form_payload(obj.A), _form_payload(obj.phi)], axis=grid.dim)
        role = role or "configuration"
    elif isinstance(obj, AdjointForm):
        kind, grid, degree, cplx = "form", obj.grid, obj.degree, obj.is_complex
        payload = _form_payload(obj)
        role = role or f"{degree}-form"
    else:
        raise TypeError(f"cannot write {type(obj).__name__}")
    flat = np.ascontiguousarray(payload, dtype=_LE_F64).ravel()
    meta = {
        "format_version": VERSION,
        "kind": kind,
        "dim": grid.dim,
        "n": grid.n,
        "length": grid.length,
        "degree": degree,
        "role": role,
        "complex": cplx,
    }
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, flat.size))
        fh.write(flat.tobytes())
    sidecar_path(path).write_text(json.dumps(meta, indent=2))


def _read_meta(path):
    meta_path = sidecar_path(path)
    try:
        meta = json.loads(meta_path.read_text())
        grid = TorusGrid(int(meta["dim"]), int(meta["n"]), float(meta["length"]))
        degree = int(meta["degree"])
        kind = meta["kind"]
        cplx = bool(meta["complex"])
    except FileNotFoundError:
        raise MalformedHeaderError(f"missing sidecar {meta_path}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedHeaderError(f"malformed header: bad sidecar {meta_path}: {exc}") from None
    if kind not in ("form", "configuration") or not 0 <= degree <= grid.dim:
        raise MalformedHeaderError(f"malformed header: bad sidecar {meta_path}")
    return meta, grid, degree, kind, cplx


def read_field(path):
    """Read a snapshot written by :func:`write_field`; the round trip is bitwise exact."""
    path = Path(path)
    meta, grid, degree, kind, cplx = _read_meta(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedHeaderError(f"malformed header: {path} is shorter than the header")
    magic, version, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MalformedHeaderError(f"malformed header: bad magic bytes {magic!r}")
    if version != VERSION:
        raise MalformedHeaderError(f"malformed header: unsupported version {version}")

    ncomp = grid.ncomp(degree)
    per_site = ncomp * 3 * (2 if cplx else 1) * (2 if kind == "configuration" else 1)
    expected = per_site * grid.n**grid.dim
    if count != expected:
        raise DimensionMismatchError(
            f"dimension mismatch: sidecar implies {expected} values, header declares {count}"
        )
    body = raw[_HEADER.size :]
    if len(body) < 8 * count:
        raise TruncatedPayloadError(f"truncated payload: {len(body)} of {8 * count} bytes")
    if len(body) > 8 * count:
        raise DimensionMismatchError("dimension mismatch: trailing bytes after payload")
    flat = np.frombuffer(body, dtype=_LE_F64).astype(np.float64)

    tail = (ncomp, 3, 2) if cplx else (ncomp, 3)
    if kind == "configuration":
        arr = flat.reshape(*grid.shape, 2, *tail)
        forms = [AdjointForm(grid, 1, np.moveaxis(arr[..., i, :, :], -2, 0)) for i in range(2)]
        return Configuration(*forms)
    arr = flat.reshape(*grid.shape, *tail)
    if cplx:
        arr = arr[..., 0] + 1j * arr[..., 1]
    return AdjointForm(grid, degree, np.moveaxis(arr, -2, 0))

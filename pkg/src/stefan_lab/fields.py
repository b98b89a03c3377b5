"""Single-time snapshots of grid functions and their file formats.

Binary layout (all little-endian)::

    offset  size          content
    0       8             magic b"STEFANSF"
    8       8   int64     grid kind: 0 uniform, 1 radial nonuniform
    16      8   int64     n, physical space dimension
    24      8   int64     d, number of array axes (1 or 2)
    32      8*d int64     shape
    ..      8   float64   h (uniform spacing, or largest spacing)
    ..      8*d float64   origin
    ..      8   float64   t
    ..      8*N float64   node coordinates, kind 1 only (N = shape[0])
    ..      8*M float64   values in C order (M = prod(shape))
"""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_real
from .errors import InputError

MAGIC = b"STEFANSF"
UNIFORM, RADIAL = 0, 1


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values on a structured grid at one time.

    ``values`` is 1-d (radial or 1-d Cartesian) or 2-d (Cartesian, axis 0 is
    x1). Uniform grids place node ``i`` at ``origin + i*h``. Radial fields on
    graded meshes carry explicit node radii in ``coords``; ``n`` is the
    physical dimension the radial profile lives in.
    """

    values: np.ndarray
    h: float
    origin: np.ndarray
    t: float
    n: int
    coords: np.ndarray = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim not in (1, 2) or vals.size == 0:
            raise InputError(f"values must be a non-empty 1-d or 2-d array, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InputError("field values must be finite")
        origin = np.atleast_1d(np.array(self.origin, dtype=float))
        if origin.size != vals.ndim:
            raise InputError(f"origin has {origin.size} entries for a {vals.ndim}-d array")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "origin", _frozen(origin))
        object.__setattr__(self, "h", check_positive(self.h, "h"))
        object.__setattr__(self, "t", check_real(self.t, "t"))
        n = int(self.n)
        if n < 1:
            raise InputError("n must be >= 1")
        object.__setattr__(self, "n", n)
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            if vals.ndim != 1 or c.shape != vals.shape:
                raise InputError("coords must match a 1-d values array")
            if np.any(np.diff(c) <= 0):
                raise InputError("coords must be strictly increasing")
            object.__setattr__(self, "coords", _frozen(c))

    @property
    def radial(self):
        return self.coords is not None

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        """Node coordinates along each array axis."""
        if self.coords is not None:
            return [self.coords]
        return [self.origin[k] + self.h * np.arange(self.values.shape[k])
                for k in range(self.values.ndim)]

    def with_values(self, values, t=None):
        return ScalarField(values, self.h, self.origin, self.t if t is None else t,
                           self.n, self.coords)

    def is_nonnegative(self, tol=0.0):
        return bool(np.min(self.values) >= -tol)

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        same_coords = (self.coords is None and other.coords is None) or (
            self.coords is not None and other.coords is not None
            and np.array_equal(self.coords, other.coords))
        return (same_coords and self.h == other.h and self.t == other.t
                and self.n == other.n and np.array_equal(self.origin, other.origin)
                and np.array_equal(self.values, other.values))

    __hash__ = None


def write_binary(field, path):
    v = field.values
    kind = RADIAL if field.radial else UNIFORM
    parts = [MAGIC, struct.pack("<3q", kind, field.n, v.ndim),
             struct.pack(f"<{v.ndim}q", *v.shape),
             struct.pack("<d", field.h),
             np.asarray(field.origin, dtype="<f8").tobytes(),
             struct.pack("<d", field.t)]
    if kind == RADIAL:
        parts.append(np.asarray(field.coords, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(v, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_binary(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise InputError(f"{path}: not a scalar-field file")
    try:
        kind, n, nd = struct.unpack_from("<3q", data, 8)
        if nd not in (1, 2) or kind not in (UNIFORM, RADIAL):
            raise InputError(f"{path}: corrupt header")
        off = 32
        shape = struct.unpack_from(f"<{nd}q", data, off)
        off += 8 * nd
        (h,) = struct.unpack_from("<d", data, off)
        off += 8
        origin = np.frombuffer(data, "<f8", nd, off)
        off += 8 * nd
        (t,) = struct.unpack_from("<d", data, off)
        off += 8
        coords = None
        if kind == RADIAL:
            coords = np.frombuffer(data, "<f8", shape[0], off)
            off += 8 * shape[0]
        size = int(np.prod(shape))
        if len(data) != off + 8 * size:
            raise InputError(f"{path}: size mismatch")
        values = np.frombuffer(data, "<f8", size, off).reshape(shape)
    except struct.error as exc:
        raise InputError(f"{path}: truncated file") from exc
    return ScalarField(values.astype(float), h, origin.astype(float), t, n,
                       None if coords is None else coords.astype(float))


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(field, path):
    """Coordinates first, then the value; one node per row."""
    axes = field.axes()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if field.values.ndim == 1:
            w.writerow(["r" if field.radial else "x1", "value"])
            for x, v in zip(axes[0], field.values):
                w.writerow([_fmt(x), _fmt(v)])
        else:
            w.writerow(["x1", "x2", "value"])
            X1, X2 = np.meshgrid(axes[0], axes[1], indexing="ij")
            for x1, x2, v in zip(X1.ravel(), X2.ravel(), field.values.ravel()):
                w.writerow([_fmt(x1), _fmt(x2), _fmt(v)])


def read_csv_table(path):
    """Return the header and a float array of a CSV written by this package."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty CSV")
    header = rows[0]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry") from exc
    return header, data.reshape(-1, len(header))

"""Finite-difference calculus on the unit box (0, 1)^d, d in {1, 2}.

Interior lattice points carry the unknowns; the boundary value is an implicit
zero. Directional derivatives live on a staggered face lattice: along axis
``i`` there are ``n_i + 1`` faces per grid line, face ``f`` sitting between
padded nodes ``f - 1`` and ``f``. ``adjoint_div`` is the exact negative
adjoint of ``forward_diff`` in the quadrature pairings below, so

    inner(adjoint_div(F, i), u) == -face_inner(F, forward_diff(u, i))

holds to roundoff for every ``u`` and ``F``.

Axes are 0-based (``axis=0`` is the first coordinate direction).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO, Callable, Sequence

import numpy as np


class GridError(ValueError):
    """Raised on malformed grids, shape mismatches and bad exponents."""


@dataclass(frozen=True)
class Grid:
    d: int
    n_per_axis: tuple[int, ...]

    def __post_init__(self):
        if self.d not in (1, 2):
            raise GridError(f"dimension must be 1 or 2, got {self.d}")
        n = tuple(int(k) for k in self.n_per_axis)
        if len(n) != self.d:
            raise GridError(f"need {self.d} axis sizes, got {len(n)}")
        if any(k < 2 for k in n):
            raise GridError(f"need at least 2 interior points per axis, got {n}")
        object.__setattr__(self, "n_per_axis", n)

    @property
    def h_per_axis(self) -> tuple[float, ...]:
        return tuple(1.0 / (k + 1) for k in self.n_per_axis)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h_per_axis))

    def face_shape(self, axis: int) -> tuple[int, ...]:
        self._check_axis(axis)
        s = list(self.n_per_axis)
        s[axis] += 1
        return tuple(s)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Interior node coordinates, one array per axis (``ij`` indexing)."""
        axes = [np.arange(1, k + 1) * h for k, h in zip(self.n_per_axis, self.h_per_axis)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def face_coords(self, axis: int) -> tuple[np.ndarray, ...]:
        """Face midpoint coordinates for the staggered lattice along ``axis``."""
        self._check_axis(axis)
        axes = []
        for a, (k, h) in enumerate(zip(self.n_per_axis, self.h_per_axis)):
            if a == axis:
                axes.append((np.arange(k + 1) + 0.5) * h)
            else:
                axes.append(np.arange(1, k + 1) * h)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def sample(self, fn: Callable[..., np.ndarray]) -> "GridFunction":
        """Evaluate ``fn(x)`` (or ``fn(x, y)``) at the interior nodes."""
        return GridFunction(self, np.asarray(fn(*self.coords()), dtype=float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape))

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.d:
            raise GridError(f"axis {axis} out of range for d={self.d}")

    @cached_property
    def diff_matrices(self) -> tuple:
        """Sparse forward-difference matrices, one per axis (faces x cells, row-major)."""
        import scipy.sparse as sp

        mats = []
        for axis in range(self.d):
            k, h = self.n_per_axis[axis], self.h_per_axis[axis]
            # (D u)_f = (u_f - u_{f-1}) / h with zero padding at both ends
            d1 = sp.diags([np.ones(k), -np.ones(k)], [0, -1], shape=(k + 1, k)) / h
            if self.d == 1:
                mats.append(d1.tocsr())
            else:
                other = self.n_per_axis[1 - axis]
                eye = sp.identity(other)
                m = sp.kron(d1, eye) if axis == 0 else sp.kron(eye, d1)
                mats.append(m.tocsr())
        return tuple(mats)


def build_grid(d: int, n: int | Sequence[int]) -> Grid:
    """Grid on (0,1)^d with ``n`` interior points per axis and ``h = 1/(n+1)``."""
    if isinstance(n, (int, np.integer)):
        n = (int(n),) * d
    return Grid(d, tuple(n))


def _readonly(values, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise GridError(f"{what} shape {arr.shape} does not match expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise GridError(f"{what} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on the interior lattice; zero on the boundary by construction."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values, self.grid.shape, "GridFunction"))

    def _same(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridError("grid mismatch")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._same(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._same(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class FaceField:
    grid: Grid
    axis: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "values", _readonly(self.values, self.grid.face_shape(self.axis), "FaceField")
        )


# -- array-level kernels (used directly by the solver hot loops) -------------

def diff_values(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    pad = [(0, 0)] * values.ndim
    pad[axis] = (1, 1)
    return np.diff(np.pad(values, pad), axis=axis) / h


def div_values(flux: np.ndarray, axis: int, h: float) -> np.ndarray:
    return np.diff(flux, axis=axis) / h


# -- public operations --------------------------------------------------------

def forward_diff(u: GridFunction, axis: int) -> FaceField:
    """Forward difference ``(u(x + h e_i) - u(x)) / h`` on the faces along ``axis``."""
    u.grid._check_axis(axis)
    return FaceField(u.grid, axis, diff_values(u.values, axis, u.grid.h_per_axis[axis]))


def adjoint_div(flux: FaceField, axis: int) -> GridFunction:
    """Negative adjoint of :func:`forward_diff` (discrete divergence along ``axis``)."""
    if flux.axis != axis:
        raise GridError(f"flux lives on axis {flux.axis}, not {axis}")
    return GridFunction(flux.grid, div_values(flux.values, axis, flux.grid.h_per_axis[axis]))


def _scaled_norm(values: np.ndarray, p: float, vol: float) -> float:
    if p < 1:
        raise GridError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(values)
    m = float(np.max(a, initial=0.0))
    if m == 0.0:
        return 0.0
    # factor out the max so tiny or huge values neither underflow nor overflow
    return m * float((np.sum((a / m) ** p) * vol) ** (1.0 / p))


def lp_norm(u: GridFunction, p: float) -> float:
    """Midpoint-quadrature ``L^p`` norm, ``(sum |u|^p h^d)^(1/p)``."""
    return _scaled_norm(u.values, p, u.grid.cell_volume)


def face_lp_norm(flux: FaceField, p: float) -> float:
    return _scaled_norm(flux.values, p, flux.grid.cell_volume)


def seminorm(u: GridFunction, axis: int, p: float) -> float:
    """Directional seminorm ``[u]_{i,p} = |D_i u|_{L^p}`` over the faces."""
    if p < 2:
        raise GridError(f"seminorm exponent must be >= 2, got {p}")
    return face_lp_norm(forward_diff(u, axis), p)


def inner(u: GridFunction, v: GridFunction) -> float:
    """Cell-volume weighted L^2 pairing."""
    u._same(v)
    return float(np.sum(u.values * v.values) * u.grid.cell_volume)


def face_inner(f: FaceField, g: FaceField) -> float:
    if f.grid != g.grid or f.axis != g.axis:
        raise GridError("face fields live on different lattices")
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def friedrichs_constant(grid: Grid) -> float:
    """Smallest ``C`` with ``|u|_2 <= C * sum_i [u]_{i,2}`` on this grid.

    Measured from the lowest eigenvalue of the discrete Dirichlet Laplacian,
    ``lam = sum_i (4/h_i^2) sin^2(pi h_i / 2)``; since
    ``sum_i [u]_i >= sqrt(sum_i [u]_i^2) >= sqrt(lam) |u|_2`` the constant
    ``1/sqrt(lam)`` is valid for every grid function.
    """
    lam = sum(4.0 / h**2 * np.sin(np.pi * h / 2) ** 2 for h in grid.h_per_axis)
    return float(1.0 / np.sqrt(lam))


# -- serialization --------------------------------------------------------------
#
# JSON: {"d": 1, "n": [n0], "values": [...]} with values flattened row-major.
# Binary frame: b"GFN1", uint32 d, uint32 n_i (d of them), float64 LE values
# row-major. Frames may be concatenated into one file.

_MAGIC = b"GFN1"


def to_record(u: GridFunction) -> dict:
    return {"d": u.grid.d, "n": list(u.grid.n_per_axis), "values": u.values.ravel().tolist()}


def from_record(rec: dict) -> GridFunction:
    grid = Grid(int(rec["d"]), tuple(rec["n"]))
    return GridFunction(grid, np.asarray(rec["values"], dtype=float).reshape(grid.shape))


def dumps_json(u: GridFunction) -> str:
    return json.dumps(to_record(u))


def write_binary(u: GridFunction, fh: BinaryIO):
    fh.write(_MAGIC)
    fh.write(struct.pack(f"<I{u.grid.d}I", u.grid.d, *u.grid.n_per_axis))
    fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_binary(fh: BinaryIO) -> GridFunction | None:
    """Read one frame; returns ``None`` at end of file."""
    magic = fh.read(4)
    if not magic:
        return None
    if magic != _MAGIC:
        raise GridError(f"bad frame magic {magic!r}")
    (d,) = struct.unpack("<I", fh.read(4))
    n = struct.unpack(f"<{d}I", fh.read(4 * d))
    grid = Grid(d, n)
    count = int(np.prod(n))
    vals = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(grid.shape)
    return GridFunction(grid, vals)

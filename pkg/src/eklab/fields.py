"""Periodic grids, fields and pseudo-spectral calculus on the torus.

Fields are thin immutable wrappers around numpy arrays.  Every spectral
operator here also has an array-level twin (leading underscore free
``*_array`` functions) that acts on the trailing ``dim`` axes, so that
stacks of time samples can be differentiated in one transform.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "TorusGrid",
    "ScalarField",
    "VectorField",
    "SymTensorField",
    "EKState",
    "SnapshotFormatError",
    "make_grid",
    "wavenumbers",
    "gradient_array",
    "divergence_array",
    "laplacian_array",
    "spectral_gradient",
    "spectral_divergence",
    "spectral_laplacian",
    "integrate",
    "integrate_array",
    "write_snapshot",
    "read_snapshot",
    "write_csv",
]

SNAPSHOT_MAGIC = b"EKF1"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIddI")


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus ``[0, L)^dim`` with ``N`` points per axis."""

    dim: int
    points_per_axis: int
    length: float = 2 * math.pi

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if n < 8 or n & (n - 1):
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def N(self) -> int:
        return self.points_per_axis

    @property
    def L(self) -> float:
        return self.length

    @property
    def spacing(self) -> float:
        return self.length / self.points_per_axis

    dx = spacing

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def nodes(self) -> np.ndarray:
        """1-D node coordinates ``x_j = j L / N``."""
        return np.arange(self.points_per_axis) * self.spacing

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape``, one per axis (ij indexing)."""
        x = self.nodes()
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


def make_grid(dim: int, N: int, L: float = 2 * math.pi) -> TorusGrid:
    return TorusGrid(int(dim), int(N), float(L))


def _check_values(grid: TorusGrid, values, name="values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != grid.shape:
        if arr.size == grid.size:
            arr = arr.reshape(grid.shape)
        else:
            raise ValueError(f"{name} has {arr.size} entries, grid needs {grid.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values))

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "ScalarField":
        return cls(grid, func(*grid.mesh()))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class VectorField:
    """``dim`` components stacked along axis 0."""

    grid: TorusGrid
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        expected = (self.grid.dim,) + self.grid.shape
        if arr.shape != expected:
            raise ValueError(f"vector data shape {arr.shape}, expected {expected}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("vector field contains non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_components(cls, components) -> "VectorField":
        components = list(components)
        grid = components[0].grid
        if any(c.grid != grid for c in components):
            raise ValueError("components live on different grids")
        return cls(grid, np.stack([c.values for c in components]))

    @property
    def components(self) -> tuple[ScalarField, ...]:
        return tuple(ScalarField(self.grid, c) for c in self.data)


@dataclass(frozen=True)
class SymTensorField:
    """Symmetric ``dim x dim`` tensor field stored in full (``data[i, j]``)."""

    grid: TorusGrid
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        d = self.grid.dim
        if arr.shape != (d, d) + self.grid.shape:
            raise ValueError(f"tensor data shape {arr.shape} does not match grid")
        arr = 0.5 * (arr + np.swapaxes(arr, 0, 1))
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i, j])


@dataclass(frozen=True)
class EKState:
    """Density and momentum ``m = rho u`` on one grid."""

    rho: ScalarField
    m: VectorField

    def __post_init__(self):
        if self.rho.grid != self.m.grid:
            raise ValueError("rho and m live on different grids")

    @property
    def grid(self) -> TorusGrid:
        return self.rho.grid

    @property
    def velocity(self) -> np.ndarray:
        return self.m.data / self.rho.values

    @classmethod
    def from_arrays(cls, grid: TorusGrid, rho, m) -> "EKState":
        m = np.asarray(m, dtype=float)
        if grid.dim == 1 and m.shape == grid.shape:
            m = m[None]
        return cls(ScalarField(grid, rho), VectorField(grid, m))


# -- spectral calculus ------------------------------------------------------


def wavenumbers(grid: TorusGrid, odd: bool = True) -> list[np.ndarray]:
    """Broadcastable wavenumber arrays for the ``rfftn`` layout of ``grid``.

    With ``odd`` the Nyquist entry is zeroed (used for first derivatives).
    """
    n, d = grid.N, grid.dim
    scale = 2 * math.pi / grid.L
    ks = []
    for axis in range(d):
        if axis == d - 1:
            k = np.fft.rfftfreq(n, 1.0 / n) * scale
        else:
            k = np.fft.fftfreq(n, 1.0 / n) * scale
        if odd:
            k[n // 2] = 0.0
        shape = [1] * d
        shape[axis] = k.size
        ks.append(k.reshape(shape))
    return ks


def _axes(grid):
    return tuple(range(-grid.dim, 0))


def _forward(values, grid):
    return np.fft.rfftn(values, axes=_axes(grid))


def _inverse(spec, grid):
    return np.fft.irfftn(spec, s=grid.shape, axes=_axes(grid))


def gradient_array(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Gradient over the trailing ``dim`` axes; the component axis is prepended."""
    spec = _forward(values, grid)
    return np.stack([_inverse(1j * k * spec, grid) for k in wavenumbers(grid)])


def divergence_array(data: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Divergence of a vector stack whose axis 0 indexes components."""
    ks = wavenumbers(grid)
    total = sum(1j * k * _forward(data[i], grid) for i, k in enumerate(ks))
    return _inverse(total, grid)


def laplacian_array(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    ksq = sum(k**2 for k in wavenumbers(grid, odd=False))
    return _inverse(-ksq * _forward(values, grid), grid)


def spectral_gradient(f: ScalarField) -> VectorField:
    return VectorField(f.grid, gradient_array(f.values, f.grid))


def spectral_divergence(v: VectorField) -> ScalarField:
    return ScalarField(v.grid, divergence_array(v.data, v.grid))


def spectral_laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, laplacian_array(f.values, f.grid))


def integrate_array(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Rectangle rule over the trailing ``dim`` axes."""
    return np.sum(values, axis=_axes(grid)) * grid.cell_volume


def integrate(f: ScalarField) -> float:
    return float(integrate_array(f.values, f.grid))


# -- snapshot and CSV I/O ---------------------------------------------------


class SnapshotFormatError(ValueError):
    """Malformed, truncated or incompatible snapshot file."""


def write_snapshot(state: EKState, time: float, path) -> None:
    """Write ``state`` at ``time`` in the little-endian EKF1 layout."""
    grid = state.grid
    fields = [state.rho.values] + list(state.m.data)
    header = _HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.dim, grid.N, grid.L, float(time), len(fields)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in fields:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))


def read_snapshot(path) -> tuple[EKState, float]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, dim, n, length, time, count = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    try:
        grid = make_grid(dim, n, length)
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: invalid grid header ({exc})") from exc
    if count != dim + 1:
        raise SnapshotFormatError(f"{path}: field count {count} does not match dim {dim}")
    expected = _HEADER.size + count * grid.size * 8
    if len(raw) != expected:
        raise SnapshotFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape((count,) + grid.shape)
    data = data.astype(float)
    return EKState.from_arrays(grid, data[0], data[1:]), time


def write_csv(path, header, rows) -> None:
    """CSV with a header row and round-trip (``repr``) float precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])

"""Discrete Besov seminorms, structure functions and rough test fields.

Increments are taken over grid-aligned shifts only, so every norm here is
an exact finite sum; the default shift ladder is dyadic (``dx, 2dx, ...``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .fields import ScalarField, TorusGrid

__all__ = [
    "StructureTable",
    "BesovEstimate",
    "dyadic_shifts",
    "structure_function",
    "structure_function_time",
    "lp_norm",
    "besov_seminorm",
    "besov_norm",
    "fit_exponent",
    "weierstrass_field",
    "weierstrass_spacetime",
    "random_fourier_field",
    "BesovExponentEstimator",
]


@dataclass(frozen=True)
class StructureTable:
    """Increment norms ``||w(. + xi) - w||_p`` against shift magnitude ``|xi|``."""

    shifts: np.ndarray
    norms: np.ndarray
    p: float
    kind: str = "space"

    def __post_init__(self):
        shifts = np.asarray(self.shifts, dtype=float)
        norms = np.asarray(self.norms, dtype=float)
        if shifts.shape != norms.shape:
            raise ValueError("shifts and norms differ in length")
        if np.any(np.diff(shifts) <= 0):
            raise ValueError("shifts must be strictly increasing")
        if np.any(norms < 0):
            raise ValueError("increment norms must be nonnegative")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "norms", norms)

    def __len__(self):
        return self.shifts.size

    def rows(self):
        return list(zip(self.shifts.tolist(), self.norms.tolist()))


@dataclass(frozen=True)
class BesovEstimate:
    p: float
    alpha: float
    seminorm: float
    r2: float
    shift_range: tuple[float, float]
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "alpha": None if self.degenerate else self.alpha,
            "seminorm": None if self.degenerate else self.seminorm,
            "r2": None if self.degenerate else self.r2,
            "shift_range": list(self.shift_range),
            "degenerate": self.degenerate,
        }


def dyadic_shifts(n: int, max_fraction: float = 0.5) -> np.ndarray:
    """Integer shifts ``1, 2, 4, ...`` up to ``max_fraction * n``."""
    out = []
    s = 1
    while s <= max_fraction * n:
        out.append(s)
        s *= 2
    return np.array(out, dtype=int)


def lp_norm(values, measure: float, p: float = 3) -> float:
    """``(sum |v|^p * measure)^(1/p)``: the unnormalised L^p norm."""
    return float((np.sum(np.abs(values) ** p) * measure) ** (1.0 / p))


def _as_values(w, grid):
    if isinstance(w, ScalarField):
        return w.values, w.grid
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    return np.asarray(w, dtype=float), grid


def structure_function(w, p: float = 3, shifts=None, grid: TorusGrid | None = None) -> StructureTable:
    """Spatial increment norms with periodic wrap.

    ``w`` is a ``ScalarField`` or an array whose trailing ``dim`` axes are
    spatial (leading axes, e.g. time, are included in the norm).  ``shifts``
    are integer grid offsets; in 2-D the sup over the two axis directions of
    equal magnitude is reported.
    """
    values, grid = _as_values(w, grid)
    n = grid.N
    shifts = dyadic_shifts(n) if shifts is None else np.asarray(shifts)
    if shifts.size == 0:
        raise ValueError("empty shift set")
    if np.any(shifts != np.round(shifts)):
        raise ValueError("shifts must be integer grid offsets")
    shifts = shifts.astype(int)
    if np.any(shifts <= 0) or np.any(shifts >= n):
        raise ValueError("shifts must lie in [1, N)")
    lead = values.ndim - grid.dim
    measure = grid.cell_volume
    norms = []
    for s in shifts:
        best = 0.0
        for axis in range(grid.dim):
            diff = np.roll(values, -s, axis=lead + axis) - values
            best = max(best, lp_norm(diff, measure, p))
        norms.append(best)
    return StructureTable(shifts * grid.dx, np.array(norms), p, "space")


def structure_function_time(w, dt: float, p: float = 3, shifts=None, measure: float = 1.0) -> StructureTable:
    """Time increments of a space-time array (time on axis 0).

    The overlap is truncated: ``w[tau:] - w[:-tau]``.  ``measure`` is the
    spatial cell volume so that the result is a space-time L^p norm.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    shifts = dyadic_shifts(n) if shifts is None else np.asarray(shifts, dtype=int)
    if shifts.size == 0:
        raise ValueError("empty shift set")
    if np.any(shifts <= 0) or np.any(shifts >= n):
        raise ValueError("time shifts must lie in [1, n_samples)")
    norms = [lp_norm(w[s:] - w[:-s], measure * dt, p) for s in shifts]
    return StructureTable(shifts * dt, np.array(norms), p, "time")


def besov_seminorm(w, alpha: float, p: float = 3, shifts=None, grid=None, table: StructureTable | None = None) -> float:
    """``max over the shift table of |xi|^-alpha ||w(.+xi) - w||_p``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if table is None:
        table = structure_function(w, p, shifts, grid)
    if len(table) == 0:
        raise ValueError("empty shift set")
    return float(np.max(table.shifts ** (-alpha) * table.norms))


def besov_norm(w, alpha: float, p: float = 3, shifts=None, grid=None) -> float:
    """``||w||_p + seminorm``."""
    values, grid = _as_values(w, grid)
    return lp_norm(values, grid.cell_volume, p) + besov_seminorm(values, alpha, p, shifts, grid)


def fit_exponent(
    table: StructureTable,
    drop_ends: bool = True,
    shift_range: tuple[float, float] | None = None,
) -> BesovEstimate:
    """Least-squares slope of ``log norm`` against ``log |xi|``.

    By default the smallest and largest shifts are discarded; ``shift_range``
    restricts the fit to ``lo <= |xi| <= hi`` instead.
    """
    shifts, norms = table.shifts, table.norms
    if np.unique(shifts).size < 5:
        raise ValueError("need at least 5 distinct shift magnitudes")
    if shift_range is not None:
        keep = (shifts >= shift_range[0]) & (shifts <= shift_range[1])
    else:
        keep = np.ones(shifts.size, dtype=bool)
        if drop_ends:
            keep[0] = keep[-1] = False
    xs, ys = shifts[keep], norms[keep]
    used = (float(xs.min()), float(xs.max())) if xs.size else (math.nan, math.nan)
    if xs.size < 2 or np.any(ys <= 0):
        return BesovEstimate(table.p, math.nan, math.nan, math.nan, used, degenerate=True)
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    if abs(slope) < 1e-14:
        slope = 0.0
    seminorm = float(np.max(xs ** (-slope) * ys))
    return BesovEstimate(table.p, float(slope), seminorm, float(r2), used)


# -- rough field generators --------------------------------------------------


def _phases(phases, count, seed=None):
    if phases is None:
        return np.zeros(count)
    if isinstance(phases, (int, np.integer)):
        return np.random.default_rng(phases).uniform(0, 2 * np.pi, count)
    phases = np.asarray(phases, dtype=float)
    if phases.size != count:
        raise ValueError(f"need {count} phases, got {phases.size}")
    return phases


def weierstrass_field(alpha: float, J: int, grid: TorusGrid, phases=None) -> ScalarField:
    """Lacunary series ``sum_{j<=J} 2^(-alpha j) cos(2^j x + theta_j)``.

    ``x`` is measured in units where the torus has length ``2 pi``.  In 2-D
    the series is applied along each axis and averaged.  ``phases`` may be
    an array of ``J + 1`` angles, an integer seed, or ``None`` (all zero).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if 2**J >= grid.N // 2:
        raise ValueError(f"2^J = {2**J} must stay below N/2 = {grid.N // 2}")
    theta = _phases(phases, J + 1)
    scale = 2 * np.pi / grid.L
    out = np.zeros(grid.shape)
    for x in grid.mesh():
        for j in range(J + 1):
            out += 2.0 ** (-alpha * j) * np.cos(2**j * scale * x + theta[j])
    return ScalarField(grid, out / grid.dim)


def weierstrass_spacetime(
    alpha: float,
    J: int,
    grid: TorusGrid,
    times,
    omega: float,
    phases=None,
    time_phases=None,
    spatial_order: float = 0.0,
) -> np.ndarray:
    """Space-time series ``sum_j 2^(-(alpha+s) j) cos(2^j x + theta_j) cos(2^j omega t + vartheta_j)``.

    ``spatial_order`` (``s``) adds extra spatial smoothness while leaving the
    time regularity of the ``s``-th spatial derivative at ``alpha``.  Returns
    an array of shape ``(len(times), *grid.shape)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if 2**J >= grid.N // 2:
        raise ValueError(f"2^J = {2**J} must stay below N/2 = {grid.N // 2}")
    theta = _phases(phases, J + 1)
    vartheta = _phases(time_phases, J + 1)
    times = np.asarray(times, dtype=float)
    scale = 2 * np.pi / grid.L
    out = np.zeros((times.size,) + grid.shape)
    for x in grid.mesh():
        for j in range(J + 1):
            amp = 2.0 ** (-(alpha + spatial_order) * j)
            tfac = np.cos(2**j * omega * times + vartheta[j])
            sfac = np.cos(2**j * scale * x + theta[j])
            out += amp * tfac.reshape((-1,) + (1,) * grid.dim) * sfac
    return out / grid.dim


def random_fourier_field(alpha: float, seed: int, grid: TorusGrid, kmax: int | None = None) -> ScalarField:
    """``sum_{k=1}^{kmax} k^-(alpha + 1/2) cos(k x + theta_k)`` with seeded phases."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    kmax = grid.N // 2 - 1 if kmax is None else int(kmax)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, max(kmax, 0))
    out = np.zeros(grid.shape)
    if kmax <= 0:
        return ScalarField(grid, out)
    k = np.arange(1, kmax + 1)
    amp = k ** (-(alpha + 0.5))
    # synthesise through the inverse FFT: identical to the cosine sum on the grid
    for x_axis in range(grid.dim):
        spec = np.zeros(grid.N // 2 + 1, dtype=complex)
        spec[1 : kmax + 1] = 0.5 * amp * np.exp(1j * theta) * grid.N
        line = np.fft.irfft(spec, n=grid.N)
        shape = [1] * grid.dim
        shape[x_axis] = grid.N
        out = out + line.reshape(shape)
    return ScalarField(grid, out / grid.dim)


class BesovExponentEstimator(BaseEstimator):
    """Estimate the Besov exponent of a field from its structure function.

    Parameters
    ----------
    p : float
        Integrability exponent of the increment norm (3 matches the energy
        conservation hypothesis; 2 is available for diagnostics).
    shifts : array-like of int or None
        Grid offsets; ``None`` uses the dyadic ladder.
    drop_ends : bool
        Discard the smallest and largest shift from the fit.
    shift_range : (float, float) or None
        Explicit fit window in physical units; overrides ``drop_ends``.
    axis : {"space", "time"}
        Which increments to measure for space-time input.
    """

    def __init__(self, p=3, shifts=None, drop_ends=True, shift_range=None, axis="space"):
        self.p = p
        self.shifts = shifts
        self.drop_ends = drop_ends
        self.shift_range = shift_range
        self.axis = axis

    def fit(self, X, y=None, grid=None, dt=None):
        if self.axis == "space":
            self.table_ = structure_function(X, self.p, self.shifts, grid)
        elif self.axis == "time":
            if dt is None:
                raise ValueError("time increments need dt")
            values = np.asarray(X.values if isinstance(X, ScalarField) else X, dtype=float)
            measure = grid.cell_volume if grid is not None else 1.0
            self.table_ = structure_function_time(values, dt, self.p, self.shifts, measure)
        else:
            raise ValueError(f"axis must be 'space' or 'time', got {self.axis!r}")
        self.estimate_ = fit_exponent(self.table_, self.drop_ends, self.shift_range)
        self.alpha_ = self.estimate_.alpha
        self.seminorm_ = self.estimate_.seminorm
        self.r2_ = self.estimate_.r2
        return self

    def score(self, X=None, y=None):
        """Coefficient of determination of the log-log fit."""
        check_is_fitted(self, "estimate_")
        return self.r2_

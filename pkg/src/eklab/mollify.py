"""Space-time mollification and the commutator errors of the energy balance.

The kernel is the tensorised smooth bump ``exp(-1/(1-z^2))``.  In space it
is sampled on the grid and renormalised to unit discrete mass, so spatial
mollification is an exact discrete periodic convolution (a Fourier
multiplier, hence it commutes with spectral derivatives).  In time the
kernel is either sampled at the trajectory cadence (``valid`` convolution,
the window shrinks by ``eps`` at both ends) or, for exactly time-periodic
band-limited data, applied as the exact Fourier multiplier of the
continuous bump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .besov import lp_norm
from .constitutive import (
    Laws,
    check_vacuum,
    stress,
    time_integral,
)
from .fields import (
    ScalarField,
    TorusGrid,
    divergence_array,
    gradient_array,
    integrate_array,
    laplacian_array,
)

MIN_CELLS = 4  # the support (-eps, eps) must overlap this many cells, i.e. eps > spacing


class ResolutionError(ValueError):
    """``eps`` is too small for the sampling or too large for the domain."""


def bump(z):
    """Unnormalised profile ``exp(-1/(1 - z^2))`` on ``|z| < 1``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


_QUAD_Z = np.linspace(-1.0, 1.0, 4001)
_QUAD_W = bump(_QUAD_Z)
_QUAD_W = _QUAD_W / _QUAD_W.sum()


def bump_transform(xi):
    """``int eta(z) cos(xi z) dz`` for the unit-mass continuous bump.

    Trapezoidal quadrature; spectrally accurate because every derivative of
    the bump vanishes at the support ends.
    """
    xi = np.asarray(xi, dtype=float)
    flat = xi.reshape(-1)
    out = np.empty(flat.size)
    for start in range(0, flat.size, 256):
        chunk = flat[start : start + 256]
        out[start : start + 256] = np.cos(np.outer(chunk, _QUAD_Z)) @ _QUAD_W
    return out.reshape(xi.shape)


@dataclass(frozen=True)
class MollifierKernel:
    """Tensorised bump ``eta^eps`` with support radius ``eps`` per coordinate."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def weights(self, spacing: float) -> tuple[np.ndarray, np.ndarray]:
        """Integer offsets inside the support and their unit-sum weights."""
        half = math.ceil(self.eps / spacing - 1e-12) - 1
        offsets = np.arange(-half, half + 1)
        w = bump(offsets * spacing / self.eps)
        return offsets, w / w.sum()

    def check_space(self, grid: TorusGrid) -> None:
        if self.eps <= grid.dx * (1 + 1e-9):
            raise ResolutionError(
                f"eps={self.eps:.4g} overlaps fewer than {MIN_CELLS} cells (dx={grid.dx:.4g})"
            )
        if self.eps >= grid.L / 2:
            raise ResolutionError(f"eps={self.eps:.4g} too large for torus of length {grid.L:.4g}")

    def check_time(self, n: int, dt: float, periodic: bool) -> None:
        if periodic:
            if self.eps >= n * dt / 2:
                raise ResolutionError(f"eps={self.eps:.4g} exceeds half the time period")
            return
        if self.eps <= dt * (1 + 1e-9):
            raise ResolutionError(
                f"eps={self.eps:.4g} overlaps fewer than {MIN_CELLS} sample intervals (dt={dt:.4g})"
            )
        half = self.weights(dt)[0][-1]
        if n - 2 * half < 1:
            raise ResolutionError(f"eps={self.eps:.4g} leaves no interior time window")

    def space_multiplier(self, grid: TorusGrid) -> np.ndarray:
        offsets, w = self.weights(grid.dx)
        line = np.zeros(grid.N)
        np.add.at(line, offsets % grid.N, w)
        mult1 = np.fft.rfft(line).real if grid.dim == 1 else np.fft.fft(line).real
        if grid.dim == 1:
            return mult1
        mult_last = np.fft.rfft(line).real
        return mult1[:, None] * mult_last[None, :]

    def time_multiplier(self, n: int, dt: float) -> np.ndarray:
        omega = 2 * np.pi * np.fft.rfftfreq(n, dt)
        return bump_transform(self.eps * omega)

    def time_halfwidth(self, dt: float) -> int:
        return int(self.weights(dt)[0][-1])


def mollify_space(values: np.ndarray, grid: TorusGrid, kernel: MollifierKernel) -> np.ndarray:
    """Periodic spatial convolution over the trailing ``dim`` axes."""
    kernel.check_space(grid)
    axes = tuple(range(-grid.dim, 0))
    spec = np.fft.rfftn(values, axes=axes) * kernel.space_multiplier(grid)
    return np.fft.irfftn(spec, s=grid.shape, axes=axes)


def mollify_time(values: np.ndarray, dt: float, kernel: MollifierKernel, periodic: bool = False) -> np.ndarray:
    """Convolution along axis 0.

    Sampled mode returns only the samples whose kernel window fits inside
    the data (``n - 2*halfwidth`` of them); periodic mode returns all.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    kernel.check_time(n, dt, periodic)
    if periodic:
        mult = kernel.time_multiplier(n, dt).reshape((-1,) + (1,) * (values.ndim - 1))
        return np.fft.irfft(np.fft.rfft(values, axis=0) * mult, n=n, axis=0)
    offsets, w = kernel.weights(dt)
    half = offsets[-1]
    out = np.zeros((n - 2 * half,) + values.shape[1:])
    for off, wk in zip(offsets, w):
        out += wk * values[half + off : n - half + off]
    return out


def mollify(w, kernel: MollifierKernel, grid: TorusGrid | None = None, dt: float | None = None, periodic: bool = False):
    """Mollify a field.

    A ``ScalarField`` (time independent) is mollified in space only: the
    normalised kernel leaves a time-constant factor unchanged.  A raw array
    with ``dt`` is treated as space-time data with time on axis 0 and is
    returned on the shrunken window (see :func:`mollify_time`).
    """
    if isinstance(w, ScalarField):
        return ScalarField(w.grid, mollify_space(w.values, w.grid, kernel))
    if grid is None:
        raise ValueError("grid is required for array input")
    out = mollify_space(np.asarray(w, dtype=float), grid, kernel)
    if dt is None:
        return out
    return mollify_time(out, dt, kernel, periodic)


def time_window(n: int, dt: float, kernel: MollifierKernel, periodic: bool) -> slice:
    """Indices of the raw samples that survive time mollification."""
    if periodic:
        return slice(0, n)
    half = kernel.time_halfwidth(dt)
    return slice(half, n - half)


def nonlinear_commutator(f, v, kernel: MollifierKernel, grid=None, dt=None, periodic=False):
    """``f(v^eps) - (f o v)^eps`` on the mollified window."""
    if isinstance(v, ScalarField):
        ve = mollify_space(v.values, v.grid, kernel)
        return ScalarField(v.grid, f(ve) - mollify_space(f(v.values), v.grid, kernel))
    v = np.asarray(v, dtype=float)
    return f(mollify(v, kernel, grid, dt, periodic)) - mollify(f(v), kernel, grid, dt, periodic)


# -- commutator fields -------------------------------------------------------


def time_derivative_fd4(values: np.ndarray, dt: float, periodic: bool = False) -> np.ndarray:
    """Fourth-order central difference along axis 0 (interior samples only
    unless ``periodic``)."""
    if periodic:
        return (
            -np.roll(values, -2, axis=0) + 8 * np.roll(values, -1, axis=0)
            - 8 * np.roll(values, 1, axis=0) + np.roll(values, 2, axis=0)
        ) / (12 * dt)
    if values.shape[0] < 5:
        raise ResolutionError("fourth-order time derivative needs at least 5 samples")
    return (-values[4:] + 8 * values[3:-1] - 8 * values[1:-3] + values[:-4]) / (12 * dt)


@dataclass(frozen=True)
class CommutatorFields:
    """The seven commutator densities on a common space-time window.

    ``r`` has shape ``(7, n_window, *grid.shape)``; sample ``k`` sits at time
    ``t0 + k dt``.  ``support`` is the open interval that a test function's
    time support must lie in.
    """

    grid: TorusGrid
    t0: float
    dt: float
    eps: float
    r: np.ndarray
    support: tuple[float, float]
    mollified: dict

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.r.shape[1])


def _mollified_primitives(traj, kernel: MollifierKernel, laws: Laws) -> dict:
    grid, dt = traj.grid, traj.dt_sample
    periodic = bool(getattr(traj, "time_periodic", False))
    n = traj.n_samples
    kernel.check_space(grid)
    kernel.check_time(n, dt, periodic)

    def moll(a):
        # a: (n, [comp...], *space); time is axis 0
        return mollify_time(mollify_space(a, grid, kernel), dt, kernel, periodic)

    rho = traj.rho_array
    m = traj.m_array                       # (n, d, ...)
    u = m / rho[:, None]
    d = grid.dim
    # spatial derivatives/products are pointwise per sample; batch over time
    q = np.moveaxis(gradient_array(rho, grid), 0, 1)          # (n, d, ...)
    r = laplacian_array(rho, grid)
    s_raw = np.moveaxis(
        stress(rho, np.moveaxis(q, 1, 0), r, laws.capillarity, laws.rho_min), (0, 1), (1, 2)
    )                                                          # (n, d, d, ...)
    p_raw = laws.energy.pressure(rho)
    mu_raw = m[:, :, None] * u[:, None, :]                    # (n, d, d, ...)

    rho_e = moll(rho)
    check_vacuum(rho_e, laws.rho_min, "mollified density")
    return {
        "periodic": periodic,
        "window": time_window(n, dt, kernel, periodic),
        "rho": rho_e,
        "m": moll(m),
        "u": moll(u),
        "mu": moll(mu_raw),
        "p": moll(p_raw),
        "S": moll(s_raw),
        "d": d,
    }


def commutator_fields(traj, kernel: MollifierKernel, laws: Laws) -> CommutatorFields:
    """Assemble ``r_1 ... r_7`` from a trajectory.

    Spatial derivatives are spectral; the time derivative in ``r_1`` is a
    fourth-order central difference, which trims two further samples at
    each end of the window (sampled mode).
    """
    grid, dt = traj.grid, traj.dt_sample
    mp = _mollified_primitives(traj, kernel, laws)
    periodic = mp["periodic"]
    cap, energy = laws.capillarity, laws.energy
    rho_e, m_e, u_e = mp["rho"], mp["m"], mp["u"]

    # batch helpers acting with the time axis leading
    def grad(a):
        return np.moveaxis(gradient_array(a, grid), 0, 1)

    def div(v):
        return divergence_array(np.moveaxis(v, 1, 0), grid)

    def tdiv(t):
        # (n, d, d, ...) -> (n, d, ...)
        return np.stack([div(t[:, i]) for i in range(grid.dim)], axis=1)

    q_e = grad(rho_e)
    lap_e = laplacian_array(rho_e, grid)
    rho_u_e = rho_e[:, None] * u_e
    comm = rho_u_e - m_e                                       # rho^e u^e - (rho u)^e
    c = div(comm)

    r1_full = time_derivative_fd4(comm, dt, periodic)
    trim = slice(None) if periodic else slice(2, -2)

    def dot(a, b):
        return np.sum(a * b, axis=1)

    r2 = dot(tdiv(m_e[:, :, None] * u_e[:, None, :] - mp["mu"]), u_e)
    r3 = dot(grad(energy.pressure(rho_e) - mp["p"]), u_e)
    s_e = np.moveaxis(
        stress(rho_e, np.moveaxis(q_e, 1, 0), lap_e, cap, laws.rho_min), (0, 1), (1, 2)
    )
    r4 = -dot(tdiv(s_e - mp["S"]), u_e)
    qsq = np.sum(q_e**2, axis=1)
    r5 = c * energy.dh(rho_e)
    r6 = -c * 0.5 * cap.dkappa(rho_e) * qsq
    r7 = -c * cap.kappa(rho_e) * lap_e
    r1 = dot(r1_full, u_e[trim])

    r = np.stack([r1, r2[trim], r3[trim], r4[trim], r5[trim], r6[trim], r7[trim]])
    win = mp["window"]
    first = win.start + (0 if periodic else 2)
    t0 = traj.t0 + first * dt
    if periodic:
        support = (traj.t0 + kernel.eps, traj.T - kernel.eps)
    else:
        support = (t0, t0 + (r.shape[1] - 1) * dt)
    mollified = {
        "rho": rho_e[trim],
        "m": m_e[trim],
        "u": u_e[trim],
    }
    return CommutatorFields(grid, t0, dt, kernel.eps, r, support, mollified)


def weighted_residuals(cf: CommutatorFields, phi) -> np.ndarray:
    """``R_i = int int r_i phi dx dt`` for i = 1..7 (Simpson in time)."""
    phi.check_support(*cf.support)
    times = cf.times
    chi = phi.time(times)
    psi = phi.space(*cf.grid.mesh())
    per_time = integrate_array(cf.r * psi, cf.grid) * chi      # (7, n)
    return np.array([time_integral(row, cf.dt) for row in per_time])


def mollified_energy_terms(cf: CommutatorFields, phi, laws: Laws) -> float:
    """``int int E_eps d_t phi + F_eps . grad phi`` on the commutator window.

    The last flux term uses ``div (rho u)^eps``; with it the mollified
    balance ``d_t E_eps + div F_eps = sum r_i`` holds exactly for smooth
    solutions and every test function.
    """
    grid = cf.grid
    cap, energy = laws.capillarity, laws.energy
    rho, m, u = cf.mollified["rho"], cf.mollified["m"], cf.mollified["u"]
    q = np.moveaxis(gradient_array(rho, grid), 0, 1)
    lap = laplacian_array(rho, grid)
    qsq = np.sum(q**2, axis=1)
    usq = np.sum(u**2, axis=1)
    kap = cap.kappa(rho)
    e = 0.5 * rho * usq + energy.h(rho) + 0.5 * kap * qsq
    bracket = energy.dh(rho) - 0.5 * cap.dkappa(rho) * qsq - kap * lap
    div_m = divergence_array(np.moveaxis(m, 1, 0), grid)
    flux = m * (0.5 * usq)[:, None] + rho[:, None] * u * bracket[:, None] + (kap * div_m)[:, None] * q

    mesh = grid.mesh()
    times = cf.times
    psi = phi.space(*mesh)
    grad_psi = phi.space_gradient(*mesh)
    chi, dchi = phi.time(times), phi.time_derivative(times)
    per_time = (
        integrate_array(e * psi, grid) * dchi
        + integrate_array(np.sum(flux * grad_psi[None], axis=1), grid) * chi
    )
    return time_integral(per_time, cf.dt)


def mollified_energy_identity_residual(traj, kernel: MollifierKernel, phi, laws: Laws) -> float:
    """``int int [E_eps d_t phi + F_eps . grad phi] + sum_i R_i``; zero in exact arithmetic."""
    cf = commutator_fields(traj, kernel, laws)
    return mollified_energy_terms(cf, phi, laws) + float(np.sum(weighted_residuals(cf, phi)))


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    energy_terms: float
    sum_R: float
    error_estimate: float


def identity_check(traj, kernel: MollifierKernel, phi, laws: Laws, refined=None) -> IdentityCheck:
    """Identity residual with a discretisation-error estimate.

    The estimate adds ``|res - res(every second sample)|`` (time quadrature
    and finite differences) and, when ``refined`` is given (the same run with
    a smaller solver step, sampled at the same times), ``|res - res(refined)|``
    which measures the time-stepping error of the trajectory itself.
    """

    def evaluate(tr):
        cf = commutator_fields(tr, kernel, laws)
        terms = mollified_energy_terms(cf, phi, laws)
        return terms, float(np.sum(weighted_residuals(cf, phi)))

    energy_terms, sum_r = evaluate(traj)
    res = energy_terms + sum_r
    estimate = abs(res - sum(evaluate(traj.subsample(2))))
    if refined is not None:
        if refined.n_samples != traj.n_samples or not np.isclose(refined.dt_sample, traj.dt_sample):
            raise ValueError("refined trajectory must share the sample times")
        estimate += abs(res - sum(evaluate(refined)))
    return IdentityCheck(res, energy_terms, sum_r, estimate)


# -- static-field mollification bounds --------------------------------------


def mollification_error(w: ScalarField, kernel: MollifierKernel, p: float = 3) -> float:
    """``||w^eps - w||_p``."""
    diff = mollify_space(w.values, w.grid, kernel) - w.values
    return lp_norm(diff, w.grid.cell_volume, p)


def mollified_gradient_norm(w: ScalarField, kernel: MollifierKernel, p: float = 3) -> float:
    """``||grad w^eps||_p`` (Euclidean norm of the gradient pointwise)."""
    g = gradient_array(mollify_space(w.values, w.grid, kernel), w.grid)
    return lp_norm(np.sqrt(np.sum(g**2, axis=0)), w.grid.cell_volume, p)


def composition_gradient_norm(f_prime, w: ScalarField, kernel: MollifierKernel, p: float = 3) -> float:
    """``||grad f(w^eps)||_p`` computed as ``f'(w^eps) grad w^eps``."""
    we = mollify_space(w.values, w.grid, kernel)
    g = gradient_array(we, w.grid) * f_prime(we)
    return lp_norm(np.sqrt(np.sum(g**2, axis=0)), w.grid.cell_volume, p)


def max_shift_increment(w: ScalarField, radius: float, p: float = 3) -> float:
    """``sup_{|s| <= radius} ||w - w(. - s)||_p`` over grid-aligned shifts."""
    grid = w.grid
    kmax = int(math.floor(radius / grid.dx + 1e-9))
    best = 0.0
    for axis in range(grid.dim):
        for k in range(1, kmax + 1):
            for sign in (1, -1):
                diff = w.values - np.roll(w.values, sign * k, axis=axis)
                best = max(best, lp_norm(diff, grid.cell_volume, p))
    return best


def quadratic_commutator_ratio(f, w: ScalarField, kernel: MollifierKernel, q: float = 1.5) -> float:
    """``||f(w^eps) - f^eps(w)||_q / (||w^eps - w||_2q^2 + sup_shift ||w - w(.-s)||_2q^2)``."""
    comm = nonlinear_commutator(f, w, kernel).values
    num = lp_norm(comm, w.grid.cell_volume, q)
    den = mollification_error(w, kernel, 2 * q) ** 2 + max_shift_increment(w, kernel.eps, 2 * q) ** 2
    return num / den


class Mollifier(TransformerMixin, BaseEstimator):
    """Space-time mollifier with the scikit-learn transformer interface.

    ``fit`` records the sampling of a trajectory (grid, time step, whether
    the data is time periodic); ``transform`` mollifies arrays whose axis 0
    is time, or ``ScalarField`` objects in space only.
    """

    def __init__(self, eps=0.1, periodic_time="auto"):
        self.eps = eps
        self.periodic_time = periodic_time

    def fit(self, X, y=None):
        self.kernel_ = MollifierKernel(self.eps)
        if isinstance(X, ScalarField):
            self.grid_, self.dt_, self.periodic_ = X.grid, None, False
            self.kernel_.check_space(X.grid)
            return self
        self.grid_ = X.grid
        self.dt_ = X.dt_sample
        auto = bool(getattr(X, "time_periodic", False))
        self.periodic_ = auto if self.periodic_time == "auto" else bool(self.periodic_time)
        self.kernel_.check_space(self.grid_)
        self.kernel_.check_time(X.n_samples, self.dt_, self.periodic_)
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        if isinstance(X, ScalarField):
            return mollify(X, self.kernel_)
        return mollify(X, self.kernel_, self.grid_, self.dt_, self.periodic_)


__all__ = [
    "ResolutionError",
    "bump",
    "bump_transform",
    "MollifierKernel",
    "mollify_space",
    "mollify_time",
    "mollify",
    "time_window",
    "nonlinear_commutator",
    "time_derivative_fd4",
    "CommutatorFields",
    "commutator_fields",
    "weighted_residuals",
    "mollified_energy_terms",
    "mollified_energy_identity_residual",
    "IdentityCheck",
    "identity_check",
    "mollification_error",
    "mollified_gradient_norm",
    "composition_gradient_norm",
    "max_shift_increment",
    "quadratic_commutator_ratio",
    "Mollifier",
]

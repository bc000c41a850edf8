"""Time evolution of the Euler-Korteweg system.

Two independent routes are provided:

* a pseudo-spectral method-of-lines solver for the conservative form,
  advanced with classical RK4;
* a split-step Fourier solver for ``i eps0 psi_t = -(eps0^2/2) lap psi +
  h'(|psi|^2) psi`` whose Madelung transform gives QHD reference solutions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .constitutive import (
    EnergyLaw,
    Laws,
    QHDCapillarity,
    VacuumError,
    check_vacuum,
    energy_density_array,
    stress,
)
from .fields import (
    EKState,
    TorusGrid,
    divergence_array,
    gradient_array,
    integrate_array,
    laplacian_array,
    wavenumbers,
)

log = logging.getLogger(__name__)

DEFAULT_CFL = 0.25


class SimulationError(RuntimeError):
    """Non-finite values or vacuum encountered during time stepping."""


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution ``(rho, m)`` on ``[t0, t0 + (n-1) dt_sample]``.

    ``rho_array`` has shape ``(n, *grid.shape)`` and ``m_array`` shape
    ``(n, dim, *grid.shape)``.  ``time_periodic`` marks data that is exactly
    periodic with period ``n * dt_sample`` (synthetic fields); mollification
    then uses periodic wrap in time.
    """

    grid: TorusGrid
    t0: float
    dt_sample: float
    rho_array: np.ndarray
    m_array: np.ndarray
    laws: Laws | None = None
    time_periodic: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rho = np.asarray(self.rho_array, dtype=float)
        m = np.asarray(self.m_array, dtype=float)
        n = rho.shape[0]
        if rho.shape[1:] != self.grid.shape:
            raise ValueError("rho_array does not match the grid")
        if m.shape != (n, self.grid.dim) + self.grid.shape:
            raise ValueError("m_array does not match rho_array / grid")
        if not self.dt_sample > 0:
            raise ValueError("dt_sample must be positive")
        rho_min = self.laws.rho_min if self.laws is not None else 0.0
        if self.laws is not None:
            check_vacuum(rho, rho_min, "trajectory density")
        object.__setattr__(self, "rho_array", rho)
        object.__setattr__(self, "m_array", m)

    @property
    def n_samples(self) -> int:
        return self.rho_array.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt_sample * np.arange(self.n_samples)

    @property
    def T(self) -> float:
        return self.t0 + (self.n_samples - 1) * self.dt_sample

    @property
    def samples(self) -> list[EKState]:
        return [EKState.from_arrays(self.grid, r, m) for r, m in zip(self.rho_array, self.m_array)]

    def subsample(self, every: int) -> "Trajectory":
        return Trajectory(
            self.grid,
            self.t0,
            self.dt_sample * every,
            self.rho_array[::every],
            self.m_array[::every],
            self.laws,
            self.time_periodic and self.n_samples % every == 0,
        )

    @classmethod
    def from_states(cls, states, t0, dt_sample, laws=None, **kw) -> "Trajectory":
        states = list(states)
        grid = states[0].grid
        rho = np.stack([s.rho.values for s in states])
        m = np.stack([s.m.data for s in states])
        return cls(grid, t0, dt_sample, rho, m, laws, **kw)


# -- direct Euler-Korteweg solver -------------------------------------------


def _dealias_mask(grid: TorusGrid) -> np.ndarray:
    ks = wavenumbers(grid, odd=False)
    kmax = (grid.N // 2) * 2 * math.pi / grid.L
    mask = np.ones(np.broadcast_shapes(*[k.shape for k in ks]), dtype=bool)
    for k in ks:
        mask &= np.abs(k) <= (2.0 / 3.0) * kmax
    return mask


def _filter(values, grid, mask):
    axes = tuple(range(-grid.dim, 0))
    return np.fft.irfftn(np.fft.rfftn(values, axes=axes) * mask, s=grid.shape, axes=axes)


def tensor_divergence(tensor: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Row-wise divergence ``(div T)_i = sum_j d_j T_ij``."""
    return np.stack([divergence_array(tensor[i], grid) for i in range(grid.dim)])


def rhs_arrays(rho, m, grid: TorusGrid, laws: Laws, dealias: bool = False):
    """Array-level right-hand side of the conservative system."""
    check_vacuum(rho, laws.rho_min)
    q = gradient_array(rho, grid)
    r = laplacian_array(rho, grid)
    flux = m[:, None] * m[None, :] / rho
    s = stress(rho, q, r, laws.capillarity, laws.rho_min)
    p = laws.energy.pressure(rho)
    drho = -divergence_array(m, grid)
    dm = -tensor_divergence(flux, grid) - gradient_array(p, grid) + tensor_divergence(s, grid)
    if dealias:
        mask = _dealias_mask(grid)
        drho = _filter(drho, grid, mask)
        dm = np.stack([_filter(c, grid, mask) for c in dm])
    return drho, dm


def ek_rhs(state: EKState, laws: Laws, dealias: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """``(d rho/dt, d m/dt)`` as arrays (``dm`` has the component axis first)."""
    return rhs_arrays(state.rho.values, state.m.data, state.grid, laws, dealias)


def _rk4_arrays(rho, m, dt, grid, laws, dealias=False):
    k1r, k1m = rhs_arrays(rho, m, grid, laws, dealias)
    k2r, k2m = rhs_arrays(rho + 0.5 * dt * k1r, m + 0.5 * dt * k1m, grid, laws, dealias)
    k3r, k3m = rhs_arrays(rho + 0.5 * dt * k2r, m + 0.5 * dt * k2m, grid, laws, dealias)
    k4r, k4m = rhs_arrays(rho + dt * k3r, m + dt * k3m, grid, laws, dealias)
    rho_new = rho + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    m_new = m + dt / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m)
    return rho_new, m_new


def step_rk4(state: EKState, dt: float, laws: Laws, dealias: bool = False) -> EKState:
    try:
        rho, m = _rk4_arrays(state.rho.values, state.m.data, dt, state.grid, laws, dealias)
    except VacuumError as exc:
        raise VacuumError(f"vacuum reached inside an RK4 stage (dt={dt:g}): {exc}") from exc
    return EKState.from_arrays(state.grid, rho, m)


def cfl_dt(state: EKState, laws: Laws, c_cfl: float = DEFAULT_CFL) -> float:
    """``c_cfl dx^2 / (eps0 + max sqrt(kappa rho) + max|u| dx)``."""
    rho = state.rho.values
    dx = state.grid.dx
    eps0 = laws.capillarity.eps0 if isinstance(laws.capillarity, QHDCapillarity) else 0.0
    wave = np.max(np.sqrt(laws.capillarity.kappa(rho) * rho))
    umax = np.max(np.abs(state.velocity)) if state.m.data.size else 0.0
    return c_cfl * dx**2 / (eps0 + wave + umax * dx)


def _plan_steps(T, dt, sample_every):
    if T < 0 or not dt > 0:
        raise ValueError("need T >= 0 and dt > 0")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if T == 0:
        return 0, dt
    # round the step count up to a multiple of sample_every; dt only shrinks
    blocks = math.ceil(T / (dt * sample_every) - 1e-9)
    n_steps = blocks * sample_every
    return n_steps, T / n_steps


def simulate(
    init: EKState,
    T: float,
    dt: float,
    laws: Laws,
    sample_every: int = 1,
    dealias: bool = False,
) -> Trajectory:
    """Integrate with RK4 and sample every ``sample_every`` steps.

    ``dt`` is reduced (never increased) so that an integer number of
    sampling blocks fits into ``T``.  The mass and total-energy time series
    are stored in ``trajectory.diagnostics``.
    """
    grid = init.grid
    n_steps, dt = _plan_steps(T, dt, sample_every)
    rho, m = init.rho.values.copy(), init.m.data.copy()
    check_vacuum(rho, laws.rho_min)
    rhos, ms = [rho], [m]
    for step in range(1, n_steps + 1):
        try:
            rho, m = _rk4_arrays(rho, m, dt, grid, laws, dealias)
        except VacuumError as exc:
            raise VacuumError(f"step {step} (t={step * dt:.6g}): {exc}") from exc
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(m))):
            raise SimulationError(f"non-finite values at step {step} (t={step * dt:.6g})")
        if step % sample_every == 0:
            rhos.append(rho)
            ms.append(m)
    traj = Trajectory(grid, 0.0, dt * sample_every if n_steps else dt, np.stack(rhos), np.stack(ms), laws)
    traj.diagnostics.update(energy_series(traj, laws))
    traj.diagnostics["dt"] = dt
    traj.diagnostics["n_steps"] = n_steps
    return traj


def energy_series(traj: Trajectory, laws: Laws) -> dict:
    """Mass and total energy at every sample."""
    grid = traj.grid
    mass = integrate_array(traj.rho_array, grid)
    energy = np.array(
        [integrate_array(energy_density_array(r, m, grid, laws), grid) for r, m in zip(traj.rho_array, traj.m_array)]
    )
    return {"t": traj.times, "mass": np.atleast_1d(mass), "total_energy": energy}


# -- nonlinear Schroedinger and the Madelung transform -----------------------


@dataclass(frozen=True)
class WaveField:
    grid: TorusGrid
    psi: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.psi, dtype=complex)
        if arr.shape != self.grid.shape:
            raise ValueError("wave function does not match the grid")
        if not np.all(np.isfinite(arr)):
            raise ValueError("wave function contains non-finite entries")
        object.__setattr__(self, "psi", arr)

    @property
    def real(self):
        return self.psi.real

    @property
    def imag(self):
        return self.psi.imag


def _ksq_full(grid: TorusGrid) -> np.ndarray:
    k = np.fft.fftfreq(grid.N, 1.0 / grid.N) * (2 * math.pi / grid.L)
    ks = np.meshgrid(*([k] * grid.dim), indexing="ij")
    return sum(kk**2 for kk in ks)


def _fft(a, grid):
    return np.fft.fftn(a, axes=tuple(range(-grid.dim, 0)))


def _ifft(a, grid):
    return np.fft.ifftn(a, axes=tuple(range(-grid.dim, 0)))


def nls_split_step(psi: WaveField, dt: float, eps0: float, law: EnergyLaw) -> WaveField:
    """One Strang step: half potential rotation, full kinetic step, half rotation."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = psi.grid
    kinetic = np.exp(-0.5j * eps0 * _ksq_full(grid) * dt)
    out = _strang(psi.psi, dt, eps0, law, grid, kinetic)
    return WaveField(grid, out)


def _potential(a, tau, eps0, law):
    return a * np.exp(-1j * law.dh(np.abs(a) ** 2) * tau / eps0)


def _strang(a, dt, eps0, law, grid, kinetic):
    a = _potential(a, 0.5 * dt, eps0, law)
    a = _ifft(kinetic * _fft(a, grid), grid)
    return _potential(a, 0.5 * dt, eps0, law)


def evolve_nls(
    psi0: WaveField,
    T: float,
    dt: float,
    eps0: float,
    law: EnergyLaw,
    sample_every: int = 1,
) -> tuple[list[WaveField], float]:
    """Repeated Strang steps; returns the sampled wave fields and the step used.

    Adjacent potential half-steps are fused; this is exact because the
    rotation leaves ``|psi|`` unchanged.
    """
    grid = psi0.grid
    n_steps, dt = _plan_steps(T, dt, sample_every)
    kinetic = np.exp(-0.5j * eps0 * _ksq_full(grid) * dt)
    a = psi0.psi.copy()
    out = [WaveField(grid, a)]
    block = sample_every
    for _ in range(n_steps // block):
        a = _potential(a, 0.5 * dt, eps0, law)
        for j in range(block):
            a = _ifft(kinetic * _fft(a, grid), grid)
            a = _potential(a, dt if j < block - 1 else 0.5 * dt, eps0, law)
        if not np.all(np.isfinite(a)):
            raise SimulationError("non-finite wave function")
        out.append(WaveField(grid, a))
    return out, dt


def nls_mass(psi: WaveField) -> float:
    return float(integrate_array(np.abs(psi.psi) ** 2, psi.grid))


def _complex_gradient(a, grid):
    return gradient_array(a.real, grid) + 1j * gradient_array(a.imag, grid)


def nls_energy(psi: WaveField, eps0: float, law: EnergyLaw) -> float:
    """``int (eps0^2/2) |grad psi|^2 + h(|psi|^2) dx``."""
    g = _complex_gradient(psi.psi, psi.grid)
    dens = 0.5 * eps0**2 * np.sum(np.abs(g) ** 2, axis=0) + law.h(np.abs(psi.psi) ** 2)
    return float(integrate_array(dens, psi.grid))


def madelung(psi: WaveField, eps0: float, rho_min: float = 1e-6) -> EKState:
    """``rho = |psi|^2``, ``m = eps0 Im(conj(psi) grad psi)``; refuses vacuum."""
    rho = np.abs(psi.psi) ** 2
    check_vacuum(rho, rho_min, "|psi|^2")
    g = _complex_gradient(psi.psi, psi.grid)
    m = eps0 * np.imag(np.conj(psi.psi)[None] * g)
    return EKState.from_arrays(psi.grid, rho, m)


def madelung_trajectory(
    psi0: WaveField,
    T: float,
    dt: float,
    eps0: float,
    law: EnergyLaw,
    sample_every: int = 1,
    rho_min: float = 1e-6,
) -> Trajectory:
    """NLS evolution followed by a Madelung transform of every sample."""
    waves, dt = evolve_nls(psi0, T, dt, eps0, law, sample_every)
    laws = Laws(law, QHDCapillarity(eps0), rho_min)
    states = [madelung(w, eps0, rho_min) for w in waves]
    dt_sample = dt * sample_every if len(waves) > 1 else dt
    traj = Trajectory.from_states(states, 0.0, dt_sample, laws)
    traj.diagnostics.update(energy_series(traj, laws))
    traj.diagnostics["nls_mass"] = np.array([nls_mass(w) for w in waves])
    traj.diagnostics["nls_energy"] = np.array([nls_energy(w, eps0, law) for w in waves])
    traj.diagnostics["dt"] = dt
    return traj

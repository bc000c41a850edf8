"""Energy and capillarity laws, Korteweg stress, energy density and flux.

Every pointwise quantity accepts numpy arrays; field-level wrappers compute
``grad rho`` and ``lap rho`` spectrally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .fields import (
    EKState,
    ScalarField,
    TorusGrid,
    VectorField,
    divergence_array,
    gradient_array,
    integrate,
    integrate_array,
    laplacian_array,
)

DEFAULT_RHO_MIN = 1e-6


class VacuumError(ValueError):
    """Density fell below the admissible threshold ``rho_min``."""


def check_vacuum(rho, rho_min: float = DEFAULT_RHO_MIN, what: str = "density"):
    low = np.min(rho)
    if not low >= rho_min:
        raise VacuumError(f"{what} reaches {low:.3e} < rho_min = {rho_min:.1e}")


# -- energy laws h(rho) -----------------------------------------------------


class EnergyLaw:
    """Internal energy ``h`` with derivatives up to third order."""

    def h(self, rho):
        raise NotImplementedError

    def dh(self, rho):
        raise NotImplementedError

    def d2h(self, rho):
        raise NotImplementedError

    def d3h(self, rho):
        raise NotImplementedError

    def pressure(self, rho):
        return rho * self.dh(rho) - self.h(rho)

    def sound_speed_sq(self, rho):
        # p'(rho) = rho h''(rho)
        return rho * self.d2h(rho)


@dataclass(frozen=True)
class GammaLaw(EnergyLaw):
    """``h = A rho**gamma / (gamma - 1)``."""

    A: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not (self.A > 0 and self.gamma > 1):
            raise ValueError("GammaLaw needs A > 0 and gamma > 1")

    def h(self, rho):
        return self.A * np.power(rho, self.gamma) / (self.gamma - 1)

    def dh(self, rho):
        return self.A * self.gamma / (self.gamma - 1) * np.power(rho, self.gamma - 1)

    def d2h(self, rho):
        return self.A * self.gamma * np.power(rho, self.gamma - 2)

    def d3h(self, rho):
        return self.A * self.gamma * (self.gamma - 2) * np.power(rho, self.gamma - 3)


@dataclass(frozen=True)
class LogLaw(EnergyLaw):
    """``h = rho log rho`` (isothermal gas, p = rho)."""

    def h(self, rho):
        return rho * np.log(rho)

    def dh(self, rho):
        return np.log(rho) + 1.0

    def d2h(self, rho):
        return 1.0 / rho

    def d3h(self, rho):
        return -1.0 / rho**2


@dataclass(frozen=True)
class LinearLaw(EnergyLaw):
    """``h = c rho``; pressure vanishes identically."""

    c: float = 0.0

    def h(self, rho):
        return self.c * rho

    def dh(self, rho):
        return np.full_like(np.asarray(rho, dtype=float), self.c)

    def d2h(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))

    def d3h(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))


# -- capillarity laws kappa(rho) -------------------------------------------


class CapillarityLaw:
    eps0 = 0.0

    def kappa(self, rho):
        raise NotImplementedError

    def dkappa(self, rho):
        raise NotImplementedError

    def d2kappa(self, rho):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCapillarity(CapillarityLaw):
    kappa0: float = 1.0

    def __post_init__(self):
        if not self.kappa0 > 0:
            raise ValueError("kappa0 must be positive")

    def kappa(self, rho):
        return np.full_like(np.asarray(rho, dtype=float), self.kappa0)

    def dkappa(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))

    def d2kappa(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class QHDCapillarity(CapillarityLaw):
    """Quantum hydrodynamics: ``kappa = eps0**2 / (4 rho)``."""

    eps0: float = 1.0

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")

    def kappa(self, rho):
        return self.eps0**2 / (4.0 * rho)

    def dkappa(self, rho):
        return -(self.eps0**2) / (4.0 * rho**2)

    def d2kappa(self, rho):
        return self.eps0**2 / (2.0 * rho**3)


@dataclass(frozen=True)
class Laws:
    """The constitutive pair plus the vacuum threshold."""

    energy: EnergyLaw
    capillarity: CapillarityLaw
    rho_min: float = DEFAULT_RHO_MIN

    @classmethod
    def from_config(cls, energy: dict, capillarity: dict, rho_min=DEFAULT_RHO_MIN) -> "Laws":
        return cls(energy_law_from_config(energy), capillarity_from_config(capillarity), rho_min)

    def to_config(self) -> tuple[dict, dict]:
        e, c = self.energy, self.capillarity
        if isinstance(e, GammaLaw):
            econf = {"type": "gamma", "A": e.A, "gamma": e.gamma}
        elif isinstance(e, LogLaw):
            econf = {"type": "log"}
        else:
            econf = {"type": "linear", "c": e.c}
        if isinstance(c, QHDCapillarity):
            cconf = {"type": "qhd", "eps0": c.eps0}
        else:
            cconf = {"type": "constant", "kappa0": c.kappa0}
        return econf, cconf


def energy_law_from_config(conf: dict) -> EnergyLaw:
    kind = str(conf.get("type", "gamma")).lower()
    if kind == "gamma":
        return GammaLaw(float(conf.get("A", 1.0)), float(conf.get("gamma", 2.0)))
    if kind == "log":
        return LogLaw()
    if kind == "linear":
        return LinearLaw(float(conf.get("c", 0.0)))
    raise ValueError(f"unknown energy_law type {kind!r}")


def capillarity_from_config(conf: dict) -> CapillarityLaw:
    kind = str(conf.get("type", "constant")).lower()
    if kind == "constant":
        return ConstantCapillarity(float(conf.get("kappa0", 1.0)))
    if kind == "qhd":
        return QHDCapillarity(float(conf.get("eps0", 1.0)))
    raise ValueError(f"unknown capillarity type {kind!r}")


# -- pointwise constitutive relations ---------------------------------------


def pressure(law: EnergyLaw, rho, rho_min: float = DEFAULT_RHO_MIN):
    """``p = rho h'(rho) - h(rho)``; works on scalars and arrays."""
    check_vacuum(rho, rho_min)
    out = law.pressure(np.asarray(rho, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def stress(rho, q, r, cap: CapillarityLaw, rho_min: float = DEFAULT_RHO_MIN) -> np.ndarray:
    """Korteweg stress ``S(rho, q, r)`` without the pressure part.

    ``S = (1/2 (rho kappa' + kappa) |q|^2 + rho kappa r) I - kappa q (x) q``

    ``q`` has the component axis first (shape ``(d, ...)``); the result has
    shape ``(d, d, ...)``.
    """
    rho = np.asarray(rho, dtype=float)
    q = np.asarray(q, dtype=float)
    check_vacuum(rho, rho_min)
    kap = cap.kappa(rho)
    dkap = cap.dkappa(rho)
    qsq = np.sum(q**2, axis=0)
    iso = 0.5 * (rho * dkap + kap) * qsq + rho * kap * r
    d = q.shape[0]
    out = -kap * q[:, None] * q[None, :]
    for i in range(d):
        out[i, i] = out[i, i] + iso
    return out


def stress_divergence_form(rho, q, div_rho_kappa_q, cap: CapillarityLaw) -> np.ndarray:
    """The stress written with ``div(rho kappa(rho) q)`` instead of ``rho kappa r``.

    ``S = (-1/2 (rho kappa' + kappa) |q|^2 + div(rho kappa q)) I - kappa q (x) q``
    """
    rho = np.asarray(rho, dtype=float)
    q = np.asarray(q, dtype=float)
    kap = cap.kappa(rho)
    qsq = np.sum(q**2, axis=0)
    iso = -0.5 * (rho * cap.dkappa(rho) + kap) * qsq + div_rho_kappa_q
    out = -kap * q[:, None] * q[None, :]
    for i in range(q.shape[0]):
        out[i, i] = out[i, i] + iso
    return out


def qhd_defect(cap: CapillarityLaw, rho):
    """``rho kappa'(rho) + kappa(rho)``; identically zero for the QHD law."""
    return rho * cap.dkappa(rho) + cap.kappa(rho)


# -- field-level assembly ---------------------------------------------------


def stress_array(rho: np.ndarray, grid: TorusGrid, laws: Laws) -> np.ndarray:
    """Stress of a density array (trailing axes spatial), derivatives spectral."""
    q = gradient_array(rho, grid)
    r = laplacian_array(rho, grid)
    return stress(rho, q, r, laws.capillarity, laws.rho_min)


def stress_field(rho: ScalarField, laws: Laws) -> np.ndarray:
    return stress_array(rho.values, rho.grid, laws)


def energy_density_array(rho, m, grid: TorusGrid, laws: Laws) -> np.ndarray:
    """``1/2 |m|^2 / rho + h(rho) + 1/2 kappa(rho) |grad rho|^2``.

    ``m`` carries its component axis first.  Batched leading axes are allowed
    for ``rho`` provided ``m`` is shaped ``(d, *rho.shape)``.
    """
    check_vacuum(rho, laws.rho_min)
    q = gradient_array(rho, grid)
    kin = 0.5 * np.sum(m**2, axis=0) / rho
    cap = 0.5 * laws.capillarity.kappa(rho) * np.sum(q**2, axis=0)
    return kin + laws.energy.h(rho) + cap


def energy_flux_array(rho, m, grid: TorusGrid, laws: Laws) -> np.ndarray:
    """``m (1/2|u|^2 + h' + 1/2 kappa'|grad rho|^2 - div(kappa grad rho)) + kappa grad rho div m``."""
    check_vacuum(rho, laws.rho_min)
    cap = laws.capillarity
    u = m / rho
    q = gradient_array(rho, grid)
    qsq = np.sum(q**2, axis=0)
    kap = cap.kappa(rho)
    div_kq = divergence_array(kap * q, grid)
    bracket = 0.5 * np.sum(u**2, axis=0) + laws.energy.dh(rho) + 0.5 * cap.dkappa(rho) * qsq - div_kq
    return m * bracket + kap * q * divergence_array(m, grid)


def energy_density(state: EKState, laws: Laws) -> ScalarField:
    return ScalarField(state.grid, energy_density_array(state.rho.values, state.m.data, state.grid, laws))


def energy_flux(state: EKState, laws: Laws) -> VectorField:
    return VectorField(state.grid, energy_flux_array(state.rho.values, state.m.data, state.grid, laws))


def total_energy(state: EKState, laws: Laws) -> float:
    return integrate(energy_density(state, laws))


def mass(state: EKState) -> float:
    return integrate(state.rho)


# -- weak form of the local energy balance ----------------------------------


def time_integral(values, dt: float) -> float:
    """Composite Simpson over uniformly spaced samples (needs >= 3 samples)."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 3:
        raise ValueError("Simpson quadrature needs at least 3 time samples")
    return float(simpson(values, dx=dt, axis=0))


def weak_energy_residual(traj, phi, laws: Laws) -> float:
    """Space-time pairing of the energy balance with a test function.

    Returns ``int int E d_t phi + F . grad phi dx dt`` which vanishes for
    energy-conserving solutions.  ``traj`` needs ``times``, ``grid``,
    ``rho_array`` and ``m_array``.
    """
    times = np.asarray(traj.times)
    if times.size < 3:
        raise ValueError("trajectory has fewer than 3 samples; Simpson needs 3")
    phi.check_support(times[0], times[-1])
    grid = traj.grid
    dt = float(times[1] - times[0])
    mesh = grid.mesh()
    psi = phi.space(*mesh)
    grad_psi = phi.space_gradient(*mesh)
    chi = phi.time(times)
    dchi = phi.time_derivative(times)

    per_time = np.empty(times.size)
    for i, (rho, m) in enumerate(zip(traj.rho_array, traj.m_array)):
        if chi[i] == 0.0 and dchi[i] == 0.0:
            per_time[i] = 0.0
            continue
        e = energy_density_array(rho, m, grid, laws)
        f = energy_flux_array(rho, m, grid, laws)
        integrand = e * psi * dchi[i] + chi[i] * np.sum(f * grad_psi, axis=0)
        per_time[i] = integrate_array(integrand, grid)
    return time_integral(per_time, dt)


__all__ = [
    "VacuumError",
    "check_vacuum",
    "EnergyLaw",
    "GammaLaw",
    "LogLaw",
    "LinearLaw",
    "CapillarityLaw",
    "ConstantCapillarity",
    "QHDCapillarity",
    "Laws",
    "pressure",
    "stress",
    "stress_divergence_form",
    "qhd_defect",
    "stress_array",
    "stress_field",
    "energy_density",
    "energy_flux",
    "energy_density_array",
    "energy_flux_array",
    "total_energy",
    "mass",
    "time_integral",
    "weak_energy_residual",
]

"""Rough, exactly time-periodic space-time fields with prescribed exponents.

These are not solutions of any equation.  The commutator estimates only
use the Besov regularity of the fields, so scans on such data test the
decay mechanism in isolation.
"""
from __future__ import annotations

import numpy as np

from ..constitutive import Laws
from ..dynamics import Trajectory
from ..fields import TorusGrid

NOT_A_SOLUTION = (
    "synthetic fields: prescribed Besov regularity, not solutions of the equations; "
    "the commutator bounds depend on regularity only"
)


def _time_mode(j: int) -> int:
    # lacunary in time as well, one octave below the spatial wavenumber so
    # that the top scale stays well under the temporal Nyquist mode
    return max(1, 2 ** (j - 1))


def lacunary_spacetime(
    exponent: float,
    J: int,
    grid: TorusGrid,
    n_samples: int,
    period: float,
    rng: np.random.Generator,
    spatial_order: float = 0.0,
) -> np.ndarray:
    """``sum_j 2^-((a+s) j) cos(2^j x + theta_j) cos(2 pi m_j t / P + vartheta_j)``.

    ``m_j = max(1, 2^(j-1))``.  The result is exactly periodic in time
    with period ``P`` when sampled at ``t_k = k P / n_samples``.  With
    ``spatial_order = s`` the ``s``-th spatial derivative has exponent ``a``.
    """
    if 2 * _time_mode(J) >= n_samples:
        raise ValueError(f"top time mode {_time_mode(J)} not below Nyquist for {n_samples} samples")
    if 2**J >= grid.N // 2:
        raise ValueError(f"2^J = {2**J} must stay below N/2 = {grid.N // 2}")
    times = period * np.arange(n_samples) / n_samples
    scale = 2 * np.pi / grid.L
    out = np.zeros((n_samples,) + grid.shape)
    tshape = (-1,) + (1,) * grid.dim
    for x in grid.mesh():
        theta = rng.uniform(0, 2 * np.pi, J + 1)
        vartheta = rng.uniform(0, 2 * np.pi, J + 1)
        for j in range(J + 1):
            amp = 2.0 ** (-(exponent + spatial_order) * j)
            tfac = np.cos(2 * np.pi * _time_mode(j) * times / period + vartheta[j])
            out += amp * tfac.reshape(tshape) * np.cos(2**j * scale * x + theta[j])
    return out / grid.dim


def synthetic_trajectory(
    alpha: float,
    beta: float,
    grid: TorusGrid,
    laws: Laws,
    n_samples: int = 512,
    T: float = 4 * np.pi,
    J: int = 8,
    rho_amplitude: float = 0.15,
    u_amplitude: float = 0.1,
    seed: int = 0,
) -> Trajectory:
    """Time-periodic trajectory with ``u`` of exponent ``alpha`` and
    ``rho, grad rho, lap rho`` of exponent at least ``beta``.

    Samples sit at ``t_k = k T / (n - 1)``, so the last sample is at ``T``
    and the period is ``n T / (n - 1)``.
    """
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("alpha and beta must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    dt = T / (n_samples - 1)
    period = n_samples * dt
    rho = 1.0 + rho_amplitude * lacunary_spacetime(beta, J, grid, n_samples, period, rng, spatial_order=2.0)
    u = np.stack(
        [u_amplitude * lacunary_spacetime(alpha, J, grid, n_samples, period, rng) for _ in range(grid.dim)],
        axis=1,
    )
    traj = Trajectory(grid, 0.0, dt, rho, rho[:, None] * u, laws, time_periodic=True)
    traj.diagnostics["note"] = NOT_A_SOLUTION
    return traj


__all__ = ["NOT_A_SOLUTION", "lacunary_spacetime", "synthetic_trajectory"]

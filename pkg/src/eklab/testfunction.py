"""Compactly supported space-time weights ``phi(t, x) = chi(t) psi(x)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _poly(s):
    """``(1 - s^2)^2`` on ``|s| < 1``, zero outside (C^1)."""
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1.0, (1.0 - s**2) ** 2, 0.0)


def _poly_derivative(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1.0, -4.0 * s * (1.0 - s**2), 0.0)


def _smooth(s):
    """``exp(1 - 1/(1 - s^2))`` on ``|s| < 1``, zero outside (C^infinity, peak 1)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _smooth_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si**2)) * (-2.0 * si / (1.0 - si**2) ** 2)
    return out


PROFILES = {"poly": (_poly, _poly_derivative), "smooth": (_smooth, _smooth_derivative)}


@dataclass(frozen=True)
class TestFunction:
    """Product weight with analytic derivatives.

    ``chi`` is supported on ``(t_a, t_b)``.  The spatial factor is either the
    constant 1 (``spatial="constant"``) or a periodic bump of half-width
    ``width`` centred at ``center`` along every axis, on a torus of side
    ``length``.  ``profile`` selects the bump shape for both factors:
    ``"poly"`` is the C^1 bump ``(1 - s^2)^2``, ``"smooth"`` the C^infinity
    bump ``exp(1 - 1/(1 - s^2))``.  Spectral derivatives of sampled
    fields only agree with the analytic gradient of a spatial bump once
    that bump is resolved, which is much easier for the smooth profile.
    """

    __test__ = False  # not a pytest class

    t_a: float
    t_b: float
    spatial: str = "constant"
    center: float = math.pi
    width: float = 1.0
    length: float = 2 * math.pi
    profile: str = "poly"

    def __post_init__(self):
        if not self.t_b > self.t_a:
            raise ValueError("test function needs t_b > t_a")
        if self.spatial not in ("constant", "bump"):
            raise ValueError(f"unknown spatial profile {self.spatial!r}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown bump profile {self.profile!r}")
        if self.spatial == "bump" and not 0 < self.width < self.length / 2:
            raise ValueError("bump width must lie in (0, L/2)")

    @property
    def _bump(self):
        return PROFILES[self.profile][0]

    @property
    def _bump_derivative(self):
        return PROFILES[self.profile][1]

    @property
    def _mid(self):
        return 0.5 * (self.t_a + self.t_b)

    @property
    def _half(self):
        return 0.5 * (self.t_b - self.t_a)

    def time(self, t):
        return self._bump((np.asarray(t, dtype=float) - self._mid) / self._half)

    def time_derivative(self, t):
        return self._bump_derivative((np.asarray(t, dtype=float) - self._mid) / self._half) / self._half

    def _periodic_offset(self, x):
        # signed distance to the centre on the circle, in [-L/2, L/2)
        L = self.length
        return (np.asarray(x, dtype=float) - self.center + 0.5 * L) % L - 0.5 * L

    def space(self, *coords):
        shape = np.shape(coords[0])
        if self.spatial == "constant":
            return np.ones(shape)
        out = np.ones(shape)
        for x in coords:
            out = out * self._bump(self._periodic_offset(x) / self.width)
        return out

    def space_gradient(self, *coords):
        """Analytic gradient, component axis first."""
        shape = np.shape(coords[0])
        d = len(coords)
        if self.spatial == "constant":
            return np.zeros((d,) + shape)
        factors = [self._bump(self._periodic_offset(x) / self.width) for x in coords]
        derivs = [self._bump_derivative(self._periodic_offset(x) / self.width) / self.width for x in coords]
        grads = []
        for i in range(d):
            g = derivs[i]
            for j in range(d):
                if j != i:
                    g = g * factors[j]
            grads.append(g)
        return np.stack(grads)

    def check_support(self, t0: float, t1: float, margin: float = 0.0) -> None:
        """Require ``supp chi`` inside ``(t0 + margin, t1 - margin)``."""
        lo, hi = t0 + margin, t1 - margin
        # a bump edge coinciding with a sample time is fine: chi and chi' vanish there
        tol = 1e-12 * max(1.0, abs(t1 - t0))
        if self.t_a < lo - tol or self.t_b > hi + tol:
            raise ValueError(
                f"test function support ({self.t_a:g}, {self.t_b:g}) not inside ({lo:g}, {hi:g})"
            )

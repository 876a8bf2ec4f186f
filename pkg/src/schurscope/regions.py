"""Regions of the closed disk: Carleson windows W(xi, h) and boundary
disks S(xi, h), with membership tests, normalized areas, and the sampling
self-tests for the containment relations the bound checks rely on.

Conventions.  The window W(xi, h) is the set |z| >= 1 - h, |arg(z conj(xi))|
<= h, with W(xi, h) equal to the whole closed disk for h >= 1.  S(xi, h) is
the part of the closed disk within distance h of the boundary point xi.
Areas are normalized by pi (the whole disk has area 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

_XI_TOL = 1e-12


def _unit(xi: complex) -> complex:
    xi = complex(xi)
    r = abs(xi)
    if abs(r - 1.0) > _XI_TOL:
        raise DomainError("window center must lie on the unit circle, |xi| = %.17g" % r)
    return xi / r


@dataclass(frozen=True)
class CarlesonWindow:
    xi: complex
    h: float

    def __post_init__(self):
        object.__setattr__(self, "xi", _unit(self.xi))
        object.__setattr__(self, "h", float(self.h))
        if self.h <= 0.0:
            raise DomainError("window size h must be positive")

    def contains(self, z):
        return window_contains(self, z)


@dataclass(frozen=True)
class DiskSector:
    xi: complex
    h: float

    def __post_init__(self):
        object.__setattr__(self, "xi", _unit(self.xi))
        object.__setattr__(self, "h", float(self.h))
        if self.h <= 0.0:
            raise DomainError("sector size h must be positive")

    def contains(self, z):
        return sector_contains(self, z)


def window_contains(window: CarlesonWindow, z):
    """Membership in W(xi, h) for points of the closed disk.

    For h >= 1 the window is the whole closed disk.  z = 0 is rejected by
    the modulus clause first (for h < 1), so the undefined argument of 0
    never matters.
    """
    zs = np.asarray(z, dtype=complex)
    if window.h >= 1.0:
        return np.broadcast_to(True, zs.shape).copy() if zs.ndim else True
    inside = (np.abs(zs) >= 1.0 - window.h) \
        & (np.abs(np.angle(zs * np.conj(window.xi))) <= window.h)
    return bool(inside) if zs.ndim == 0 else inside


def sector_contains(sector: DiskSector, z):
    zs = np.asarray(z, dtype=complex)
    inside = np.abs(zs - sector.xi) <= sector.h
    return bool(inside) if zs.ndim == 0 else inside


def normalized_area(region) -> float:
    """Normalized Lebesgue area (dx dy / pi) of a window or sector.

    The window has an angle-independent radial slice, so its polar integral
    collapses to a product.  The sector area is an adaptive quadrature in
    the polar angle of the exact radial slice; relative error <= 1e-6.
    """
    if isinstance(region, CarlesonWindow):
        h = region.h
        if h >= 1.0:
            return 1.0
        return h * h * (2.0 - h) / math.pi
    if isinstance(region, DiskSector):
        return _sector_area(region.h)
    raise DomainError("unsupported region %r" % type(region).__name__)


def _sector_area(h: float) -> float:
    if h >= 2.0:
        return 1.0

    def slice_sq(theta):
        # radial extent of {r : |r e^{i theta} - 1| <= h, 0 <= r <= 1}
        c = math.cos(theta)
        disc = h * h - 1.0 + c * c
        if disc <= 0.0:
            return 0.0
        s = math.sqrt(disc)
        r_hi = min(c + s, 1.0)
        r_lo = max(c - s, 0.0)
        if r_hi <= r_lo:
            return 0.0
        return r_hi * r_hi - r_lo * r_lo

    theta_max = math.asin(h) if h < 1.0 else math.pi
    val, _ = quad(slice_sq, 0.0, theta_max, epsabs=1e-13, epsrel=1e-9, limit=400)
    return val / math.pi  # slice_sq already carries the factor 2 via r^2 difference and symmetry


def kernel_bound_gap(xi: complex, h: float, z):
    """Gap |1 - conj(a) z|^2 - (h^2 + |z - xi|^2)/4 with a = (1 - h) xi.

    Nonnegative on the closed disk for 0 < h <= 1/2; used as a sampled
    invariant by the window bound machinery.
    """
    xi = _unit(xi)
    a = (1.0 - h) * xi
    zs = np.asarray(z, dtype=complex)
    lhs = np.abs(1.0 - np.conj(a) * zs) ** 2
    rhs = 0.25 * (h * h + np.abs(zs - xi) ** 2)
    return lhs - rhs


def sample_window(window: CarlesonWindow, n: int, rng) -> np.ndarray:
    """Uniform-in-(r, theta) sample of W(xi, h) intersected with the closed
    disk; adequate for containment counterexample search."""
    h = min(window.h, 1.0)
    r = rng.uniform(max(0.0, 1.0 - h), 1.0, n)
    t = rng.uniform(-min(window.h, math.pi), min(window.h, math.pi), n)
    return r * np.exp(1j * t) * window.xi


def sample_sector(sector: DiskSector, n: int, rng) -> np.ndarray:
    """Uniform sample of S(xi, h): area-uniform in the disk around xi,
    rejected to the closed unit disk."""
    out = np.empty(0, dtype=complex)
    while out.size < n:
        m = 2 * (n - out.size) + 16
        rho = sector.h * np.sqrt(rng.uniform(0.0, 1.0, m))
        psi = rng.uniform(0.0, 2.0 * math.pi, m)
        z = sector.xi + rho * np.exp(1j * psi)
        out = np.concatenate([out, z[np.abs(z) <= 1.0]])
    return out[:n]


def containment_selftest(t: float, s: float, zeta: complex, xi: complex = 1.0,
                         n_samples: int = 100_000, seed: int = 0) -> bool:
    """Sampling check of the three containments the bound proofs use.

    With h := t throughout:
      1. W(zeta, s) is contained in W(xi, 2 t) for 0 < s <= t and zeta a
         boundary point of W(xi, t);
      2. S(xi, 6 t) is contained in W(xi, 12 t);
      3. W(xi, t) is contained in S(xi, 2 t).

    These are sanity anchors, not proofs: returns True when no sampled
    counterexample is found.
    """
    if not (0.0 < s <= t):
        raise DomainError("need 0 < s <= t")
    xi = _unit(xi)
    zeta = _unit(zeta)
    if not window_contains(CarlesonWindow(xi, t), zeta):
        raise DomainError("zeta must lie in W(xi, t)")
    rng = np.random.default_rng(seed)

    pts = sample_window(CarlesonWindow(zeta, s), n_samples, rng)
    if not np.all(window_contains(CarlesonWindow(xi, 2.0 * t), pts)):
        return False

    pts = sample_sector(DiskSector(xi, 6.0 * t), n_samples, rng)
    if not np.all(window_contains(CarlesonWindow(xi, 12.0 * t), pts)):
        return False

    pts = sample_window(CarlesonWindow(xi, t), n_samples, rng)
    if not np.all(sector_contains(DiskSector(xi, 2.0 * t), pts)):
        return False
    return True

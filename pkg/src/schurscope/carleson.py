"""Pull-back boundary measure of windows and sectors, the Carleson
function, and the exponent fit.

The pull-back mass of a region under the boundary values of a symbol is a
finite union of circle arcs for the rational class: the region indicator
along the boundary circle changes state finitely often.  Masses are
therefore computed by scanning a uniform probe grid for state changes and
bisecting each change to ``tol_theta``.  The probe count is scaled
automatically with the region size (64 probes per unit of feature scale by
default, capped), since a window of size h pulls back to arcs whose length
is comparable to h over this symbol class.

All measures are normalized: the boundary circle carries total mass 1
(dt / 2 pi).  Every inequality in the package is stated in this
normalization; classical presentations sometimes quote unnormalized arc
lengths, which differ by the factor 2 pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, FitError, PreconditionError, ResolutionWarning
from .regions import CarlesonWindow, DiskSector
from .symbols import SchurMap

TWO_PI = 2.0 * math.pi

#: Center-search resolution used by the best-window refinement of rho.
RHO_TOP_K = 4
RHO_BRANCH = 8


@dataclass(frozen=True)
class BoundaryRes:
    """Boundary scan resolution.  ``n_seed`` is the minimum probe count;
    the effective count grows as scale_factor * 2 pi / (feature scale),
    capped at ``n_max``."""

    n_seed: int = 4096
    tol_theta: float = 1e-12
    scale_factor: float = 64.0
    n_max: int = 1 << 21


@dataclass(frozen=True)
class CenterRes:
    n_centers: int = 512
    n_seed: int = 4096
    refinement: int = 2


@dataclass(frozen=True)
class ArcSet:
    """Disjoint circle arcs; each arc is (start, end) with start in
    [0, 2 pi) and end in (start, start + 2 pi]."""

    arcs: tuple
    mass: float

    @staticmethod
    def from_arcs(arcs) -> "ArcSet":
        total = sum(e - s for s, e in arcs)
        return ArcSet(arcs=tuple(arcs), mass=total / TWO_PI)


@dataclass(frozen=True)
class CarlesonSample:
    h: float
    value: float
    argmax_xi: complex
    resolution: CenterRes


@dataclass(frozen=True)
class MonteCarloMass:
    mass: float
    std_error: float
    n_samples: int
    seed: int


def _effective_seed(res: BoundaryRes, feature_scale: float) -> int:
    n = res.n_seed
    if feature_scale > 0.0:
        n = max(n, int(math.ceil(res.scale_factor * TWO_PI / feature_scale)))
    return min(n, res.n_max)


@lru_cache(maxsize=16)
def _probe_grid(symbol: SchurMap, n: int):
    thetas = np.arange(n) * (TWO_PI / n)
    return thetas, symbol.boundary_value(thetas)


def _indicator_window(values, window: CarlesonWindow):
    # the |z| <= 1 clause is carried by the certified self-map property
    if window.h >= 1.0:
        return np.ones(values.shape, dtype=bool)
    return (np.abs(values) >= 1.0 - window.h) \
        & (np.abs(np.angle(values * np.conj(window.xi))) <= window.h)


def _indicator_sector(values, sector: DiskSector):
    if sector.h >= 2.0:
        return np.ones(values.shape, dtype=bool)
    return np.abs(values - sector.xi) <= sector.h


def _assemble_arcs(symbol: SchurMap, indicator_of, thetas, flags,
                   tol_theta: float, n_eff: int) -> ArcSet:
    """Runs of True probes, with each edge refined by bisection on the
    indicator.  Emits ResolutionWarning for arcs shorter than four probe
    spacings (crossings of comparable scale may have been missed)."""
    n = len(flags)
    step = TWO_PI / n
    if flags.all():
        return ArcSet(arcs=((0.0, TWO_PI),), mass=1.0)
    if not flags.any():
        return ArcSet(arcs=(), mass=0.0)

    def indicator_theta(th):
        return indicator_of(symbol.boundary_value(np.asarray(th)))

    flips = np.nonzero(flags != np.roll(flags, -1))[0]  # state change in (theta_i, theta_{i+1})
    lo = thetas[flips]
    hi = lo + step
    # bisect all edges at once; each bracket has flag[i] on the left
    left_state = flags[flips]
    iters = max(1, int(math.ceil(math.log2(step / tol_theta))))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = indicator_theta(mid) == left_state
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    edges = 0.5 * (lo + hi)

    rising = np.sort(edges[~left_state] % TWO_PI)   # False -> True: arc start
    falling = np.sort(edges[left_state] % TWO_PI)   # True -> False: arc end

    arcs = []
    for s in rising:
        # the matching end is the first falling edge after s (cyclically)
        j = np.searchsorted(falling, s)
        e = falling[j % len(falling)] + (TWO_PI if j >= len(falling) else 0.0)
        if e < s:
            e += TWO_PI
        if e - s > tol_theta:
            arcs.append((float(s), float(e)))
    arcs.sort()

    short = [a for a in arcs if (a[1] - a[0]) < 4.0 * (TWO_PI / n_eff)]
    if short:
        warnings.warn(
            "detected %d arc(s) shorter than 4 probe spacings; raise n_seed "
            "to confirm no crossing was missed" % len(short), ResolutionWarning,
            stacklevel=3)
    return ArcSet.from_arcs(arcs)


def pullback_window_mass(symbol: SchurMap, window: CarlesonWindow,
                         res: BoundaryRes = BoundaryRes()) -> ArcSet:
    """Boundary mass of {theta : phi*(e^{i theta}) in W(xi, h)} as arcs."""
    if window.h >= 1.0:
        return ArcSet(arcs=((0.0, TWO_PI),), mass=1.0)
    n = _effective_seed(res, min(window.h, 1.0))
    thetas, values = _probe_grid(symbol, n)
    flags = _indicator_window(values, window)
    return _assemble_arcs(symbol, lambda v: _indicator_window(v, window),
                          thetas, flags, res.tol_theta, n)


def pullback_sector_mass(symbol: SchurMap, sector: DiskSector,
                         res: BoundaryRes = BoundaryRes()) -> ArcSet:
    """Boundary mass of {theta : |phi*(e^{i theta}) - xi| <= h} as arcs."""
    if sector.h >= 2.0:
        return ArcSet(arcs=((0.0, TWO_PI),), mass=1.0)
    n = _effective_seed(res, min(sector.h, 2.0))
    thetas, values = _probe_grid(symbol, n)
    flags = _indicator_sector(values, sector)
    return _assemble_arcs(symbol, lambda v: _indicator_sector(v, sector),
                          thetas, flags, res.tol_theta, n)


def total_mass_check(symbol: SchurMap) -> float:
    """Pull-back mass of the whole closed disk; must be 1."""
    return pullback_window_mass(symbol, CarlesonWindow(1.0, 1.0)).mass


def rho(symbol: SchurMap, h: float, res: CenterRes = CenterRes(),
        boundary: BoundaryRes | None = None) -> CarlesonSample:
    """Carleson function: sup over centers xi of the window pull-back mass.

    Stage one estimates the mass at ``n_centers`` uniformly spaced centers
    by probe counting (a sorted-angle sliding window, so the cost is
    logarithmic per center); two refinement rounds then branch around the
    best centers.  The returned value is the fully bisected mass at the
    winning center, a calibrated lower bound for the supremum.  Ties break
    toward the smallest center angle.
    """
    if h <= 0.0:
        raise DomainError("window size h must be positive")
    if boundary is None:
        boundary = BoundaryRes(n_seed=res.n_seed)
    if h >= 1.0:
        return CarlesonSample(h=h, value=1.0, argmax_xi=1.0 + 0.0j, resolution=res)

    n = _effective_seed(boundary, h)
    _, values = _probe_grid(symbol, n)
    mod_ok = np.abs(values) >= 1.0 - h
    args = np.sort(np.angle(values[mod_ok]))  # in (-pi, pi]
    weight = 1.0 / n
    # unroll one turn each way so any window [a - h, a + h] with the center
    # normalized to (-pi, pi] is fully covered
    ext = np.concatenate([args - TWO_PI, args, args + TWO_PI])

    def estimate(alphas):
        alphas = np.asarray(alphas, dtype=float)
        if args.size == 0:
            return np.zeros(alphas.shape)
        a = np.mod(alphas, TWO_PI)
        a = np.where(a > math.pi, a - TWO_PI, a)  # match angle range of args
        lo = np.searchsorted(ext, a - h, side="left")
        hi = np.searchsorted(ext, a + h, side="right")
        return (hi - lo) * weight

    centers = np.arange(res.n_centers) * (TWO_PI / res.n_centers)
    masses = estimate(centers)
    spacing = TWO_PI / res.n_centers
    order = np.argsort(-masses, kind="stable")[:RHO_TOP_K]
    cand = [float(centers[i]) for i in order]
    best_alpha, best_est = cand[0], float(masses[order[0]])

    for _ in range(res.refinement):
        pool = []
        for a0 in cand:
            sub = np.linspace(a0 - spacing, a0 + spacing, RHO_BRANCH + 1)
            vals = estimate(sub)
            j = int(np.argmax(vals))
            pool.append((float(vals[j]), float(sub[j])))
            if float(vals[j]) > best_est:
                best_est, best_alpha = float(vals[j]), float(sub[j])
        pool.sort(key=lambda p: (-p[0], p[1]))
        cand = [a for _, a in pool[:RHO_TOP_K]]
        spacing /= RHO_BRANCH

    xi_best = complex(np.exp(1j * (best_alpha % TWO_PI)))
    final = pullback_window_mass(symbol, CarlesonWindow(xi_best, h), boundary)
    return CarlesonSample(h=h, value=final.mass, argmax_xi=xi_best, resolution=res)


def carleson_exponent_fit(symbol: SchurMap, h_list, res: CenterRes = CenterRes()) -> dict:
    """Least-squares slope of log rho(h) against log h over a geometric
    ladder of sizes.  Raises FitError when some rho(h) vanishes (the symbol
    does not reach that part of the boundary, so no exponent exists)."""
    hs = np.asarray(sorted(h_list, reverse=True), dtype=float)
    if hs.size < 6:
        raise PreconditionError("exponent fit needs at least 6 sizes")
    ratios = hs[1:] / hs[:-1]
    if np.any(ratios <= 0.0) or np.max(np.abs(ratios - ratios[0])) > 1e-9:
        raise PreconditionError("h_list must be a geometric (dyadic) ladder")
    limit = 1.0 - abs(symbol.value_at_zero)
    if np.any(hs >= limit):
        raise PreconditionError("all h must be smaller than 1 - |phi(0)|")
    values = np.array([rho(symbol, float(h), res).value for h in hs])
    if np.any(values == 0.0):
        raise FitError("rho vanishes at some h; Carleson exponent undefined")
    slope, intercept = np.polyfit(np.log(hs), np.log(values), 1)
    resid = np.log(values) - (slope * np.log(hs) + intercept)
    return {"alpha": float(slope), "c": float(math.exp(intercept)),
            "residual": float(np.sqrt(np.mean(resid ** 2)))}


def pullback_mass_monte_carlo(symbol: SchurMap, region, n: int = 1_000_000,
                              seed: int = 0x5EED) -> MonteCarloMass:
    """Independent pushforward estimate of a region's pull-back mass:
    uniform boundary samples, indicator mean, binomial standard error.
    This is the oracle the bisection masses are validated against; it
    shares no code path with the arc scan."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, n)
    values = symbol.boundary_value(theta)
    if isinstance(region, CarlesonWindow):
        inside = _indicator_window(values, region)
    elif isinstance(region, DiskSector):
        inside = _indicator_sector(values, region)
    else:
        raise DomainError("unsupported region %r" % type(region).__name__)
    p = float(np.mean(inside))
    se = math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return MonteCarloMass(mass=p, std_error=se, n_samples=n, seed=seed)

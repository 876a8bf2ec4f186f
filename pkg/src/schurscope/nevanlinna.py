"""The Nevanlinna counting function and its maximal functions.

``N(w) = sum log(1/|z|)`` over the solutions of ``phi(z) = w`` inside the
open disk, each repeated according to multiplicity; ``N(w) = 0`` when there
are none, and the value is undefined at ``w = phi(0)``.

Two evaluation paths are provided.  ``preimages`` / ``counting_function``
is the careful scalar path: companion-matrix roots, multiplicity recovery
by clustering, multiplicity-aware Newton refinement, and a residual
certificate on every root.  ``counting_function_batch`` is the vectorized
path used by grid suprema and quadratures: it solves the cleared
polynomial for thousands of targets at once (closed forms for degrees one
and two, stacked companion eigenvalues above) and sums log(1/|z|) over raw
roots.  The sum over a root cluster is a symmetric function, so skipping
the clustering loses no accuracy there.

Suprema over annuli, windows and sectors are computed as a coarse polar
grid followed by local refinement around the best cells; the reported
value is a certified lower bound for the true supremum, nondecreasing in
the refinement level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BasePointError, DomainError, PreconditionError, SolverError
from .regions import CarlesonWindow, DiskSector
from .symbols import SchurMap

#: Half-width of the exclusion ring at the unit circle: roots with
#: |z| >= 1 - EPS_EXCLUSION contribute at most ~1e-9 to N and are counted
#: in the diagnostics field instead.
EPS_EXCLUSION = 1e-9

#: Radius around phi(0) inside which N is treated as undefined.
TOL_BASE = 1e-9

#: Distance below which companion roots are merged into one multiple root.
CLUSTER_TOL = 1e-7

#: Default residual target |phi(z) - w| <= TOL_ROOT * (1 + degree).
TOL_ROOT = 1e-10

_TRIM_REL = 1e-13


@dataclass(frozen=True)
class GridSpec:
    """Supremum search resolution: coarse polar grid, then
    ``refinement_levels`` rounds of local grids (one per top cell), each
    shrinking the cell by ``refine_factor``."""

    n_radial: int = 32
    n_angular: int = 256
    refinement_levels: int = 3
    top_k: int = 8
    refine_factor: int = 4


@dataclass(frozen=True)
class PreimageSet:
    w: complex
    roots: tuple  # of (z, multiplicity)
    excluded_near_boundary: int = 0

    def multiplicity_total(self) -> int:
        return sum(m for _, m in self.roots)


@dataclass(frozen=True)
class MaximalFunctionSample:
    parameter: float
    value: float
    argmax_w: complex
    grid_spec: GridSpec


# ----------------------------------------------------------------------
# scalar path

def preimages(symbol: SchurMap, w: complex, tol_root: float = TOL_ROOT) -> PreimageSet:
    """All solutions of phi(z) = w with |z| < 1 - EPS_EXCLUSION, with
    multiplicities recovered by clustering and every root certified by its
    residual."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise DomainError("target w must lie in the open disk")
    coeffs = symbol.clear_to_polynomial(w)
    deg = len(coeffs) - 1
    if deg == 0:
        return PreimageSet(w=w, roots=(), excluded_near_boundary=0)
    raw = np.roots(coeffs[::-1])
    clusters = _cluster(raw, CLUSTER_TOL)
    refined = [(_refine_root(coeffs, z0, m), m) for z0, m in clusters]
    clusters = _cluster_pairs(refined, CLUSTER_TOL)

    kept = []
    excluded = 0
    residual_cap = tol_root * (1.0 + deg)
    for z0, m in clusters:
        r = abs(z0)
        if r >= 1.0 - EPS_EXCLUSION:
            if r <= 1.0 + 1e-6:
                excluded += 1
            continue
        res = abs(symbol.evaluate(z0) - w)
        if res > residual_cap:
            raise SolverError(
                "root %s of phi(z)=%s stagnated at residual %.3g" % (z0, w, res))
        kept.append((z0, m))
    kept.sort(key=lambda p: (p[0].real, p[0].imag))
    return PreimageSet(w=w, roots=tuple(kept), excluded_near_boundary=excluded)


def _cluster(points: np.ndarray, tol: float):
    pairs = [(complex(z), 1) for z in points]
    return _cluster_pairs(pairs, tol)


def _cluster_pairs(pairs, tol: float):
    """Greedy chaining of roots closer than tol; centroid weighted by
    multiplicity.  Degrees are small, so quadratic cost is irrelevant."""
    remaining = list(pairs)
    out = []
    while remaining:
        z0, m0 = remaining.pop(0)
        group = [(z0, m0)]
        changed = True
        while changed:
            changed = False
            for i, (z, m) in enumerate(remaining):
                if any(abs(z - g) <= tol for g, _ in group):
                    group.append(remaining.pop(i))
                    changed = True
                    break
        mtot = sum(m for _, m in group)
        centroid = sum(z * m for z, m in group) / mtot
        out.append((centroid, mtot))
    return out


def _refine_root(coeffs: np.ndarray, z0: complex, multiplicity: int,
                 iters: int = 40) -> complex:
    """Multiplicity-aware Newton: z <- z - m p / p'.  Steps are only taken
    when they reduce |p|."""
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    z = complex(z0)
    p = _polyval_scalar(coeffs, z)
    for _ in range(iters):
        dp = _polyval_scalar(dcoeffs, z)
        if dp == 0.0:
            break
        z_new = z - multiplicity * p / dp
        p_new = _polyval_scalar(coeffs, z_new)
        if abs(p_new) >= abs(p):
            break
        z, p = z_new, p_new
    return z


def _polyval_scalar(coeffs, z):
    acc = 0.0 + 0.0j
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def counting_function(symbol: SchurMap, w: complex, tol_root: float = TOL_ROOT,
                      tol_base: float = TOL_BASE) -> float:
    """N(w) = sum multiplicity * log(1/|z|) over the preimage set."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise DomainError("target w must lie in the open disk")
    if abs(w - symbol.value_at_zero) < tol_base:
        raise BasePointError("counting function undefined at phi(0) = %s"
                             % symbol.value_at_zero)
    pre = preimages(symbol, w, tol_root)
    return float(sum(m * math.log(1.0 / abs(z)) for z, m in pre.roots))


# ----------------------------------------------------------------------
# batch path

def counting_function_batch(symbol: SchurMap, ws, tol_base: float = TOL_BASE,
                            eps_exclusion: float = EPS_EXCLUSION) -> np.ndarray:
    """Vectorized N over an array of targets.

    Targets within ``tol_base`` of phi(0) come back NaN (skipped cells);
    everything else is a float >= 0.  Grid sweeps and quadratures run on
    this path.
    """
    ws_arr = np.asarray(ws, dtype=complex)
    flat = ws_arr.ravel()
    out = np.zeros(flat.shape, dtype=float)
    if flat.size == 0:
        return out.reshape(ws_arr.shape)

    num, den = symbol._num_den
    L = max(len(num), len(den))
    num_p = np.pad(num, (0, L - len(num)))
    den_p = np.pad(den, (0, L - len(den)))
    C = num_p[None, :] - flat[:, None] * den_p[None, :]

    absC = np.abs(C)
    scale = absC.max(axis=1)
    ref = max(float(np.max(np.abs(num_p))), float(np.max(np.abs(den_p))), 1.0)
    significant = absC > _TRIM_REL * np.maximum(scale, _TRIM_REL * ref)[:, None]
    # highest significant index per row = effective degree
    degs = (L - 1) - np.argmax(significant[:, ::-1], axis=1)
    degs[~significant.any(axis=1)] = 0

    for d in np.unique(degs):
        if d == 0:
            continue
        rows = np.nonzero(degs == d)[0]
        cc = C[rows, : d + 1]
        if d == 1:
            roots = (-cc[:, 0] / cc[:, 1])[:, None]
        elif d == 2:
            roots = _roots_quadratic(cc)
        else:
            roots = _roots_companion(cc)
        roots = _refine_batch(cc, roots)
        inside = np.abs(roots) < 1.0 - eps_exclusion
        mag = np.where(inside, np.abs(roots), 1.0)
        out[rows] = -np.sum(np.log(mag), axis=1)

    base = np.abs(flat - symbol.value_at_zero) < tol_base
    out[base] = np.nan
    return out.reshape(ws_arr.shape)


def _roots_quadratic(cc: np.ndarray) -> np.ndarray:
    c0, c1, c2 = cc[:, 0], cc[:, 1], cc[:, 2]
    s = np.sqrt(c1 * c1 - 4.0 * c2 * c0)
    s = np.where(np.real(np.conj(c1) * s) < 0.0, -s, s)
    q = -0.5 * (c1 + s)
    # q == 0 forces c1 == 0 and c0 == 0: double root at the origin
    safe_q = np.where(q == 0.0, 1.0, q)
    r1 = q / c2
    r2 = np.where(q == 0.0, 0.0, c0 / safe_q)
    return np.stack([r1, r2], axis=1)


def _roots_companion(cc: np.ndarray) -> np.ndarray:
    k, L = cc.shape
    d = L - 1
    monic = cc[:, :d] / cc[:, d:]
    M = np.zeros((k, d, d), dtype=complex)
    idx = np.arange(d - 1)
    M[:, idx + 1, idx] = 1.0
    M[:, :, -1] = -monic
    return np.linalg.eigvals(M)


def _refine_batch(cc: np.ndarray, roots: np.ndarray, iters: int = 2) -> np.ndarray:
    dcc = cc[:, 1:] * np.arange(1, cc.shape[1])[None, :]
    z = roots
    p = _horner(cc, z)
    for _ in range(iters):
        dp = _horner(dcc, z)
        step = np.where(dp == 0.0, 0.0, p / np.where(dp == 0.0, 1.0, dp))
        z_new = z - step
        p_new = _horner(cc, z_new)
        better = np.abs(p_new) < np.abs(p)
        z = np.where(better, z_new, z)
        p = np.where(better, p_new, p)
    return z


def _horner(cc: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.broadcast_to(cc[:, -1:], z.shape).astype(complex).copy()
    for j in range(cc.shape[1] - 2, -1, -1):
        acc = acc * z + cc[:, j:j + 1]
    return acc


# ----------------------------------------------------------------------
# maximal functions

def _batch_values(symbol, pts, mask=None):
    vals = counting_function_batch(symbol, pts)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    if mask is not None:
        vals = np.where(mask, vals, -np.inf)
    return vals


def _sup_search(symbol, to_point, r_lo, r_hi, a_lo, a_hi, grid: GridSpec,
                full_circle: bool, point_mask=None):
    """Coarse grid + local refinement supremum of N over a polar-parameter
    box.  Candidate ordering is deterministic (value descending, then flat
    index with angular index major), so ties break toward the smallest
    angular index and results are independent of evaluation order."""
    rs = np.linspace(r_lo, r_hi, grid.n_radial)
    if full_circle:
        angs = np.linspace(a_lo, a_hi, grid.n_angular, endpoint=False)
    else:
        angs = np.linspace(a_lo, a_hi, grid.n_angular)
    A, R = np.meshgrid(angs, rs, indexing="ij")
    pts = to_point(R, A)
    mask = point_mask(pts) if point_mask is not None else None
    vals = _batch_values(symbol, pts, mask)

    flat = vals.ravel()
    order = np.argsort(-flat, kind="stable")[: grid.top_k]
    best_val = float(flat[order[0]])
    best_pt = complex(pts.ravel()[order[0]])
    cand = [(float(R.ravel()[i]), float(A.ravel()[i])) for i in order]

    dr = (r_hi - r_lo) / max(grid.n_radial - 1, 1)
    da = (a_hi - a_lo) / max(grid.n_angular - 1, 1)
    n_sub = grid.refine_factor + 1
    for _ in range(grid.refinement_levels):
        new_cand = []
        for (r0, a0) in cand:
            sub_r = np.linspace(max(r_lo, r0 - dr), min(r_hi, r0 + dr), n_sub)
            sub_a = np.linspace(a0 - da, a0 + da, n_sub)
            if not full_circle:
                sub_a = np.clip(sub_a, a_lo, a_hi)
            SA, SR = np.meshgrid(sub_a, sub_r, indexing="ij")
            spts = to_point(SR, SA)
            smask = point_mask(spts) if point_mask is not None else None
            svals = _batch_values(symbol, spts, smask)
            sflat = svals.ravel()
            j = int(np.argmax(sflat))
            if float(sflat[j]) > best_val:
                best_val = float(sflat[j])
                best_pt = complex(spts.ravel()[j])
            new_cand.append((float(SR.ravel()[j]), float(SA.ravel()[j])))
        cand = new_cand
        dr /= grid.refine_factor
        da /= grid.refine_factor

    if not np.isfinite(best_val) or best_val < 0.0:
        best_val = 0.0
    return best_val, best_pt


def nu(symbol: SchurMap, t: float, grid: GridSpec = GridSpec()) -> MaximalFunctionSample:
    """sup of N over the annulus |w| >= 1 - t (a certified lower bound)."""
    if not (0.0 < t < 1.0):
        raise DomainError("need 0 < t < 1")
    r_lo, r_hi = 1.0 - t, 1.0 - EPS_EXCLUSION
    val, pt = _sup_search(symbol, lambda R, A: R * np.exp(1j * A),
                          r_lo, r_hi, 0.0, 2.0 * math.pi, grid, True)
    return MaximalFunctionSample(parameter=t, value=val, argmax_w=pt, grid_spec=grid)


def nu_window(symbol: SchurMap, xi: complex, h: float,
              grid: GridSpec = GridSpec()) -> MaximalFunctionSample:
    """sup of N over W(xi, h) intersected with the open disk."""
    window = CarlesonWindow(xi, h)
    alpha = math.atan2(window.xi.imag, window.xi.real)
    if window.h >= 1.0:
        r_lo, a_lo, a_hi, full = 1.0 / (2.0 * grid.n_radial), 0.0, 2.0 * math.pi, True
    else:
        r_lo, a_lo, a_hi, full = 1.0 - window.h, alpha - window.h, alpha + window.h, False
    val, pt = _sup_search(symbol, lambda R, A: R * np.exp(1j * A),
                          r_lo, 1.0 - EPS_EXCLUSION, a_lo, a_hi, grid, full)
    return MaximalFunctionSample(parameter=window.h, value=val, argmax_w=pt, grid_spec=grid)


def nu_sector(symbol: SchurMap, xi: complex, h: float,
              grid: GridSpec = GridSpec()) -> MaximalFunctionSample:
    """sup of N over S(xi, h) intersected with the open disk, searched in
    polar coordinates centered at xi."""
    sector = DiskSector(xi, h)
    center = sector.xi

    def to_point(R, A):
        return center + R * np.exp(1j * A)

    def point_mask(pts):
        return np.abs(pts) < 1.0 - EPS_EXCLUSION

    val, pt = _sup_search(symbol, to_point, sector.h / grid.n_radial, sector.h,
                          0.0, 2.0 * math.pi, grid, True, point_mask)
    return MaximalFunctionSample(parameter=sector.h, value=val, argmax_w=pt, grid_spec=grid)


# ----------------------------------------------------------------------
# sub-averaging

def subaveraging_check(symbol: SchurMap, w0: complex, radius: float,
                       n_radial: int = 128, n_angular: int = 256,
                       tol_quad: float = 1e-6) -> dict:
    """Compare N(w0) with its area average over the disk D(w0, radius).

    Requires the closed disk D(w0, radius) to sit inside the unit disk and
    to avoid phi(0); under those hypotheses the average dominates the
    center value.
    """
    w0 = complex(w0)
    if abs(w0) + radius >= 1.0:
        raise PreconditionError("averaging disk must be contained in the unit disk")
    if abs(symbol.value_at_zero - w0) <= radius:
        raise PreconditionError("averaging disk must not contain phi(0)")
    lhs = counting_function(symbol, w0)

    ds = radius / n_radial
    dpsi = 2.0 * math.pi / n_angular
    s = (np.arange(n_radial) + 0.5) * ds
    psi = (np.arange(n_angular) + 0.5) * dpsi
    P, S = np.meshgrid(psi, s, indexing="ij")
    pts = w0 + S * np.exp(1j * P)
    vals = counting_function_batch(symbol, pts)
    vals = np.nan_to_num(vals, nan=0.0)
    integral = float(np.sum(vals * S) * ds * dpsi)  # unnormalized area integral
    rhs = integral / (math.pi * radius * radius)
    return {"lhs": lhs, "rhs": rhs, "pass": lhs <= rhs * (1.0 + tol_quad)}

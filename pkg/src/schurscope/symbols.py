"""Rational analytic self-maps of the closed unit disk.

The symbol classes here (polynomials, Moebius transforms, finite Blaschke
products, and finite compositions of those) are closed under composition,
continuous on the closed disk, and reduce every preimage equation
``phi(z) = w`` to a polynomial equation with cleared denominators.  This is
the whole point of the class: preimages become exact root enumeration, and
boundary values need no radial limits.

Every symbol is stored internally as a pair of polynomial coefficient
arrays ``(num, den)`` in ascending order, so evaluation, differentiation
and clearing to a polynomial are uniform across variants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateError, DomainError, ParseError

#: Default tolerance for the numerically certified self-map property.
TOL_SELFMAP = 1e-10

#: Hard cap on the algebraic degree of a composed symbol.
MAX_DEGREE = 64

_TRIM_REL = 1e-13


def _trim(c: np.ndarray) -> np.ndarray:
    """Drop trailing (highest-order) coefficients that are negligible
    relative to the largest one.  Interior small coefficients are kept."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > _TRIM_REL * scale)[0]
    return c[: keep[-1] + 1].copy()


def _compose_rational(pn, pd, qn, qd):
    # outer = pn/pd evaluated at inner = qn/qd; clear qd by the outer degree
    d = max(len(pn), len(pd)) - 1
    pn = np.pad(pn, (0, d + 1 - len(pn)))
    pd = np.pad(pd, (0, d + 1 - len(pd)))
    qn_pow = [np.ones(1, dtype=complex)]
    qd_pow = [np.ones(1, dtype=complex)]
    for _ in range(d):
        qn_pow.append(npoly.polymul(qn_pow[-1], qn))
        qd_pow.append(npoly.polymul(qd_pow[-1], qd))
    num = np.zeros(1, dtype=complex)
    den = np.zeros(1, dtype=complex)
    for i in range(d + 1):
        term = npoly.polymul(qn_pow[i], qd_pow[d - i])
        num = npoly.polyadd(num, pn[i] * term)
        den = npoly.polyadd(den, pd[i] * term)
    return _trim(num), _trim(den)


@dataclass(frozen=True)
class SchurMap:
    """Analytic self-map of the closed unit disk, variant-agnostic base.

    Subclasses provide the rational representation via ``_rational_parts``;
    everything else (evaluation, derivative, boundary values, cleared
    polynomial) is shared.
    """

    def _rational_parts(self):
        raise NotImplementedError

    @cached_property
    def _num_den(self):
        num, den = self._rational_parts()
        return _trim(num), _trim(den)

    @cached_property
    def degree(self) -> int:
        num, den = self._num_den
        return max(len(num), len(den)) - 1

    @cached_property
    def value_at_zero(self) -> complex:
        num, den = self._num_den
        return complex(num[0] / den[0])

    # -- evaluation ---------------------------------------------------

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z, tol: float = TOL_SELFMAP):
        """phi(z) for z in the closed disk (scalar or array)."""
        pts, scalar = _as_points(z)
        if pts.size and float(np.max(np.abs(pts))) > 1.0 + tol:
            raise DomainError("evaluation point outside the closed disk")
        num, den = self._num_den
        vals = npoly.polyval(pts, num) / npoly.polyval(pts, den)
        return complex(vals) if scalar else vals

    def evaluate_derivative(self, z, tol: float = TOL_SELFMAP):
        """phi'(z) on the closed disk (scalar or array)."""
        pts, scalar = _as_points(z)
        if pts.size and float(np.max(np.abs(pts))) > 1.0 + tol:
            raise DomainError("evaluation point outside the closed disk")
        vals = self._derivative_values(pts)
        return complex(vals) if scalar else vals

    def _derivative_values(self, pts):
        num, den = self._num_den
        dnum = npoly.polyder(num) if len(num) > 1 else np.zeros(1, dtype=complex)
        dden = npoly.polyder(den) if len(den) > 1 else np.zeros(1, dtype=complex)
        n = npoly.polyval(pts, num)
        d = npoly.polyval(pts, den)
        dn = npoly.polyval(pts, dnum)
        dd = npoly.polyval(pts, dden)
        return (dn * d - n * dd) / (d * d)

    def boundary_value(self, theta):
        """phi*(e^{i theta}); exact, since the class is continuous up to
        the boundary."""
        th = np.asarray(theta, dtype=float)
        vals = self.evaluate(np.exp(1j * th))
        return vals

    # -- preimage machinery --------------------------------------------

    def clear_to_polynomial(self, w: complex) -> np.ndarray:
        """Coefficients (ascending) of p with p(z) = 0 iff phi(z) = w.

        Denominators are cleared: p = num - w * den.  Raises
        ``DegenerateError`` when p vanishes identically (constant symbol
        evaluated at its constant value).
        """
        if abs(w) >= 1.0:
            raise DomainError("target w must lie in the open disk")
        num, den = self._num_den
        L = max(len(num), len(den))
        c = np.pad(num, (0, L - len(num))) - w * np.pad(den, (0, L - len(den)))
        scale = float(np.max(np.abs(c)))
        ref = max(float(np.max(np.abs(num))), float(np.max(np.abs(den))), 1.0)
        if scale <= _TRIM_REL * ref:
            raise DegenerateError("cleared polynomial vanishes identically")
        return _trim(c)

    def validate(self, n_samples: int = 256, tol: float = TOL_SELFMAP) -> "ValidationReport":
        return validate_self_map(self, n_samples, tol)


def _as_points(z):
    pts = np.asarray(z, dtype=complex)
    scalar = pts.ndim == 0
    return np.atleast_1d(pts), scalar


@dataclass(frozen=True)
class Polynomial(SchurMap):
    """phi(z) = sum c_k z^k, coefficients ascending."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise DomainError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    def _rational_parts(self):
        return np.asarray(self.coefficients, dtype=complex), np.ones(1, dtype=complex)


@dataclass(frozen=True)
class Moebius(SchurMap):
    """phi(z) = e^{i rotation} (a - z) / (1 - conj(a) z), an involution of
    the disk for rotation 0."""

    a: complex
    rotation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "rotation", float(self.rotation))
        if abs(self.a) >= 1.0:
            raise DomainError("Moebius parameter must satisfy |a| < 1")

    def _rational_parts(self):
        rot = np.exp(1j * self.rotation)
        return (np.array([rot * self.a, -rot]),
                np.array([1.0, -np.conj(self.a)], dtype=complex))


@dataclass(frozen=True)
class BlaschkeProduct(SchurMap):
    """phi(z) = e^{i rotation} prod_k (a_k - z) / (1 - conj(a_k) z)."""

    zeros: tuple
    rotation: float = 0.0

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "rotation", float(self.rotation))
        if any(abs(a) >= 1.0 for a in zeros):
            raise DomainError("Blaschke zeros must satisfy |a| < 1")

    def _rational_parts(self):
        num = np.array([np.exp(1j * self.rotation)])
        den = np.ones(1, dtype=complex)
        for a in self.zeros:
            num = npoly.polymul(num, np.array([a, -1.0], dtype=complex))
            den = npoly.polymul(den, np.array([1.0, -np.conj(a)], dtype=complex))
        return num, den


@dataclass(frozen=True)
class Composition(SchurMap):
    """phi = outer o inner.  The rational form is composed symbolically so
    preimages still reduce to one cleared polynomial; the degree is capped
    at ``MAX_DEGREE`` to keep that polynomial tractable."""

    outer: SchurMap
    inner: SchurMap

    def __post_init__(self):
        if self.outer.degree * self.inner.degree > MAX_DEGREE:
            raise DomainError(
                "composition degree %d exceeds the cap %d"
                % (self.outer.degree * self.inner.degree, MAX_DEGREE)
            )

    def _rational_parts(self):
        pn, pd = self.outer._num_den
        qn, qd = self.inner._num_den
        return _compose_rational(pn, pd, qn, qd)

    def _derivative_values(self, pts):
        # chain rule keeps conditioning independent of the composed degree
        inner_vals = self.inner.evaluate(pts, tol=math.inf)
        return (self.outer._derivative_values(inner_vals)
                * self.inner._derivative_values(pts))


def identity_map() -> Polynomial:
    return Polynomial((0.0, 1.0))


@dataclass(frozen=True)
class ValidationReport:
    max_boundary_modulus: float
    passed: bool


def validate_self_map(symbol: SchurMap, n_samples: int = 256,
                      tol: float = TOL_SELFMAP) -> ValidationReport:
    """Certify |phi| <= 1 + tol on a uniform boundary grid."""
    if n_samples < 64:
        raise DomainError("validation grid needs at least 64 samples")
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    num, den = symbol._num_den
    z = np.exp(1j * theta)
    vals = npoly.polyval(z, num) / npoly.polyval(z, den)
    m = float(np.max(np.abs(vals)))
    return ValidationReport(max_boundary_modulus=m, passed=m <= 1.0 + tol)


# -- module-level wrappers mirroring the operation names ----------------

def evaluate(symbol: SchurMap, z, tol: float = TOL_SELFMAP):
    return symbol.evaluate(z, tol)


def evaluate_derivative(symbol: SchurMap, z, tol: float = TOL_SELFMAP):
    return symbol.evaluate_derivative(z, tol)


def boundary_value(symbol: SchurMap, theta):
    return symbol.boundary_value(theta)


def clear_to_polynomial(symbol: SchurMap, w: complex) -> np.ndarray:
    return symbol.clear_to_polynomial(w)


# -- JSON symbol schema --------------------------------------------------
#
# {"type": "polynomial", "coeffs": [[re, im], ...]}
# {"type": "moebius",    "a": [re, im], "rotation": r}
# {"type": "blaschke",   "zeros": [[re, im], ...], "rotation": r}
# {"type": "compose",    "outer": {...}, "inner": {...}}

def _c(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ParseError("complex number must be a [re, im] pair, got %r" % (pair,))
    return complex(float(pair[0]), float(pair[1]))


def symbol_from_spec(spec: dict) -> SchurMap:
    """Build a symbol from its JSON-style description."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ParseError("symbol description must be an object with a 'type' key")
    kind = spec["type"]
    try:
        if kind == "polynomial":
            return Polynomial(tuple(_c(p) for p in spec["coeffs"]))
        if kind == "moebius":
            return Moebius(_c(spec["a"]), float(spec.get("rotation", 0.0)))
        if kind == "blaschke":
            return BlaschkeProduct(tuple(_c(p) for p in spec["zeros"]),
                                   float(spec.get("rotation", 0.0)))
        if kind == "compose":
            return Composition(symbol_from_spec(spec["outer"]),
                               symbol_from_spec(spec["inner"]))
    except KeyError as exc:
        raise ParseError("missing key %s in %r symbol" % (exc, kind)) from exc
    except (TypeError, ValueError) as exc:
        raise ParseError("bad field in %r symbol: %s" % (kind, exc)) from exc
    raise ParseError("unknown symbol type %r" % (kind,))


def symbol_to_spec(symbol: SchurMap) -> dict:
    if isinstance(symbol, Polynomial):
        return {"type": "polynomial",
                "coeffs": [[c.real, c.imag] for c in symbol.coefficients]}
    if isinstance(symbol, Moebius):
        return {"type": "moebius", "a": [symbol.a.real, symbol.a.imag],
                "rotation": symbol.rotation}
    if isinstance(symbol, BlaschkeProduct):
        return {"type": "blaschke",
                "zeros": [[a.real, a.imag] for a in symbol.zeros],
                "rotation": symbol.rotation}
    if isinstance(symbol, Composition):
        return {"type": "compose", "outer": symbol_to_spec(symbol.outer),
                "inner": symbol_to_spec(symbol.inner)}
    raise ParseError("cannot serialize %r" % type(symbol).__name__)


def load_symbol(path, validate: bool = True, n_samples: int = 256,
                tol: float = TOL_SELFMAP) -> SchurMap:
    """Load a symbol from a JSON file.

    Symbols failing self-map certification are rejected here rather than
    silently clipped later.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError("%s: line %d column %d: %s"
                         % (path, exc.lineno, exc.colno, exc.msg)) from exc
    except OSError as exc:
        raise ParseError("%s: %s" % (path, exc)) from exc
    symbol = symbol_from_spec(spec)
    if validate:
        report = validate_self_map(symbol, n_samples, tol)
        if not report.passed:
            raise DomainError(
                "%s: not a self-map (max boundary modulus %.6g > 1 + %g)"
                % (path, report.max_boundary_modulus, tol))
    return symbol

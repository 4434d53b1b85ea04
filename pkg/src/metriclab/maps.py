"""Catalog of analytic test maps from the unit disc into a bounded domain,
with exact derivatives, boundary traces, the weighted derivative
f*(z) = omega(f(z)) |f'(z)|, and the path upper bound
d_omega(f(z), f(w)) <= int_gamma f* |dx|.

Every map is validated at construction: a dense sample of the open disc must
land inside the target, and the closed-form derivative is cross-checked
against a finite difference at seeded points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DivergentValueError, DomainError
from .geometry import (
    UNIT_DISC,
    DomainSpec,
    boundary_distance,
    contains,
    curve_distance,
    interior_anchor,
    unit_disc,
)
from .metrics import MetricDensity, weighted_distance

_GL_X12, _GL_W12 = np.polynomial.legendre.leggauss(12)


class AnalyticMap:
    """Base class: an analytic map of the unit disc into ``target``."""

    target: DomainSpec
    variant: str = "abstract"
    continuous_on_closure: bool = True

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    # -- construction-time checks ------------------------------------------

    def _validate(self):
        rr = np.linspace(0.05, 1.0 - 1e-4, 24)
        tt = 2 * np.pi * np.arange(64) / 64
        sample = (rr[:, None] * np.exp(1j * tt)[None, :]).ravel()
        img = np.asarray(self(sample))
        if not np.all(contains(self.target, img)):
            raise DomainError(
                f"{self.variant} map sends points of the open disc outside its target")
        rng = np.random.default_rng(2024)
        pts = 0.8 * (rng.random(8) - 0.5 + 1j * (rng.random(8) - 0.5))
        h = 1e-6
        fd = (self(pts + h) - self(pts)) / h
        dv = self.derivative(pts)
        if np.max(np.abs(fd - dv) / np.maximum(1.0, np.abs(dv))) > 1e-4:
            raise ValueError(f"{self.variant} map: closed-form derivative "
                             f"disagrees with finite differences")


def _as_out(arr, z):
    return complex(arr) if np.asarray(z).ndim == 0 else arr


@dataclass
class PolynomialMap(AnalyticMap):
    """f(z) = sum_k c_k z^k (coefficients lowest degree first)."""

    coefficients: tuple
    target: DomainSpec = None
    variant = "polynomial"

    def __post_init__(self):
        if self.target is None:
            self.target = unit_disc()
        self.coefficients = tuple(complex(c) for c in self.coefficients)
        self._c = np.asarray(self.coefficients, dtype=complex)
        self._dc = self._c[1:] * np.arange(1, self._c.size)
        self._validate()

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        return _as_out(np.polynomial.polynomial.polyval(zz, self._c), z)

    def derivative(self, z):
        zz = np.asarray(z, dtype=complex)
        if self._dc.size == 0:
            return _as_out(np.zeros_like(zz), z)
        return _as_out(np.polynomial.polynomial.polyval(zz, self._dc), z)


@dataclass
class BlaschkeProduct(AnalyticMap):
    """Finite Blaschke product over the given zeros (|a_k| < 1); the factor
    for a zero at the origin is plain z."""

    zeros: tuple
    target: DomainSpec = None
    variant = "blaschke"

    def __post_init__(self):
        if self.target is None:
            self.target = unit_disc()
        self.zeros = tuple(complex(a) for a in self.zeros)
        if any(abs(a) >= 1 for a in self.zeros):
            raise ValueError("blaschke zeros need modulus < 1")
        self._validate()

    def _factor(self, a, z):
        if a == 0:
            return z
        return (abs(a) / a) * (a - z) / (1.0 - np.conj(a) * z)

    def _factor_derivative(self, a, z):
        if a == 0:
            return np.ones_like(z)
        return (abs(a) / a) * (abs(a) ** 2 - 1.0) / (1.0 - np.conj(a) * z) ** 2

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        out = np.ones_like(zz)
        for a in self.zeros:
            out = out * self._factor(a, zz)
        return _as_out(out, z)

    def derivative(self, z):
        # logarithmic-derivative sum away from the zeros, explicit product
        # rule wherever some factor vanishes
        zz = np.asarray(z, dtype=complex)
        val = np.asarray(self(zz))
        near = np.zeros(zz.shape, dtype=bool)
        for a in self.zeros:
            near |= np.abs(zz - a) < 1e-6
        out = np.zeros_like(np.atleast_1d(zz))
        flat_z = np.atleast_1d(zz)
        flat_near = np.atleast_1d(near)
        safe = ~flat_near
        if safe.any():
            zs = flat_z[safe]
            logsum = np.zeros_like(zs)
            for a in self.zeros:
                logsum += self._factor_derivative(a, zs) / self._factor(a, zs)
            out[safe] = np.atleast_1d(val)[safe] * logsum
        if flat_near.any():
            zs = flat_z[flat_near]
            acc = np.zeros_like(zs)
            for k, a in enumerate(self.zeros):
                term = self._factor_derivative(a, zs)
                for j, b in enumerate(self.zeros):
                    if j != k:
                        term = term * self._factor(b, zs)
                acc += term
            out[flat_near] = acc
        return _as_out(out.reshape(zz.shape), z)


@dataclass
class PowerCusp(AnalyticMap):
    """f(z) = w0 + c (1 - z)^alpha, principal branch, alpha in (0, 1].

    The branch cut of the power sits on [1, oo), which 1 - z never meets for
    |z| < 1; the boundary point z = 1 maps to w0 with a cusp of exponent
    alpha, and the derivative diverges there for alpha < 1.
    """

    w0: complex
    c: complex
    alpha: float
    target: DomainSpec = None
    variant = "power_cusp"

    def __post_init__(self):
        if self.target is None:
            self.target = unit_disc()
        if not (0 < self.alpha <= 1):
            raise ValueError("cusp exponent must lie in (0, 1]")
        self.w0 = complex(self.w0)
        self.c = complex(self.c)
        self._validate()

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        return _as_out(self.w0 + self.c * (1.0 - zz) ** self.alpha, z)

    def derivative(self, z):
        zz = np.asarray(z, dtype=complex)
        if self.alpha < 1 and np.any(zz == 1.0):
            raise DivergentValueError(
                "power_cusp derivative diverges at z = 1 for alpha < 1")
        out = -self.alpha * self.c * (1.0 - zz) ** (self.alpha - 1.0)
        return _as_out(out, z)


@dataclass
class AffineInto(AnalyticMap):
    """Affine squeeze of a disc-valued map into an arbitrary target:
    f(z) = anchor + s * r0 * inner(z), where r0 is the anchor's boundary
    distance, so the image stays in a compact subset for s < 1."""

    target: DomainSpec
    inner: AnalyticMap
    contraction: float
    variant = "affine_into"

    def __post_init__(self):
        if not (0 < self.contraction < 1):
            raise ValueError("contraction must lie in (0, 1)")
        if self.inner.target.kind != UNIT_DISC:
            raise ValueError("inner map must take values in the unit disc")
        self.anchor = interior_anchor(self.target)
        self.radius = boundary_distance(self.target, self.anchor)
        self._validate()

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        out = self.anchor + self.contraction * self.radius * np.asarray(self.inner(zz))
        return _as_out(out, z)

    def derivative(self, z):
        zz = np.asarray(z, dtype=complex)
        out = self.contraction * self.radius * np.asarray(self.inner.derivative(zz))
        return _as_out(out, z)


def map_eval(f: AnalyticMap, z):
    return f(z)


def map_derivative(f: AnalyticMap, z):
    return f.derivative(z)


# ---------------------------------------------------------------------------
# weighted derivative and path bound


def weighted_derivative(f: AnalyticMap, omega: MetricDensity, z):
    """f*(z) = omega(f(z)) |f'(z)|; for the hyperbolic density this is the
    modulus of the hyperbolic derivative |f'| / (1 - |f|^2)."""
    val = np.asarray(f(z), dtype=complex)
    if not np.all(contains(omega.domain, val)):
        raise DomainError("map value leaves the density's domain")
    out = omega.eval_array(val) * np.abs(np.asarray(f.derivative(z)))
    return float(out) if np.asarray(z).ndim == 0 else out


def _line_quad(fun, a: complex, b: complex, rtol: float = 1e-10,
               depth: int = 0) -> float:
    def gl(lo, hi):
        t = 0.5 * (_GL_X12 + 1.0)
        pts = lo + t * (hi - lo)
        return 0.5 * abs(hi - lo) * float(np.sum(fun(pts) * _GL_W12))

    whole = gl(a, b)
    mid = 0.5 * (a + b)
    halves = gl(a, mid) + gl(mid, b)
    if abs(whole - halves) <= rtol * (abs(halves) + 1e-30) or depth >= 24:
        return halves
    return (_line_quad(fun, a, mid, rtol, depth + 1)
            + _line_quad(fun, mid, b, rtol, depth + 1))


def path_upper_bound_check(f: AnalyticMap, omega: MetricDensity,
                           z: complex, w: complex,
                           resolution: float = 0.01) -> tuple[float, float]:
    """(lhs, rhs) with lhs = d_omega(f(z), f(w)) from the geodesic solver and
    rhs = int over the straight segment [z, w] of f* |dx|; the analytic bound
    says lhs <= rhs up to solver tolerance."""
    z, w = complex(z), complex(w)
    if z == w:
        return 0.0, 0.0
    fz, fw = complex(f(z)), complex(f(w))
    lhs = weighted_distance(omega, fz, fw, resolution).distance
    rhs = _line_quad(lambda pts: weighted_derivative(f, omega, pts), z, w)
    return lhs, rhs


# ---------------------------------------------------------------------------
# boundary traces


@dataclass
class BoundaryTrace:
    """Samples of the boundary function at uniform angles t_j = 2 pi j / n."""

    values: np.ndarray
    angles: np.ndarray
    radius: float
    exact: bool

    @property
    def n(self) -> int:
        return int(self.values.size)


def boundary_trace(f: AnalyticMap, n: int, r_b: float = 1.0) -> BoundaryTrace:
    """Sample f on the circle of radius r_b; r_b = 1 gives the exact boundary
    trace for maps continuous up to the closed disc."""
    if n < 8:
        raise ValueError("trace needs at least 8 samples")
    if not (0 < r_b <= 1):
        raise ValueError("trace radius must lie in (0, 1]")
    if r_b == 1.0 and not f.continuous_on_closure:
        raise DomainError(f"{f.variant} map has no continuous boundary extension; "
                          f"request a radial approximation with r_b < 1")
    angles = 2 * np.pi * np.arange(n) / n
    values = np.asarray(f(r_b * np.exp(1j * angles)), dtype=complex)
    exact = r_b == 1.0
    if exact:
        inside = contains(f.target, values)
        on_boundary = curve_distance(f.target, values) <= 1e-9
        if not np.all(inside | on_boundary):
            raise DomainError("exact trace leaves the closure of the target")
    return BoundaryTrace(values=values, angles=angles, radius=float(r_b), exact=exact)


def write_trace_file(trace: BoundaryTrace, file_path) -> None:
    """Angle / real / imaginary text table."""
    with open(file_path, "w") as fh:
        for t, v in zip(trace.angles, trace.values):
            fh.write(f"{float(t):.17g} {float(v.real):.17g} {float(v.imag):.17g}\n")


# ---------------------------------------------------------------------------
# catalog


def from_name(name: str, target: DomainSpec | None = None) -> AnalyticMap:
    """Resolve a config map name.

    Supported names: ``identity``, ``square`` (z^2), ``scale_NN`` (z*NN/100),
    ``const_NN`` (constant NN/100), ``cusp_aNN`` (power cusp with
    alpha = NN/100, base 0, scale 1/4), ``blaschke_pair``.  On a target other
    than the unit disc the disc map is squeezed in by an affine contraction.
    """
    disc = unit_disc()
    inner: AnalyticMap
    if name == "identity":
        inner = PolynomialMap((0.0, 1.0), disc)
    elif name == "square":
        inner = PolynomialMap((0.0, 0.0, 1.0), disc)
    elif m := re.fullmatch(r"scale_(\d+)", name):
        inner = PolynomialMap((0.0, int(m.group(1)) / 100.0), disc)
    elif m := re.fullmatch(r"const_(\d+)", name):
        inner = PolynomialMap((int(m.group(1)) / 100.0,), disc)
    elif m := re.fullmatch(r"cusp_a(\d+)", name):
        alpha = int(m.group(1)) / 100.0
        inner = PowerCusp(0.0, 0.25, alpha, disc)
    elif name == "blaschke_pair":
        inner = BlaschkeProduct((0.5, -0.3j), disc)
    else:
        raise ValueError(f"unknown map name {name!r}")
    if target is None or target.kind == UNIT_DISC:
        return inner
    return AffineInto(target, inner, 0.5)


def catalog(target: DomainSpec | None = None) -> dict[str, AnalyticMap]:
    """The standing test-map catalog used by the experiment suites."""
    names = ("identity", "square", "scale_50", "cusp_a30", "cusp_a50",
             "cusp_a70", "cusp_a100", "blaschke_pair", "const_25")
    return {name: from_name(name, target) for name in names}


def hyperbolic_derivative_modulus(f: AnalyticMap, z):
    """|f'(z)| / (1 - |f(z)|^2) spelled out verbatim; must agree exactly with
    weighted_derivative under the hyperbolic density."""
    val = np.asarray(f(z), dtype=complex)
    out = np.abs(np.asarray(f.derivative(z))) / (1.0 - np.abs(val) ** 2)
    return float(out) if np.asarray(z).ndim == 0 else out

"""Integral means, weighted Lipschitz moduli of boundary traces, and
power-law exponent fitting.

The moduli are metric-agnostic: they take an injected distance evaluator
``d(u, v) -> array`` (Euclidean, closed-form hyperbolic, or backed by the
geodesic solver), so one implementation serves the Euclidean, hyperbolic,
Bergman and quasihyperbolic Lipschitz classes alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentValueError, InsufficientDataError
from .maps import BoundaryTrace


@dataclass
class MeansCurve:
    """Integral means m_p(r) on an increasing radius ladder; p may be inf."""

    p: float
    radii: np.ndarray
    values: np.ndarray

    @property
    def abscissa(self) -> np.ndarray:
        return 1.0 - self.radii


@dataclass
class ModulusCurve:
    """Lipschitz-type modulus M(h) on a decreasing step ladder."""

    p: float
    steps: np.ndarray
    values: np.ndarray

    @property
    def abscissa(self) -> np.ndarray:
        return self.steps


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    max_residual: float
    n_points: int
    n_excluded: int = 0


def integral_means(g, r: float, p: float, n: int = 4096) -> float:
    """p-mean of g over the circle of radius r: (sum g(r e^{it_j})^p / n)^{1/p}.

    Uniform angles make the trapezoid and midpoint rules coincide by
    periodicity.  ``p = inf`` gives the sup over the sampled circle.
    Non-finite samples raise :class:`DivergentValueError`.
    """
    if not (0 < r < 1):
        raise ValueError("radius must lie in (0, 1)")
    if n < 64:
        raise ValueError("need at least 64 circle samples")
    if not (p == math.inf or p >= 1):
        raise ValueError("exponent p must satisfy p >= 1 (or inf)")
    t = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(g(r * np.exp(1j * t)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DivergentValueError(f"integral mean diverges at r = {r}")
    if p == math.inf:
        return float(np.max(vals))
    return float(np.mean(vals ** p) ** (1.0 / p))


def _pair_distances(trace: BoundaryTrace, d, k: int) -> np.ndarray:
    return np.asarray(d(np.roll(trace.values, -k), trace.values), dtype=float)


def sup_lipschitz_modulus(trace: BoundaryTrace, d, h: float) -> float:
    """max over sample pairs with angular gap < h of d(trace(t), trace(s))."""
    if not (0 < h <= math.pi):
        raise ValueError("step must lie in (0, pi]")
    n = trace.n
    gap = 2 * np.pi / n
    K = int(np.ceil(h / gap)) - 1
    K = min(K, n // 2)
    if K < 1:
        raise ValueError(f"step {h} is below the angular resolution {gap} of the trace")
    best = 0.0
    for k in range(1, K + 1):
        dist = _pair_distances(trace, d, k)
        if not np.all(np.isfinite(dist)):
            raise DivergentValueError(
                f"divergent modulus: a trace pair at gap {k * gap:.4g} has infinite "
                f"distance (boundary values touch the target boundary)")
        best = max(best, float(dist.max()))
    return best


def shift_ladder_indices(n: int, h: float) -> list[int]:
    """Dyadic shift ladder {h/8, h/4, h/2, h} rounded to the angular grid."""
    gap = 2 * np.pi / n
    return sorted({max(1, round(s / gap)) for s in (h / 8, h / 4, h / 2, h)})


def mean_modulus_at_shifts(trace: BoundaryTrace, d, p: float, ks) -> float:
    """p-mean modulus maximized over explicit grid-shift indices."""
    gap = 2 * np.pi / trace.n
    best = 0.0
    for k in ks:
        dist = _pair_distances(trace, d, int(k))
        if not np.all(np.isfinite(dist)):
            raise DivergentValueError(
                f"divergent modulus: a trace pair at shift {k * gap:.4g} has infinite "
                f"distance (boundary values touch the target boundary)")
        best = max(best, float(np.mean(dist ** p) ** (1.0 / p)))
    return best


def mean_lipschitz_modulus(trace: BoundaryTrace, d, p: float, h: float) -> float:
    """sup over the dyadic shift ladder {h/8, h/4, h/2, h} of the p-mean of
    d(trace(t+s), trace(t)); shifts are rounded to the trace's angular grid."""
    if not (0 < h <= math.pi):
        raise ValueError("step must lie in (0, pi]")
    if p < 1:
        raise ValueError("exponent p must satisfy p >= 1")
    return mean_modulus_at_shifts(trace, d, p, shift_ladder_indices(trace.n, h))


def fit_exponent(curve: MeansCurve | ModulusCurve) -> ExponentFit:
    """Least-squares line through (log abscissa, log value).

    The slope estimates alpha - 1 for means curves (abscissa 1 - r) and
    alpha for modulus curves (abscissa h).  Zero values are excluded and
    counted; fewer than 4 usable points or less than 1.5 decades of abscissa
    span raise :class:`InsufficientDataError`.
    """
    x = np.asarray(curve.abscissa, dtype=float)
    y = np.asarray(curve.values, dtype=float)
    usable = y > 0
    n_excluded = int(np.sum(~usable))
    x, y = x[usable], y[usable]
    if x.size < 4:
        raise InsufficientDataError(
            f"power-law fit needs at least 4 nonzero points, got {x.size}")
    span = math.log10(x.max() / x.min())
    if span < 1.5:
        raise InsufficientDataError(
            f"abscissa spans {span:.2f} decades; need at least 1.5")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    resid = ly - fitted
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 and ss_res < 1e-28 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return ExponentFit(
        slope=float(slope), intercept=float(intercept),
        r_squared=float(min(max(r2, 0.0), 1.0)), max_residual=float(np.max(np.abs(resid))),
        n_points=int(x.size), n_excluded=n_excluded,
    )


def means_curve(g, radii, p: float, n: int = 4096) -> MeansCurve:
    """Integral means along a radius ladder."""
    radii = np.asarray(radii, dtype=float)
    vals = np.array([integral_means(g, r, p, n) for r in radii])
    return MeansCurve(p=p, radii=radii, values=vals)


def modulus_curve(trace: BoundaryTrace, d, steps, p: float = math.inf) -> ModulusCurve:
    """Lipschitz modulus along a step ladder (sup for p = inf, p-mean else)."""
    steps = np.asarray(steps, dtype=float)
    if p == math.inf:
        vals = np.array([sup_lipschitz_modulus(trace, d, h) for h in steps])
    else:
        vals = np.array([mean_lipschitz_modulus(trace, d, p, h) for h in steps])
    return ModulusCurve(p=p, steps=steps, values=vals)

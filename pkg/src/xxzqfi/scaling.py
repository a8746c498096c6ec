"""Finite-size scaling of renormalized observables.

A renormalized curve ``O(Delta_n(Delta))`` after ``n`` RG steps describes a
chain of ``N = 3**(n+1)`` sites.  Its slope in the bare anisotropy has a
negative minimum at a pseudo-critical ``Delta_m > 1`` which drifts to 1 as
``N`` grows; the exponent follows from log-log fits of ``|dO/dDelta|_m`` and
``Delta_m - 1`` against ``N``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError, DomainError, XXZQFIError
from .qfi import ASYMPTOTIC_DELTA, DEFAULT_H, Observable, evaluate_observable, renormalized_observable
from .rgflow import BLOCK_SIZE, flow_jacobian, predicted_beta, renormalized_delta

__all__ = [
    "Curve",
    "PseudoCritical",
    "ScalingFit",
    "ScalingResult",
    "Law",
    "make_grid",
    "build_curve",
    "differentiate",
    "observable_slope",
    "golden_section_min",
    "find_pseudo_critical",
    "fit_beta",
    "scaling_analysis",
    "DEFAULT_GRID_MIN",
    "DEFAULT_GRID_MAX",
    "DEFAULT_GRID_STEP",
    "DEFAULT_H_CURVE",
]

DEFAULT_GRID_MIN = 0.0
DEFAULT_GRID_MAX = 2.5
DEFAULT_GRID_STEP = 0.005
DEFAULT_H_CURVE = 1e-3
REFINE_TOL = 1e-8


class Law(str, enum.Enum):
    DERIVATIVE_GROWTH = "derivative_growth"
    DELTA_SHIFT = "delta_shift"


@dataclass(frozen=True, eq=False)
class Curve:
    grid: np.ndarray
    values: np.ndarray
    n_r: int
    observable: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise DomainError("grid and values must be 1-d arrays of equal length")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise DomainError("grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def value_at(self, delta):
        idx = np.flatnonzero(np.isclose(self.grid, delta, rtol=0, atol=1e-12))
        if not idx.size:
            raise KeyError(delta)
        return float(self.values[idx[0]])


@dataclass(frozen=True)
class PseudoCritical:
    delta_m: float
    min_derivative: float
    n_r: int
    effective_sites: int


@dataclass(frozen=True)
class ScalingFit:
    """Ordinary least-squares line through ``(ln N, ln y)``."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple
    law: Law

    @property
    def beta(self):
        return self.slope if self.law is Law.DERIVATIVE_GROWTH else -self.slope


@dataclass(frozen=True)
class ScalingResult:
    observable: str
    pseudo_critical: tuple
    derivative_fit: ScalingFit
    shift_fit: ScalingFit
    analytic_beta: float

    @property
    def beta_derivative(self):
        return self.derivative_fit.beta

    @property
    def beta_shift(self):
        return self.shift_fit.beta


def make_grid(lo=DEFAULT_GRID_MIN, hi=DEFAULT_GRID_MAX, step=DEFAULT_GRID_STEP):
    """Uniform grid ``lo, lo+step, ..., hi`` without accumulated round-off."""
    if not step > 0 or not hi > lo or lo < 0:
        raise DomainError(f"invalid grid [{lo}, {hi}] step {step}")
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def build_curve(observable, n_r, grid=None, h=DEFAULT_H, log_base=2):
    observable = Observable(observable)
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    values = np.empty(grid.size)
    for i, d in enumerate(grid):
        try:
            values[i] = renormalized_observable(observable, d, n_r, h, log_base)
        except XXZQFIError as exc:
            raise AnalysisError(
                f"{observable.value} failed at grid index {i} (Delta={d!r}): {exc}"
            ) from exc
    return Curve(grid, values, int(n_r), observable.value)


def differentiate(curve):
    """Central differences inside, one-sided differences at both ends."""
    if curve.grid.size < 3:
        raise DomainError("need at least 3 points to differentiate")
    steps = np.diff(curve.grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise DomainError("differentiate needs a uniform grid")
    slope = np.gradient(curve.values, steps[0], edge_order=1)
    return Curve(curve.grid, slope, curve.n_r, curve.observable)


def observable_slope(observable, bare_delta, n_r, h=DEFAULT_H, h_curve=DEFAULT_H_CURVE, log_base=2):
    """``d O(Delta_n) / d Delta`` at one bare point via the chain rule.

    The observable's own derivative is a central difference at the flowed
    anisotropy; the flow Jacobian is analytic.
    """
    d_n = renormalized_delta(bare_delta, n_r)
    if not d_n <= ASYMPTOTIC_DELTA:
        return 0.0
    jac = flow_jacobian(bare_delta, n_r)
    step = h_curve * max(1.0, d_n)

    def f(x):
        return evaluate_observable(observable, x, h, log_base)

    if d_n - step >= 0:
        inner = (f(d_n + step) - f(d_n - step)) / (2.0 * step)
    else:
        inner = (-3.0 * f(d_n) + 4.0 * f(d_n + step) - f(d_n + 2.0 * step)) / (2.0 * step)
    return inner * jac


def golden_section_min(f, a, b, tol=REFINE_TOL):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        # ties move the bracket left, toward smaller Delta
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def find_pseudo_critical(observable, n_r, grid=None, h=DEFAULT_H, h_curve=DEFAULT_H_CURVE,
                         log_base=2, tol=REFINE_TOL):
    """Locate the most negative slope of the renormalized curve.

    A coarse argmin on the differentiated grid curve is refined by a
    golden-section search on the pointwise chain-rule slope.
    """
    if int(n_r) != n_r or n_r < 1:
        raise DomainError(f"pseudo-critical point needs n_r >= 1, got {n_r!r}")
    n_r = int(n_r)
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    slope_curve = differentiate(build_curve(observable, n_r, grid, h, log_base))
    i = int(np.argmin(slope_curve.values))
    if i == 0 or i == grid.size - 1:
        raise AnalysisError(
            f"no interior minimum of d{Observable(observable).value}/dDelta for n_r={n_r} "
            f"on [{grid[0]}, {grid[-1]}]"
        )

    def slope(x):
        return observable_slope(observable, x, n_r, h, h_curve, log_base)

    # The grid derivative is smoothed over one step; re-pick the bracket
    # from pointwise slopes around the coarse minimum.
    near = range(max(i - 2, 1), min(i + 2, grid.size - 2) + 1)
    j = min(near, key=lambda k: (slope(grid[k]), k))
    x, fx = golden_section_min(slope, grid[j - 1], grid[j + 1], tol)
    if not (x > 1.0 and fx < 0.0):
        raise AnalysisError(
            f"minimum at Delta={x!r} with slope {fx!r} is not a pseudo-critical point"
        )
    return PseudoCritical(float(x), float(fx), n_r, BLOCK_SIZE ** (n_r + 1))


def fit_beta(points, law):
    """Least-squares line ``ln y = slope * ln N + intercept``.

    For ``derivative_growth`` y is ``|dO/dDelta|_m`` and ``slope = +beta``;
    for ``delta_shift`` y is ``Delta_m - 1`` and ``slope = -beta``.
    """
    law = Law(law)
    pts = [(float(n), float(y)) for n, y in points]
    if len(pts) < 3:
        raise DomainError(f"need at least 3 points for a fit, got {len(pts)}")
    if any(not (n > 0 and y > 0) for n, y in pts):
        raise DomainError("fit needs positive N and y values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ScalingFit(float(slope), float(intercept), min(1.0, max(0.0, r2)),
                      tuple(zip(x.tolist(), y.tolist())), law)


def scaling_analysis(observable, n_r_values=range(1, 7), grid=None, h=DEFAULT_H,
                     h_curve=DEFAULT_H_CURVE, log_base=2):
    """Pseudo-critical points for each ``n_r`` and both exponent fits."""
    observable = Observable(observable)
    pcs = tuple(
        find_pseudo_critical(observable, n, grid, h, h_curve, log_base) for n in n_r_values
    )
    deriv = fit_beta([(p.effective_sites, abs(p.min_derivative)) for p in pcs], Law.DERIVATIVE_GROWTH)
    shift = fit_beta([(p.effective_sites, p.delta_m - 1.0) for p in pcs], Law.DELTA_SHIFT)
    return ScalingResult(observable.value, pcs, deriv, shift, predicted_beta())

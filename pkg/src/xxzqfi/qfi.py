"""Quantum Fisher information with respect to the anisotropy Delta.

Three independent routes are provided:

* :func:`qfi_spectral` -- eigen-decomposition of rho(Delta) and the matrix
  elements of a finite-difference d(rho)/dDelta, split into classical
  (eigenvalue drift) and quantum (eigenvector rotation) parts;
* :func:`qfi_pure` -- ``4 (<dpsi|dpsi> - |<psi|dpsi>|**2)`` for pure families;
* :func:`qfi_bures_oracle` -- ``4 D_B**2 / dDelta**2`` from the Bures distance
  between two nearby states.

It also carries the published closed-form curves for the renormalized block
state and its one-site reduction, and evaluates any of these observables at
the RG-flowed anisotropy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ComputationError, DomainError, GaugeError
from .quantum_state import (
    DensityMatrix,
    Sector,
    block_ground_state,
    bures_distance_sq,
    density_from_pure,
    jacobi_eigh,
    partial_trace,
    spectral,
    von_neumann_entropy,
)
from .rgflow import ground_amplitude, renormalized_delta

__all__ = [
    "QfiBreakdown",
    "ParametricState",
    "SldMatrix",
    "Observable",
    "block_family",
    "site1_family",
    "constant_family",
    "block_pure_family",
    "qfi_spectral",
    "qfi_pure",
    "sld",
    "qfi_bures_oracle",
    "closed_form_full",
    "closed_form_site1",
    "full_state_ratio",
    "renormalized_observable",
    "cramer_rao_bound",
    "DEFAULT_H",
]

DEFAULT_H = 1e-5
PAIR_CUTOFF = 1e-12
DEGENERACY_TOL = 1e-10
# Beyond this the closed forms overflow; they are replaced by 4/Delta**4.
ASYMPTOTIC_DELTA = 1e50


@dataclass(frozen=True)
class QfiBreakdown:
    total: float
    classical_part: float
    quantum_part: float


@dataclass(frozen=True)
class ParametricState:
    """A family Delta -> rho(Delta) defined on ``[domain_min, domain_max]``."""

    evaluator: Callable[[float], DensityMatrix]
    description: str = ""
    domain_min: float = 0.0
    domain_max: float = math.inf

    def __call__(self, delta):
        return self.evaluator(delta)


@dataclass(frozen=True, eq=False)
class SldMatrix:
    entries: np.ndarray


def block_pure_family(which=Sector.UP):
    """Delta -> |phi_0> (or |phi_0'>) as a :class:`PureState`."""
    return lambda delta: block_ground_state(delta, which)


def block_family(which=Sector.UP):
    """Renormalized three-site block state ``rho_123 = |phi_0><phi_0|``."""
    return ParametricState(
        lambda d: density_from_pure(block_ground_state(d, which)),
        f"rho_123 ({Sector(which).value})",
    )


def site1_family(which=Sector.UP):
    """Reduced state of site 1 obtained by tracing sites 2 and 3 out of ``rho_123``."""
    return ParametricState(
        lambda d: partial_trace(density_from_pure(block_ground_state(d, which)), {1}),
        f"rho_1 ({Sector(which).value})",
    )


def constant_family(rho):
    return ParametricState(lambda d: rho, "constant")


def _step(delta, h):
    if not h > 0:
        raise DomainError(f"finite-difference step must be positive, got {h!r}")
    return h * max(1.0, abs(delta))


def _stencil(f, delta, h, lower):
    """Value and first derivative of ``f`` at ``delta``.

    Central difference in the interior, second-order forward difference when
    ``delta - h`` would leave the domain.  ``f`` returns arrays.
    """
    h = _step(delta, h)
    f0 = f(delta)
    if delta - h >= lower:
        return f0, (f(delta + h) - f(delta - h)) / (2.0 * h)
    return f0, (-3.0 * f0 + 4.0 * f(delta + h) - f(delta + 2.0 * h)) / (2.0 * h)


def _eigen_frame(state, delta, h):
    """Eigenvalues of rho and d(rho) in its eigenbasis, degenerate blocks diagonalized."""
    if not state.domain_min <= delta <= state.domain_max:
        raise DomainError(f"Delta = {delta!r} outside the family's domain")
    rho, drho = _stencil(lambda d: np.asarray(state(d).entries), delta, h, state.domain_min)
    sd = spectral(rho)
    lam = sd.eigenvalues.copy()
    if lam[-1] < -1e-10:
        raise ComputationError(f"family is not PSD at Delta = {delta!r}")
    lam[lam < 0] = 0.0
    v = sd.eigenvectors
    m = v.conj().T @ drho @ v
    # Inside a degenerate block the eigenbasis is arbitrary; choose the one
    # that diagonalizes d(rho) so the classical/quantum split is well defined.
    start = 0
    n = lam.size
    while start < n:
        stop = start + 1
        while stop < n and abs(lam[start] - lam[stop]) <= DEGENERACY_TOL:
            stop += 1
        if stop - start > 1 and 2.0 * lam[start] >= PAIR_CUTOFF:
            block = slice(start, stop)
            _, u = jacobi_eigh(0.5 * (m[block, block] + m[block, block].conj().T))
            v[:, block] = v[:, block] @ u
        start = stop
    m = v.conj().T @ drho @ v
    return lam, v, m


def qfi_spectral(state, delta, h=DEFAULT_H):
    """QFI of ``state`` at ``delta`` split as classical + quantum parts.

    With ``M = <k| d(rho) |k'>`` in the eigenbasis of rho:
    ``F_C = sum_k M_kk**2 / l_k`` and
    ``F_Q = sum_{k != k'} 2 |M_kk'|**2 / (l_k + l_k')``, the latter being the
    eigenvector-rotation term ``2 (l_k - l_k')**2 / (l_k + l_k') |<k|dk'>|**2``.
    Pairs with ``l_k + l_k' < 1e-12`` are skipped.
    """
    lam, _, m = _eigen_frame(state, delta, h)
    pair = lam[:, None] + lam[None, :]
    ok = pair >= PAIR_CUTOFF
    weights = np.where(ok, 2.0 / np.where(ok, pair, 1.0), 0.0)
    terms = weights * np.abs(m) ** 2
    classical = float(np.trace(terms))
    quantum = float(np.sum(terms) - classical)
    return QfiBreakdown(classical + quantum, classical, quantum)


def sld(state, delta, h=DEFAULT_H):
    """Symmetric logarithmic derivative ``L`` with ``d(rho) = (rho L + L rho) / 2``.

    ``L`` is set to zero outside the support pairs that enter the QFI.
    """
    lam, v, m = _eigen_frame(state, delta, h)
    pair = lam[:, None] + lam[None, :]
    ok = pair >= PAIR_CUTOFF
    if not ok.any():
        raise ComputationError("no eigenvalue pair above the cutoff; singular family")
    l_eig = np.where(ok, 2.0 * m / np.where(ok, pair, 1.0), 0.0)
    entries = v @ l_eig @ v.conj().T
    return SldMatrix(0.5 * (entries + entries.conj().T))


def qfi_pure(psi, delta, h=DEFAULT_H, domain_min=0.0):
    """Pure-state QFI ``4 (<dpsi|dpsi> - |<psi|dpsi>|**2)``.

    ``psi`` maps Delta to a :class:`PureState`.  The gauge is fixed by making
    the amplitude at the largest-magnitude index of ``psi(delta)`` real and
    positive at every stencil point.
    """
    ref = np.asarray(psi(delta).amplitudes)
    mags = np.abs(ref)
    anchor = int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])

    def fixed(d):
        a = np.asarray(psi(d).amplitudes)
        pivot = a[anchor]
        if abs(pivot) < 1e-8:
            raise GaugeError(
                f"gauge amplitude vanishes at Delta = {d!r}; reduce the step h"
            )
        return a * (abs(pivot) / pivot)

    amp, damp = _stencil(fixed, delta, h, domain_min)
    overlap = np.vdot(amp, damp)
    value = 4.0 * (np.vdot(damp, damp).real - abs(overlap) ** 2)
    return max(0.0, float(value))


def qfi_bures_oracle(state, delta, d_delta=1e-3):
    """QFI from ``D_B**2(rho_a, rho_b) = F dDelta**2 / 4`` for nearby states.

    The pair is placed symmetrically around ``delta`` so the estimate is
    second-order accurate; at the lower domain edge a Richardson combination
    of two forward separations is used instead.
    """
    if not 1e-6 <= d_delta <= 1e-2:
        raise DomainError(f"d_delta must lie in [1e-6, 1e-2], got {d_delta!r}")

    def estimate(a, b):
        return 4.0 * bures_distance_sq(state(a), state(b)) / (b - a) ** 2

    if delta - 0.5 * d_delta >= state.domain_min:
        return estimate(delta - 0.5 * d_delta, delta + 0.5 * d_delta)
    coarse = estimate(delta, delta + d_delta)
    fine = estimate(delta, delta + 0.5 * d_delta)
    return max(0.0, 2.0 * fine - coarse)


def closed_form_full(delta):
    """Published QFI of the renormalized block state:
    ``4 q**2 / ((8 + Delta**2)(3 - Delta q)(4 - Delta q))``.
    """
    delta = float(delta)
    if delta < 0 or math.isnan(delta):
        raise DomainError(f"anisotropy must be non-negative, got {delta!r}")
    if delta > ASYMPTOTIC_DELTA:
        return 4.0 / delta**4 if math.isfinite(delta) else 0.0
    q = ground_amplitude(delta)
    return 4.0 * q * q / ((8.0 + delta * delta) * (3.0 - delta * q) * (4.0 - delta * q))


def closed_form_site1(delta):
    """Published QFI of the one-site reduced state:
    ``8 q / ((8 + Delta**2)**2 (Delta + 3 q))``.
    """
    delta = float(delta)
    if delta < 0 or math.isnan(delta):
        raise DomainError(f"anisotropy must be non-negative, got {delta!r}")
    if delta > ASYMPTOTIC_DELTA:
        return 4.0 / delta**4 if math.isfinite(delta) else 0.0
    q = ground_amplitude(delta)
    return 8.0 * q / ((8.0 + delta * delta) ** 2 * (delta + 3.0 * q))


def full_state_ratio(delta):
    """``(2 + q**2) / (2 (1 + q**2))``: closed-form full-state QFI over the
    first-principles pure-state QFI of ``|phi_0>``."""
    q = ground_amplitude(delta)
    return (2.0 + q * q) / (2.0 * (1.0 + q * q))


class Observable(str, enum.Enum):
    QFI_FULL_CLOSED = "qfi_full_closed"
    QFI_SITE1_CLOSED = "qfi_site1_closed"
    QFI_FULL_ENGINE = "qfi_full_engine"
    QFI_SITE1_ENGINE = "qfi_site1_engine"
    ENTROPY_SITE1 = "entropy_site1"

    @property
    def provenance(self):
        if self in (Observable.QFI_FULL_CLOSED, Observable.QFI_SITE1_CLOSED):
            return "closed-form"
        if self is Observable.ENTROPY_SITE1:
            return "spectral entropy"
        return "spectral engine"

    @property
    def full_state(self):
        return self in (Observable.QFI_FULL_CLOSED, Observable.QFI_FULL_ENGINE)


_FULL = block_family()
_SITE1 = site1_family()


def _evaluate(observable, delta, h, log_base):
    if observable is Observable.QFI_FULL_CLOSED:
        return closed_form_full(delta)
    if observable is Observable.QFI_SITE1_CLOSED:
        return closed_form_site1(delta)
    if observable is Observable.QFI_FULL_ENGINE:
        return qfi_spectral(_FULL, delta, h).total
    if observable is Observable.QFI_SITE1_ENGINE:
        return qfi_spectral(_SITE1, delta, h).total
    return von_neumann_entropy(_SITE1(delta), log_base)


def evaluate_observable(observable, delta, h=DEFAULT_H, log_base=2):
    """Observable at anisotropy ``delta`` (no flow); 0 in the Delta -> inf limit."""
    observable = Observable(observable)
    if not delta <= ASYMPTOTIC_DELTA:
        return 0.0
    return _evaluate(observable, delta, h, log_base)


def renormalized_observable(observable, bare_delta, n_r, h=DEFAULT_H, log_base=2):
    """Observable evaluated at the anisotropy reached after ``n_r`` RG steps.

    No Jacobian of the flow is applied: the curve is ``O(Delta_n(Delta))``.
    """
    return evaluate_observable(observable, renormalized_delta(bare_delta, n_r), h, log_base)


def cramer_rao_bound(f, trials=1):
    """Lower bound ``1 / sqrt(M F)`` on the estimator spread."""
    if not f > 0:
        raise DomainError(f"Fisher information must be positive, got {f!r}")
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise DomainError(f"number of trials must be a positive integer, got {trials!r}")
    return 1.0 / math.sqrt(int(trials) * f)

"""Three-site block quantum RG map of the spin-1/2 XXZ chain.

One RG step replaces every three-site block by an effective spin-1/2 built
from the two degenerate block ground states.  The couplings transform as

    J'     = J * (2q / (q**2 + 2))**2
    Delta' = Delta * q**2 / 4

with the ground amplitude ``q = -(Delta + sqrt(Delta**2 + 8)) / 2``.  The map
has fixed points at Delta = 0 and Delta = 1; the latter is the critical one.

Strongly Neel-like couplings (Delta >> 1) grow roughly like Delta**3 / 4 per
step, so a long flow can overflow.  Overflowed anisotropies are kept as
``inf`` (and the exchange as ``0.0``); downstream code treats them as the
Delta -> infinity limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

__all__ = [
    "CouplingConstants",
    "FlowTrace",
    "ground_amplitude",
    "rg_step",
    "flow",
    "renormalized_delta",
    "flow_derivative",
    "flow_jacobian",
    "predicted_beta",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 3


def _check_delta(delta, allow_inf=False):
    delta = float(delta)
    if math.isnan(delta) or delta < 0 or (math.isinf(delta) and not allow_inf):
        raise DomainError(f"anisotropy must be a finite non-negative real, got {delta!r}")
    return delta


@dataclass(frozen=True)
class CouplingConstants:
    """Exchange ``j`` (energy unit) and anisotropy ``delta`` of an XXZ chain.

    ``delta == inf`` and ``j == 0.0`` only appear as the overflow/underflow
    limits of a divergent flow.
    """

    j: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        j = float(self.j)
        if math.isnan(j) or j < 0 or math.isinf(j):
            raise DomainError(f"exchange coupling must be a positive real, got {self.j!r}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "delta", _check_delta(self.delta, allow_inf=True))


@dataclass(frozen=True)
class FlowTrace:
    """Couplings after 0, 1, ..., ``n_r`` RG steps (``steps[0]`` is bare)."""

    steps: tuple[CouplingConstants, ...]
    n_r: int = field(init=False)
    effective_sites: int = field(init=False)

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise DomainError("a flow trace needs at least the bare couplings")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "n_r", len(steps) - 1)
        object.__setattr__(self, "effective_sites", BLOCK_SIZE ** len(steps))

    @property
    def deltas(self):
        return [c.delta for c in self.steps]

    @property
    def final(self):
        return self.steps[-1]


def ground_amplitude(delta):
    """Middle-site amplitude ``q`` of the degenerate three-site ground states.

    ``q`` is the negative root of ``q**2 + delta*q - 2 = 0``.

    >>> ground_amplitude(1.0)
    -2.0
    """
    delta = _check_delta(delta)
    return -0.5 * (delta + math.sqrt(delta * delta + 8.0))


def _next_delta(delta, q2):
    return 0.25 * delta * q2


def rg_step(c):
    """Apply one block-RG step to ``c`` and return the new couplings."""
    if math.isinf(c.delta):
        return CouplingConstants(0.0, math.inf)
    q = ground_amplitude(c.delta)
    q2 = q * q
    ratio = 2.0 * q / (q2 + 2.0)
    return CouplingConstants(c.j * ratio * ratio, _next_delta(c.delta, q2))


def flow(c, n_r):
    """Iterate :func:`rg_step` ``n_r`` times starting from ``c``."""
    if isinstance(n_r, bool) or int(n_r) != n_r or n_r < 0:
        raise DomainError(f"number of RG steps must be a non-negative integer, got {n_r!r}")
    steps = [c]
    for _ in range(int(n_r)):
        steps.append(rg_step(steps[-1]))
    return FlowTrace(tuple(steps))


def renormalized_delta(delta, n_r):
    """Anisotropy after ``n_r`` RG steps from bare ``delta`` (J is irrelevant)."""
    if int(n_r) != n_r or n_r < 0:
        raise DomainError(f"number of RG steps must be a non-negative integer, got {n_r!r}")
    d = _check_delta(delta)
    for _ in range(int(n_r)):
        if math.isinf(d):
            break
        q = ground_amplitude(d)
        d = _next_delta(d, q * q)
    return d


def flow_derivative(delta):
    """Analytic ``dDelta'/dDelta = q**2/4 + (delta/2) * q * dq/dDelta``.

    Uses ``dq/dDelta = q / sqrt(delta**2 + 8)``.  Equals 5/3 at the critical
    fixed point and 1/2 at Delta = 0.
    """
    delta = _check_delta(delta, allow_inf=True)
    if math.isinf(delta):
        return math.inf
    q = ground_amplitude(delta)
    dq = q / math.sqrt(delta * delta + 8.0)
    return 0.25 * q * q + 0.5 * delta * q * dq


def flow_jacobian(delta, n_r):
    """``dDelta_n / dDelta_0`` along the flow, via the chain rule."""
    d = _check_delta(delta)
    jac = 1.0
    for _ in range(int(n_r)):
        if math.isinf(d):
            return math.inf
        jac *= flow_derivative(d)
        d = renormalized_delta(d, 1)
    return jac


def predicted_beta():
    """Scaling exponent from the linearized flow: ``ln(dDelta'/dDelta|_1) / ln 3``.

    Near the critical point ``Delta_n - 1 ~ lambda**n (Delta - 1)`` with
    ``lambda = 5/3`` and ``N = 3**(n+1)``, hence ``Delta_m - 1 ~ N**-beta``.
    """
    return math.log(flow_derivative(1.0)) / math.log(BLOCK_SIZE)

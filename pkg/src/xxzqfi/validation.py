"""Invariant suite behind ``xxzqfi validate``.

Every check measures one error quantity and compares it with a fixed
tolerance; ``tol_scale`` multiplies all tolerances (0 forces failures).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ed import verify_block_ground_space
from .qfi import (
    block_family,
    block_pure_family,
    closed_form_full,
    closed_form_site1,
    full_state_ratio,
    qfi_bures_oracle,
    qfi_pure,
    qfi_spectral,
    renormalized_observable,
    site1_family,
    sld,
)
from .quantum_state import Sector, bures_distance_sq
from .rgflow import CouplingConstants, flow_derivative, ground_amplitude, predicted_beta, rg_step

__all__ = ["CheckResult", "run_checks", "discrepancy_table"]

SPOT_DELTAS = (0.1, 0.5, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool


def _rel(a, b):
    return abs(a - b) / abs(b)


def _grid():
    return np.linspace(0.0, 3.0, 61)


def _checks():
    grid = _grid()
    full, site1 = block_family(), site1_family()
    pure = block_pure_family()

    yield "ground_amplitude_quadratic", max(
        abs(q * q + d * q - 2.0) for d in grid for q in [ground_amplitude(d)]
    ), 1e-12

    yield "rg_fixed_points", max(
        abs(rg_step(CouplingConstants(1.0, d)).delta - d) for d in (0.0, 1.0)
    ), 1e-12

    def fd(d, e=1e-6):
        return (rg_step(CouplingConstants(1, d + e)).delta - rg_step(CouplingConstants(1, d - e)).delta) / (2 * e)

    yield "flow_derivative_vs_finite_difference", max(
        _rel(flow_derivative(d), fd(d)) for d in np.linspace(0.1, 3.0, 30)
    ), 1e-5

    yield "predicted_beta", abs(predicted_beta() - math.log(5 / 3) / math.log(3)), 1e-12

    yield "closed_full_small_delta_limit", abs(closed_form_full(1e-8) - 1 / 12), 1e-8
    yield "closed_site1_small_delta_limit", abs(closed_form_site1(1e-8) - 1 / 24), 1e-8
    yield "closed_full_large_delta_asymptote", _rel(100.0**4 * closed_form_full(100.0), 4.0), 5e-3
    yield "closed_site1_large_delta_asymptote", _rel(100.0**4 * closed_form_site1(100.0), 4.0), 5e-3

    yield "site1_engine_vs_closed_form", max(
        _rel(qfi_spectral(site1, d).total, closed_form_site1(d)) for d in grid
    ), 1e-6

    yield "engine_vs_bures_oracle", max(
        _rel(qfi_spectral(fam, d).total, qfi_bures_oracle(fam, d))
        for fam in (site1, full) for d in SPOT_DELTAS
    ), 1e-3

    yield "site1_quantum_part_zero", max(abs(qfi_spectral(site1, d).quantum_part) for d in grid), 1e-10
    yield "block_classical_part_zero", max(abs(qfi_spectral(full, d).classical_part) for d in grid), 1e-10

    yield "sld_reproduces_qfi", max(
        abs(np.trace(fam(d).entries @ L @ L).real - qfi_spectral(fam, d).total)
        for fam in (site1, full) for d in SPOT_DELTAS
        for L in [sld(fam, d).entries]
    ), 1e-8

    yield "pure_block_qfi_at_zero", abs(qfi_pure(pure, 0.0) - 1 / 8), 1e-6
    yield "full_state_ratio_identity", max(
        _rel(closed_form_full(d), qfi_pure(pure, d) * full_state_ratio(d)) for d in grid
    ), 1e-6

    block = [verify_block_ground_space(d) for d in (0.0, 0.5, 1.0, 2.0)]
    yield "block_ground_degeneracy", max(abs(g.degeneracy - 2) for g in block), 0.0
    yield "block_ground_energy", max(
        abs(g.energy - ground_amplitude(d) / 2) for g, d in zip(block, (0.0, 0.5, 1.0, 2.0))
    ), 1e-10
    yield "block_projector_distance", max(g.projector_distance for g in block), 1e-9

    down_full, down_site1 = block_family(Sector.DOWN), site1_family(Sector.DOWN)
    yield "sector_choice_invariance", max(
        abs(qfi_spectral(a, d).total - qfi_spectral(b, d).total)
        for a, b in ((full, down_full), (site1, down_site1)) for d in SPOT_DELTAS
    ), 1e-10

    d_delta = 1e-3
    yield "bures_small_separation", max(
        _rel(bures_distance_sq(site1(d), site1(d + d_delta)),
             0.25 * closed_form_site1(d) * d_delta**2)
        for d in SPOT_DELTAS
    ), 1e-2

    yield "crossing_invariance", max(
        abs(renormalized_observable(obs, 1.0, n) - renormalized_observable(obs, 1.0, 0))
        for obs in ("qfi_full_closed", "qfi_site1_closed", "entropy_site1") for n in range(1, 7)
    ), 1e-10


def run_checks(tol_scale=1.0):
    results = []
    for name, measured, tol in _checks():
        tol = tol * tol_scale
        results.append(CheckResult(name, float(measured), tol, bool(measured <= tol)))
    return results


def discrepancy_table(deltas=(0.0, 0.5, 1.0, 1.5, 2.0, 3.0)):
    """Rows ``(delta, closed_form, engine, ratio, predicted_ratio)`` for the block state."""
    pure = block_pure_family()
    rows = []
    for d in deltas:
        closed, engine = closed_form_full(d), qfi_pure(pure, d)
        rows.append((d, closed, engine, closed / engine, full_state_ratio(d)))
    return rows

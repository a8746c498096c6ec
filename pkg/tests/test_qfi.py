import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzqfi.errors import DomainError, GaugeError
from xxzqfi.qfi import (
    ASYMPTOTIC_DELTA,
    Observable,
    ParametricState,
    block_family,
    block_pure_family,
    closed_form_full,
    closed_form_site1,
    constant_family,
    cramer_rao_bound,
    evaluate_observable,
    full_state_ratio,
    qfi_bures_oracle,
    qfi_pure,
    qfi_spectral,
    renormalized_observable,
    site1_family,
    sld,
)
from xxzqfi.quantum_state import DensityMatrix, PureState, Sector, density_from_pure

# Independent mpmath evaluations (40 digits, numerical differentiation of the
# analytic amplitudes and of the site-1 populations).
PURE_ORACLE = {
    0.25: 0.1230695270716904032209603,
    0.5: 0.1175390266299357208448118,
    1.0: 8 / 81,
    2.0: 0.05555555555555555555555556,
}
SITE1_ORACLE = {
    0.25: 0.04336244802351461810258989,
    0.5: 0.04347717977537579522783659,
    1.0: 16 / 405,
    2.0: 0.02449594362208921920310875,
}
CLOSED_FULL = {
    0.25: 0.07970707904817578511837039,
    0.5: 0.07406184685455992561697517,
    1.0: 8 / 135,
    2.0: 0.03105961193346633635244681,
}
ENTROPY_ORACLE = {
    0.25: 0.774488693143265966357379,
    0.5: 0.7347014296364922977204741,
    2.0: 0.4866922872354129614199966,
}

GRID = np.linspace(0.0, 3.0, 61)


def test_closed_forms_match_oracle():
    for d, v in CLOSED_FULL.items():
        assert closed_form_full(d) == pytest.approx(v, rel=1e-13)
    for d, v in SITE1_ORACLE.items():
        assert closed_form_site1(d) == pytest.approx(v, rel=1e-13)


def test_closed_form_limits():
    assert closed_form_full(0.0) == pytest.approx(1 / 12, rel=1e-15)
    assert closed_form_site1(0.0) == pytest.approx(1 / 24, rel=1e-15)
    assert abs(closed_form_full(1e-8) - 1 / 12) < 1e-8
    assert abs(closed_form_site1(1e-8) - 1 / 24) < 1e-8
    for d in (100.0, 1e3):
        assert d**4 * closed_form_full(d) == pytest.approx(4.0, rel=5e-3)
        assert d**4 * closed_form_site1(d) == pytest.approx(4.0, rel=5e-3)


def test_closed_form_saturation():
    assert closed_form_full(1e60) == pytest.approx(4e-240)
    assert closed_form_full(math.inf) == 0.0
    assert closed_form_site1(math.inf) == 0.0
    with pytest.raises(DomainError):
        closed_form_full(-1.0)


def test_site1_engine_equals_closed_form():
    site1 = site1_family()
    for d in GRID:
        assert qfi_spectral(site1, d).total == pytest.approx(closed_form_site1(d), rel=1e-6)
    assert qfi_spectral(site1, 1.0).total == pytest.approx(0.0395062, abs=1e-7)
    assert qfi_spectral(site1, 2.0).total == pytest.approx(0.0244959, abs=1e-7)


def test_site1_engine_vs_oracle():
    site1 = site1_family()
    for d, v in SITE1_ORACLE.items():
        assert qfi_spectral(site1, d).total == pytest.approx(v, rel=1e-7)


def test_pure_state_qfi_vs_oracle():
    pure = block_pure_family()
    for d, v in PURE_ORACLE.items():
        assert qfi_pure(pure, d) == pytest.approx(v, rel=1e-7)
    assert qfi_pure(pure, 0.0) == pytest.approx(0.125, abs=1e-6)


def test_full_engine_is_pure_qfi():
    # The spectral engine on the rank-one projector reproduces the pure-state
    # formula, not the published closed form.
    full, pure = block_family(), block_pure_family()
    for d, v in PURE_ORACLE.items():
        assert qfi_spectral(full, d).total == pytest.approx(v, rel=1e-6)
        assert qfi_spectral(full, d).total == pytest.approx(qfi_pure(pure, d), rel=1e-6)


def test_full_closed_form_ratio_identity():
    pure = block_pure_family()
    for d in GRID:
        assert closed_form_full(d) == pytest.approx(qfi_pure(pure, d) * full_state_ratio(d), rel=1e-6)
    assert full_state_ratio(0.0) == pytest.approx(2 / 3)
    assert full_state_ratio(1.0) == pytest.approx(0.6)
    assert closed_form_full(1.0) / qfi_pure(pure, 1.0) == pytest.approx(0.6, rel=1e-7)


def test_split_structure():
    full, site1 = block_family(), site1_family()
    for d in GRID:
        a = qfi_spectral(site1, d)
        b = qfi_spectral(full, d)
        assert abs(a.quantum_part) < 1e-10
        assert a.total == pytest.approx(a.classical_part)
        assert abs(b.classical_part) < 1e-10
        assert b.total == pytest.approx(b.quantum_part)


@pytest.mark.parametrize("which", list(Sector))
@pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 1.5, 2.0])
def test_engine_vs_bures_oracle(which, d):
    for fam in (site1_family(which), block_family(which)):
        assert qfi_spectral(fam, d).total == pytest.approx(qfi_bures_oracle(fam, d), rel=1e-3)


def test_bures_oracle_at_domain_edge():
    site1 = site1_family()
    assert qfi_bures_oracle(site1, 0.0) == pytest.approx(1 / 24, rel=1e-3)
    assert qfi_bures_oracle(block_family(), 0.0) == pytest.approx(0.125, rel=1e-3)


def test_bures_oracle_step_bounds():
    for bad in (1e-7, 0.05):
        with pytest.raises(DomainError):
            qfi_bures_oracle(site1_family(), 1.0, bad)


def test_sector_invariance():
    for d in (0.0, 0.7, 1.0, 2.2):
        for up, down in ((block_family(), block_family("down_sector")),
                         (site1_family(), site1_family("down_sector"))):
            assert abs(qfi_spectral(up, d).total - qfi_spectral(down, d).total) < 1e-10


@pytest.mark.parametrize("d", [0.1, 1.0, 2.0])
def test_sld_properties(d):
    for fam in (site1_family(), block_family()):
        L = sld(fam, d).entries
        rho = fam(d).entries
        assert np.allclose(L, L.conj().T, atol=1e-14)
        assert np.trace(rho @ L @ L).real == pytest.approx(qfi_spectral(fam, d).total, abs=1e-8)
        h = 1e-5 * max(1.0, d)
        drho = (fam(d + h).entries - fam(d - h).entries) / (2 * h)
        assert np.max(np.abs(0.5 * (rho @ L + L @ rho) - drho)) < 1e-8


def test_constant_family_has_zero_qfi():
    rho = DensityMatrix(np.diag([0.5, 0.3, 0.2, 0.0]), 2)
    fam = constant_family(rho)
    assert qfi_spectral(fam, 1.0).total == 0.0
    assert qfi_pure(lambda d: PureState(np.array([0.6, 0.8]), 1), 1.0) == 0.0


def test_degenerate_mixed_family():
    # rho = diag(p, p, 1-2p) with p(Delta) = 0.25 + 0.05 Delta: the degenerate
    # pair is rediagonalized and F = 2 p'^2 / p + (2 p')^2 / (1 - 2 p).
    def rho(d):
        p = 0.25 + 0.05 * d
        return DensityMatrix(np.diag([p, p, 1 - 2 * p, 0.0]), 2)

    fam = ParametricState(rho, "diag", 0.0, 4.0)
    d = 1.0
    p, dp = 0.3, 0.05
    expected = 2 * dp**2 / p + (2 * dp) ** 2 / (1 - 2 * p)
    result = qfi_spectral(fam, d)
    assert result.total == pytest.approx(expected, rel=1e-8)
    assert abs(result.quantum_part) < 1e-12


def test_rotating_qubit_family():
    # Pure qubit rotated by angle theta = Delta: F = 1.
    def psi(d):
        return PureState(np.array([math.cos(d / 2), math.sin(d / 2)]), 1)

    fam = ParametricState(lambda d: density_from_pure(psi(d)))
    assert qfi_pure(psi, 0.4) == pytest.approx(1.0, rel=1e-8)
    assert qfi_spectral(fam, 0.4).total == pytest.approx(1.0, rel=1e-7)


def test_mixed_rotating_qubit():
    # Bloch vector of length r rotating in a plane: F = r^2 (independent of angle).
    r = 0.6

    def rho(d):
        bloch = r * np.array([math.sin(d), math.cos(d)])
        m = 0.5 * np.array([[1 + bloch[1], bloch[0]], [bloch[0], 1 - bloch[1]]])
        return DensityMatrix(m, 1)

    fam = ParametricState(rho)
    res = qfi_spectral(fam, 0.8)
    assert res.total == pytest.approx(r * r, rel=1e-8)
    assert abs(res.classical_part) < 1e-10


def test_domain_enforced():
    fam = ParametricState(site1_family(), "bounded", 0.0, 2.0)
    with pytest.raises(DomainError):
        qfi_spectral(fam, 2.5)
    with pytest.raises(DomainError):
        qfi_spectral(site1_family(), 1.0, h=0.0)


def test_gauge_error_for_vanishing_anchor():
    # The anchor is the cos amplitude, which vanishes at the stencil point 0.5.
    def psi(d):
        t = d * math.pi
        return PureState(np.array([math.cos(t), math.sin(t)]), 1)

    with pytest.raises(GaugeError):
        qfi_pure(psi, 0.25, h=0.25)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.0, max_value=5.0))
def test_qfi_nonnegative_and_finite(d):
    for value in (qfi_spectral(site1_family(), d).total, qfi_spectral(block_family(), d).total,
                  closed_form_full(d), closed_form_site1(d)):
        assert math.isfinite(value) and value >= 0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1e-3, max_value=5.0))
def test_site1_below_full(d):
    # Monotonicity under the partial trace.
    assert qfi_spectral(site1_family(), d).total <= qfi_spectral(block_family(), d).total * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.0, max_value=3.0))
def test_site1_step_independence(d):
    site1 = site1_family()
    a = qfi_spectral(site1, d, h=1e-4).total
    b = qfi_spectral(site1, d, h=1e-5).total
    assert a == pytest.approx(b, rel=1e-5)


def test_entropy_observable():
    for d, v in ENTROPY_ORACLE.items():
        assert evaluate_observable("entropy_site1", d) == pytest.approx(v, abs=1e-12)
    assert evaluate_observable("entropy_site1", 0.0) == pytest.approx(0.811278, abs=1e-6)
    nat = evaluate_observable("entropy_site1", 0.0, log_base="e")
    assert nat == pytest.approx(0.811278124459 * math.log(2), rel=1e-10)


def test_observable_metadata():
    assert Observable("qfi_full_closed").full_state
    assert Observable("qfi_full_engine").full_state
    assert not Observable("qfi_site1_closed").full_state
    assert Observable("qfi_site1_engine").provenance == "spectral engine"
    with pytest.raises(ValueError):
        Observable("bogus")


def test_renormalized_observable_no_jacobian():
    from xxzqfi.rgflow import renormalized_delta

    for obs in Observable:
        for d in (0.3, 1.2):
            expected = evaluate_observable(obs, renormalized_delta(d, 3))
            assert renormalized_observable(obs, d, 3) == expected


def test_renormalized_observable_crossing_and_saturation():
    for obs in ("qfi_full_closed", "qfi_site1_closed", "entropy_site1"):
        base = renormalized_observable(obs, 1.0, 0)
        for n in range(1, 8):
            assert abs(renormalized_observable(obs, 1.0, n) - base) < 1e-10
    assert renormalized_observable("qfi_site1_closed", 2.5, 12) == 0.0
    assert evaluate_observable("entropy_site1", 2 * ASYMPTOTIC_DELTA) == 0.0


def test_renormalized_zero_delta_fixed():
    for n in range(5):
        assert renormalized_observable("qfi_full_closed", 0.0, n) == pytest.approx(1 / 12)


def test_cramer_rao_bound():
    assert cramer_rao_bound(0.25) == pytest.approx(2.0)
    assert cramer_rao_bound(0.25, 100) == pytest.approx(0.2)
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            cramer_rao_bound(bad)
    with pytest.raises(DomainError):
        cramer_rao_bound(1.0, 0)

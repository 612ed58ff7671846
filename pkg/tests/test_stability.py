import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from chiralmag.errors import DomainError, SymmetryMismatch
from chiralmag.field import ModelParams, RealField, quadratic_form
from chiralmag.lattice import hexagonal_lattice, make_lattice, square_lattice
from chiralmag.linear import bifurcation_point, build_mode
from chiralmag.stability import (
    CONSTANT_MODE,
    Verdict,
    admissible_region,
    c_tilde_closed,
    hex_witness_closed,
    hex_witness_quadrature,
    l0_spectrum,
    linearized_form,
    mu_curvature,
    mu_pair,
    phase_row,
    square_competitor,
    stability_verdict,
    threshold_beta,
)
from chiralmag.symmetry import Symmetry


def test_unit_circle_eigenvalues():
    for kappa, beta in ((0.6, 0.0), (1.4, 5.0), (2.0, 9.0)):
        spec = l0_spectrum(ModelParams(kappa, 0.0, 1.0, beta), square_lattice())
        unit = [(mm, mp) for w, mm, mp in spec.modes if abs(w.norm - 1) < 1e-12]
        assert len(unit) == 4
        for mm, mp in unit:
            assert mm == 0.0
            assert mp == pytest.approx(2 * math.sqrt(4 * kappa**2 + beta**2 / 4), rel=1e-15)


def test_factored_form_matches_unfactored():
    for kappa, beta, wsq in ((1.4, 5.0, 2.0), (0.7, 1.0, 3.0), (2.0, 0.0, 5.0), (1.1, 3.0, 0.0)):
        S = math.sqrt(4 * kappa**2 + beta**2 / 4)
        T = math.sqrt(4 * kappa**2 * wsq + beta**2 / 4)
        mm, mp = mu_pair(kappa, beta, wsq)
        assert mm == pytest.approx(wsq - 1 + S - T, abs=1e-13)
        assert mp == pytest.approx(wsq - 1 + S + T, abs=1e-13)


def test_square_second_shell_example():
    kappa, beta = 1.4, 5.0
    S = math.sqrt(4 * kappa**2 + beta**2 / 4)
    T = math.sqrt(8 * kappa**2 + beta**2 / 4)
    mm, _ = mu_pair(kappa, beta, 2.0)
    assert mm == pytest.approx((2 - 1) * (1 - 4 * kappa**2 / (S + T)), abs=1e-15)
    assert mm >= 0


def test_constant_eigenvalues_and_negative_lambda0():
    p = ModelParams(1.4, 0.0, 1.0, 7.0)
    spec = l0_spectrum(p, square_lattice())
    assert spec.constant == (spec.lambda0, spec.lambda0 + 7.0)
    assert spec.lambda0 < 0
    assert spec.min_mu() == spec.lambda0
    rep = stability_verdict(p, square_lattice(), Symmetry.SIGMA2)
    assert rep.worst_mode == CONSTANT_MODE
    assert rep.worst_mu == pytest.approx(spec.lambda0)
    assert not rep.mu_min_nonneg


def test_verdict_examples():
    rep = stability_verdict(ModelParams(1.4, 0.0, 1.0, 5.0), square_lattice(), Symmetry.SIGMA2)
    assert rep.verdict is Verdict.STABLE
    assert rep.lambda0_positive and rep.gap_condition
    assert rep.threshold_beta == pytest.approx(3.233, abs=1e-3)

    rep = stability_verdict(ModelParams(1.4, 0.0, 1.0, 7.0), square_lattice(), Symmetry.SIGMA2)
    assert rep.verdict is Verdict.UNSTABLE
    assert rep.lambda0 == pytest.approx(-0.01781, abs=1e-5)

    for kappa, beta in ((0.8, 0.0), (1.4, 5.0), (2.0, 3.0)):
        rep = stability_verdict(ModelParams(kappa, 0.0, 1.0, beta), hexagonal_lattice(), Symmetry.SIGMA3)
        assert rep.verdict is Verdict.UNSTABLE
        A = bifurcation_point(ModelParams(kappa, 0.0, 1.0, beta)).amplitude_A
        assert rep.hex_witness == pytest.approx(-(2 * A**2 + 3) / (3 * (A**2 + 1)))


def test_square_helix_and_non_equilateral_verdicts():
    sq = square_lattice()
    assert stability_verdict(ModelParams(1.2, 0.0, 1.0, 2.0), sq, Symmetry.SIGMA1).verdict is Verdict.STABLE
    # beta above 4 kappa / sqrt 3 = 2.771
    assert stability_verdict(ModelParams(1.2, 0.0, 1.0, 3.0), sq, Symmetry.SIGMA1).verdict is Verdict.UNSTABLE
    spec = make_lattice(1.1, math.pi / 2)
    assert stability_verdict(ModelParams(1.2, 0.0, 1.0, 3.0), spec, Symmetry.SIGMA1).verdict is Verdict.STABLE
    rep = stability_verdict(ModelParams(1.2, 0.0, 1.0, 2.0), spec, Symmetry.SIGMA1)
    assert rep.verdict is Verdict.UNSTABLE and not rep.gap_condition and rep.worst_mu < 0


def test_out_of_scope_and_mismatch():
    p = ModelParams(1.4, 0.0, 1.0, 5.0)
    assert stability_verdict(p, make_lattice(1.0, 1.2), Symmetry.SIGMA2).verdict is Verdict.OUT_OF_SCOPE
    assert stability_verdict(p, hexagonal_lattice(), Symmetry.SIGMA1).verdict is Verdict.OUT_OF_SCOPE
    assert stability_verdict(p, hexagonal_lattice(), Symmetry.SIGMA2).verdict is Verdict.OUT_OF_SCOPE
    with pytest.raises(SymmetryMismatch):
        stability_verdict(p, square_lattice(), Symmetry.SIGMA3)


def test_curvature_constant_at_beta_zero():
    p = ModelParams(1.0, 0.0)
    mode = build_mode(bifurcation_point(p), square_lattice(), Symmetry.SIGMA2, 21)
    assert mu_curvature(mode, p) == pytest.approx(5.0, abs=1e-12)
    assert mu_curvature(mode, ModelParams(1.0, 0.0, 3.0)) == pytest.approx(5.0, abs=1e-12)


def test_c_tilde_examples():
    assert c_tilde_closed(1.0) == -1.0  # (1 - 3)/(1 + 1)
    assert c_tilde_closed(math.sqrt(3)) == pytest.approx(0.0, abs=1e-15)
    assert oracles.evaluate(oracles.c_tilde(), 2.2) == pytest.approx(c_tilde_closed(2.2), abs=1e-14)


@pytest.mark.parametrize("kappa", [0.6, 1.0, 1.5, 2.0])
def test_c_tilde_quadrature_over_beta(kappa):
    spec = square_lattice()
    for beta in np.linspace(0.0, 8.0, 9):
        p = ModelParams(kappa, 0.0, 1.0, float(beta))
        bp = bifurcation_point(p)
        mode = build_mode(bp, spec, Symmetry.SIGMA2, 21)
        ct = mu_curvature(mode, p, square_competitor(bp, spec, 21))
        assert abs(ct - c_tilde_closed(bp.amplitude_A)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(kappa=st.floats(0.05, 5.0), beta=st.floats(0.0, 50.0), alpha=st.floats(0.1, 5.0))
def test_report_invariants(kappa, beta, alpha):
    p = ModelParams(kappa, 0.0, alpha, beta)
    A = bifurcation_point(p).amplitude_A
    ct = c_tilde_closed(A)
    assert -3 < ct < 1
    thr = threshold_beta(kappa)
    if abs(beta - thr) > 1e-9 * max(1.0, thr):
        assert (ct > 0) == (beta > thr)
    assert hex_witness_closed(A, alpha) < 0


def test_hex_witness_independent_of_s():
    p = ModelParams(1.1, 0.0, 1.0, 2.0)
    spec = hexagonal_lattice()
    a = hex_witness_quadrature(p, spec, 21, s=1.0)
    b = hex_witness_quadrature(p, spec, 21, s=0.01)
    assert a == pytest.approx(b, abs=1e-10)
    with pytest.raises(DomainError):
        hex_witness_quadrature(p, square_lattice(), 21)


def test_linearized_form_at_zero_is_quadratic_form():
    rng = np.random.default_rng(3)
    p = ModelParams(0.9, 0.1, 1.0, 0.5)
    phi = RealField(rng.normal(size=(9, 9, 3)))
    spec = square_lattice()
    assert linearized_form(RealField.zeros(9), p.lam, phi, p, spec) == pytest.approx(quadratic_form(phi, p, spec), rel=1e-12)


def test_linearized_form_is_second_variation():
    from chiralmag.field import energy

    rng = np.random.default_rng(4)
    p = ModelParams(0.9, 0.1, 1.3, 0.5)
    spec = square_lattice()
    m = RealField(0.5 * rng.normal(size=(9, 9, 3)))
    phi = RealField(rng.normal(size=(9, 9, 3)))
    h = 1e-4
    second = (energy(m + h * phi, p, spec) - 2 * energy(m, p, spec) + energy(m - h * phi, p, spec)) / h**2
    assert linearized_form(m, p.lam, phi, p, spec) == pytest.approx(second, rel=1e-5)


def test_admissible_region_examples_and_errors():
    assert admissible_region(1.4, 5.0)
    assert not admissible_region(0.4, 1.0)
    assert not admissible_region(1.4, 7.0)
    with pytest.raises(DomainError):
        admissible_region(-1.0, 1.0)


def test_phase_row():
    row = phase_row(1.4, 5.0)
    assert row["verdict"] == "Stable" and row["admissible"] is True
    assert row["lambda0"] == pytest.approx(0.25366488, abs=1e-8)
    assert set(row) == {"kappa", "beta", "lambda0", "c_tilde", "verdict", "admissible"}


@settings(max_examples=100, deadline=None)
@given(kappa=st.floats(0.3, 3.0), beta=st.floats(0.0, 12.0))
def test_admissible_matches_square_stable_verdict(kappa, beta):
    # inside the admissible region the square vortex lattice is predicted stable
    if admissible_region(kappa, beta):
        rep = stability_verdict(ModelParams(kappa, 0.0, 1.0, beta), square_lattice(), Symmetry.SIGMA2)
        assert rep.verdict is Verdict.STABLE

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralmag.errors import CapacityError, DomainError
from chiralmag.lattice import (
    LatticeTag,
    WaveVector,
    classify,
    critical_wave_vectors,
    dual_vectors_within,
    grid_points,
    hexagonal_lattice,
    make_lattice,
    square_lattice,
    wave_vector_grid,
)


@st.composite
def lattices(draw):
    tau = draw(st.floats(1.0, 3.0))
    if tau == 1.0:
        theta = draw(st.floats(math.pi / 3, math.pi / 2))
    else:
        lo = max(math.pi / 3, math.acos(min(1.0, 0.5 / tau)))
        hi = min(2 * math.pi / 3 - 1e-9, math.acos(max(-1.0, -0.5 / tau)) - 1e-9)
        theta = draw(st.floats(lo + 1e-9, hi))
    return make_lattice(tau, theta)


def test_square_bases():
    spec = square_lattice()
    np.testing.assert_array_equal(spec.basis_matrix, np.eye(2))
    np.testing.assert_array_equal(spec.dual_matrix, np.eye(2))
    assert spec.cell_area == pytest.approx(4 * math.pi**2)


def test_dual_is_inverse_transpose():
    spec = make_lattice(1.7, 1.3)
    np.testing.assert_allclose(spec.dual_matrix, np.linalg.inv(spec.basis_matrix).T, atol=1e-14)
    assert spec.cell_area == pytest.approx(4 * math.pi**2 / spec.im_tau)


def test_tau_components():
    spec = make_lattice(1.5, 1.3)
    assert spec.tau == pytest.approx(1.5 * complex(math.cos(1.3), math.sin(1.3)))
    assert spec.is_equilateral is False
    assert hexagonal_lattice().is_equilateral


@pytest.mark.parametrize(
    "tau, theta",
    [(0.9, math.pi / 2), (1.0, 1.8), (1.0, 1.0), (2.0, 1.2), (1.5, 2.2), (float("nan"), 1.5)],
)
def test_outside_fundamental_domain(tau, theta):
    with pytest.raises(DomainError):
        make_lattice(tau, theta)


def test_snapping_keeps_hexagonal():
    spec = make_lattice(1.0 + 1e-13, math.pi / 3 + 5e-13)
    assert classify(spec).tag is LatticeTag.HEXAGONAL


@pytest.mark.parametrize(
    "spec, tag, holo, gamma",
    [
        (square_lattice(), LatticeTag.SQUARE, "D4", math.sqrt(2)),
        (hexagonal_lattice(), LatticeTag.HEXAGONAL, "D6", math.sqrt(3)),
        (make_lattice(1.0, 1.3), LatticeTag.RHOMBIC, "D2", math.sqrt(2 - 2 * math.cos(1.3))),
        (make_lattice(1.1, math.pi / 2), LatticeTag.NON_EQUILATERAL, "D2", 1.1),
        (make_lattice(1.4, 1.4), LatticeTag.NON_EQUILATERAL, "Z2", 1.4),
        (make_lattice(2.5, math.pi / 2), LatticeTag.NON_EQUILATERAL, "D2", 2.0),
    ],
)
def test_classify(spec, tag, holo, gamma):
    c = classify(spec)
    assert (c.tag, c.holohedry) == (tag, holo)
    assert c.gamma == pytest.approx(gamma, abs=1e-14)


def test_rectangular_by_real_part():
    # Re tau = 1/2 gives a centred rectangular lattice
    tau = 1.3
    spec = make_lattice(tau, math.acos(0.5 / tau))
    assert classify(spec).holohedry == "D2"


@settings(max_examples=60, deadline=None)
@given(lattices())
def test_gamma_is_second_shortest_norm(spec):
    norms = sorted({round(w.norm, 9) for w in dual_vectors_within(spec, 3.0)})
    assert norms[0] == pytest.approx(1.0, abs=1e-9)
    assert classify(spec).gamma == pytest.approx(norms[1], abs=1e-8)


def test_critical_vectors_counts():
    assert [w.k for w in critical_wave_vectors(square_lattice())] == [(1, 0), (0, 1)]
    assert [w.k for w in critical_wave_vectors(hexagonal_lattice())] == [(1, 0), (0, 1), (1, 1)]
    assert [w.k for w in critical_wave_vectors(make_lattice(1.3, 1.4))] == [(0, 1)]
    assert len(critical_wave_vectors(make_lattice(1.0, 1.2))) == 2


def test_critical_vectors_unit_norm_and_hex_angles():
    ws = critical_wave_vectors(hexagonal_lattice())
    for w in ws:
        assert w.norm == pytest.approx(1.0, abs=1e-15)
    v = np.array([w.v for w in ws])
    cosines = sorted(abs(float(a @ b)) for i, a in enumerate(v) for b in v[i + 1:])
    np.testing.assert_allclose(cosines, [0.5, 0.5, 0.5], atol=1e-15)


def test_wave_vector_from_index():
    w = WaveVector.from_index(square_lattice(), (2, -1))
    assert w.v == (2.0, -1.0)
    assert w.norm == pytest.approx(math.sqrt(5))


def test_enumeration_sorted_and_complete():
    spec = make_lattice(1.2, 1.4)
    ws = dual_vectors_within(spec, 3.0)
    norms = [w.norm for w in ws]
    assert norms == sorted(norms, key=lambda x: round(x, 10))
    brute = 0
    for a in range(-10, 11):
        for b in range(-10, 11):
            if (a, b) != (0, 0) and np.hypot(*(spec.dual_matrix @ [a, b])) <= 3.0:
                brute += 1
    assert brute == len(ws)


def test_enumeration_capacity():
    with pytest.raises(CapacityError):
        dual_vectors_within(square_lattice(), 1e4, max_count=1000)
    with pytest.raises(DomainError):
        dual_vectors_within(square_lattice(), 0.0)


def test_wave_vector_grid_layouts():
    spec = make_lattice(1.3, 1.5)
    K1, K2, v1, v2 = wave_vector_grid(spec, 7)
    assert K1.shape == (7, 7)
    assert K1[1, 0] == 1 and K1[6, 0] == -1
    Kh1, Kh2, _, _ = wave_vector_grid(spec, 7, half=True)
    assert Kh1.shape == (7, 4)
    assert Kh2[0].tolist() == [0, 1, 2, 3]
    np.testing.assert_allclose(v1[2, 3], (spec.dual_matrix @ [2, 3])[0])


def test_grid_points_match_plane_wave_phase():
    spec = make_lattice(1.3, 1.2)
    n = 9
    x = grid_points(spec, n)
    v = spec.dual_matrix @ np.array([2, -3])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    np.testing.assert_allclose(x @ v, 2 * np.pi * (2 * i - 3 * j) / n, atol=1e-12)

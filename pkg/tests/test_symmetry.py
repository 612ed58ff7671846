import math

import numpy as np
import pytest

from chiralmag.errors import SymmetryMismatch
from chiralmag.field import ModelParams, RealField
from chiralmag.lattice import hexagonal_lattice, make_lattice, square_lattice
from chiralmag.linear import bifurcation_point, build_mode
from chiralmag.symmetry import Symmetry, act, embed, generators, index_map, rotation

CASES = [
    (Symmetry.SIGMA1, lambda: make_lattice(1.3, 1.4)),
    (Symmetry.SIGMA1, square_lattice),
    (Symmetry.SIGMA2, square_lattice),
    (Symmetry.SIGMA2, hexagonal_lattice),
    (Symmetry.SIGMA2, lambda: make_lattice(1.0, 1.2)),
    (Symmetry.SIGMA3, hexagonal_lattice),
]


def test_parse_aliases():
    assert Symmetry.parse("Sigma2") is Symmetry.SIGMA2
    assert Symmetry.parse("skyrmion") is Symmetry.SIGMA3
    assert Symmetry.parse("SIGMA1") is Symmetry.SIGMA1
    with pytest.raises(ValueError):
        Symmetry.parse("Sigma4")


def test_embedding_carries_determinant():
    reflection = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(embed(reflection)[2], [0, 0, -1])
    assert embed(rotation(math.pi / 3))[2, 2] == 1


@pytest.mark.parametrize("symmetry, spec_factory", CASES)
@pytest.mark.parametrize("beta", [0.0, 3.0])
def test_generators_fix_kernel_mode(symmetry, spec_factory, beta):
    spec = spec_factory()
    n = 15
    bp = bifurcation_point(ModelParams(1.2, 0.0, 1.0, beta))
    phi = build_mode(bp, spec, symmetry, n).field
    gens = generators(symmetry, spec, n)
    assert gens
    for R, shift in gens:
        assert np.abs(act(phi, spec, R, shift).data - phi.data).max() < 1e-12


def test_action_is_a_group_action():
    spec = hexagonal_lattice()
    rng = np.random.default_rng(0)
    f = RealField(rng.normal(size=(9, 9, 3)))
    R = rotation(math.pi / 3)
    g = f
    for _ in range(6):
        g = act(g, spec, R)
    np.testing.assert_allclose(g.data, f.data, atol=1e-13)
    shifted = act(act(f, spec, shift=(2, 0)), spec, shift=(-2, 0))
    np.testing.assert_array_equal(shifted.data, f.data)


def test_index_map_rejects_non_lattice_rotation():
    with pytest.raises(SymmetryMismatch):
        index_map(square_lattice(), rotation(math.pi / 3))
    with pytest.raises(SymmetryMismatch):
        generators(Symmetry.SIGMA3, square_lattice(), 9)
    with pytest.raises(SymmetryMismatch):
        generators(Symmetry.SIGMA2, make_lattice(1.3, 1.4), 9)
    np.testing.assert_array_equal(index_map(square_lattice(), rotation(math.pi / 2)), [[0, 1], [-1, 0]])

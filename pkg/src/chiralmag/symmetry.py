"""Action of lattice symmetries on grid fields.

An element ``(R, t)`` acts by ``(g . m)(x) = R3 m(R^{-1}(x - t))`` with
``R3 = diag(R, det R)``.  It is realized exactly on the grid when ``R`` maps
the lattice to itself (so ``A^{-1} R^{-1} A`` is an integer matrix) and ``t``
is a multiple of ``2 pi A e_i / n``.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .errors import SymmetryMismatch
from .field import RealField
from .lattice import LatticeSpec, LatticeTag, classify


class Symmetry(str, enum.Enum):
    SIGMA1 = "Sigma1_helical"
    SIGMA2 = "Sigma2_vortex"
    SIGMA3 = "Sigma3_skyrmion"

    @classmethod
    def parse(cls, value) -> "Symmetry":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for s in cls:
            if key in (s.value.lower(), s.name.lower(), s.value.split("_")[0].lower(), s.value.split("_")[1].lower()):
                return s
        raise ValueError(f"unknown symmetry {value!r}")


def embed(R: np.ndarray) -> np.ndarray:
    """``O(2) -> SO(3)`` embedding ``R -> diag(R, det R)``."""
    out = np.zeros((3, 3))
    out[:2, :2] = R
    out[2, 2] = round(np.linalg.det(R))
    return out


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def index_map(spec: LatticeSpec, R: np.ndarray) -> np.ndarray:
    """Integer matrix ``P = A^{-1} R^{-1} A``; raises if ``R`` does not preserve the lattice."""
    A = spec.basis_matrix
    P = np.linalg.solve(A, np.linalg.inv(R) @ A)
    Pi = np.rint(P)
    if np.abs(P - Pi).max() > 1e-9:
        raise SymmetryMismatch(f"rotation/reflection {R.tolist()} does not preserve the lattice")
    return Pi.astype(int)


def act(f: RealField, spec: LatticeSpec, R=None, shift=(0, 0)) -> RealField:
    """Apply ``(R, t)`` with ``t = 2 pi A shift / n`` to a grid field."""
    n = f.n
    R = np.eye(2) if R is None else np.asarray(R, dtype=float)
    P = index_map(spec, R)
    i = np.arange(n)
    I, J = np.meshgrid(i, i, indexing="ij")
    a, b = I - shift[0], J - shift[1]
    src_i = (P[0, 0] * a + P[0, 1] * b) % n
    src_j = (P[1, 0] * a + P[1, 1] * b) % n
    return RealField(f.data[src_i, src_j] @ embed(R).T)


def generators(symmetry, spec: LatticeSpec, n: int) -> list[tuple[np.ndarray, tuple[int, int]]]:
    """Grid-realizable generators ``(R, shift)`` of the isotropy subgroup on ``spec``."""
    symmetry = Symmetry.parse(symmetry)
    tag = classify(spec).tag
    half_turn = -np.eye(2)
    if symmetry is Symmetry.SIGMA1:
        # Z2 = {I, R} with R the half turn, and translations along x1
        return [(half_turn, (0, 0)), (np.eye(2), (1, 0))]
    if symmetry is Symmetry.SIGMA2:
        if tag is LatticeTag.NON_EQUILATERAL:
            raise SymmetryMismatch("Sigma2 requires an equilateral lattice")
        c, s = math.cos(spec.theta), math.sin(spec.theta)
        r_plus = np.array([[c, s], [s, -c]])
        return [(half_turn, (0, 0)), (r_plus, (0, 0)), (-r_plus, (0, 0))]
    if tag is not LatticeTag.HEXAGONAL:
        raise SymmetryMismatch("Sigma3 requires the hexagonal lattice")
    return [(rotation(math.pi / 3), (0, 0))]

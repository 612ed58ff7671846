"""Planar lattices in the fundamental-domain parametrization.

A lattice is fixed by its shape parameter ``tau = |tau| exp(i theta)`` and is
scaled so that ``Lambda = (2 pi / Im tau) (Z + tau Z) = 2 pi A Z^2``.  With this
scaling the shortest nonzero dual vectors have unit length, which is the
critical wave number of the bifurcation analysis.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

EPS_GEOM = 1e-12
# tolerance for deciding |v| == 1 on enumerated dual vectors
EPS_NORM = 1e-9
MAX_ENUMERATION = 4_000_000


class LatticeTag(str, enum.Enum):
    NON_EQUILATERAL = "NonEquilateral"
    RHOMBIC = "Rhombic"
    SQUARE = "Square"
    HEXAGONAL = "Hexagonal"


@dataclass(frozen=True)
class LatticeSpec:
    """Reduced lattice shape with its primitive and dual bases.

    Equality and hashing use ``(tau_abs, theta)`` only, so specs can key caches.
    """

    tau_abs: float
    theta: float
    basis_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    dual_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    cell_area: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t, th = self.tau_abs, self.theta
        s, c = math.sin(th), math.cos(th)
        # exact trig values on the symmetric shapes keep the dual basis exact
        if th == math.pi / 2:
            s, c = 1.0, 0.0
        elif th == math.pi / 3:
            s, c = math.sqrt(3.0) / 2.0, 0.5
        im = t * s
        basis = np.array([[1.0, t * c], [0.0, t * s]]) / im
        dual = np.array([[t * s, 0.0], [-t * c, 1.0]])
        basis.setflags(write=False)
        dual.setflags(write=False)
        object.__setattr__(self, "basis_matrix", basis)
        object.__setattr__(self, "dual_matrix", dual)
        object.__setattr__(self, "cell_area", abs(float(np.linalg.det(2 * np.pi * basis))))

    @property
    def tau(self) -> complex:
        return complex(self.re_tau, self.im_tau)

    @property
    def im_tau(self) -> float:
        return float(self.dual_matrix[0, 0])

    @property
    def re_tau(self) -> float:
        return float(-self.dual_matrix[1, 0])

    @property
    def is_equilateral(self) -> bool:
        return self.tau_abs == 1.0


@dataclass(frozen=True)
class LatticeClass:
    tag: LatticeTag
    holohedry: str
    gamma: float


@dataclass(frozen=True)
class WaveVector:
    """Dual lattice vector ``v = A^{-T} k`` for an integer index pair ``k``."""

    k: tuple[int, int]
    v: tuple[float, float]
    norm: float

    @classmethod
    def from_index(cls, spec: LatticeSpec, k) -> "WaveVector":
        k = (int(k[0]), int(k[1]))
        v = spec.dual_matrix @ np.array(k, dtype=float)
        return cls(k, (float(v[0]), float(v[1])), float(math.hypot(v[0], v[1])))


def _snap(x: float, target: float) -> float:
    return target if abs(x - target) <= EPS_GEOM else x


def make_lattice(tau_abs: float, theta: float) -> LatticeSpec:
    """Validate ``(|tau|, theta)`` against the fundamental domain and build the spec.

    Values within ``EPS_GEOM`` of ``|tau| = 1``, ``theta = pi/3`` or
    ``theta = pi/2`` are snapped so the symmetric shapes are recognized exactly.
    """
    tau_abs = _snap(float(tau_abs), 1.0)
    theta = _snap(_snap(float(theta), math.pi / 3), math.pi / 2)
    if not (math.isfinite(tau_abs) and math.isfinite(theta)):
        raise DomainError("lattice shape must be finite")
    if tau_abs < 1.0:
        raise DomainError(f"|tau| = {tau_abs} < 1 is not a reduced lattice shape")
    if tau_abs == 1.0:
        ok = math.pi / 3 <= theta <= math.pi / 2
    else:
        ok = math.pi / 3 <= theta < 2 * math.pi / 3
        re = tau_abs * math.cos(theta)
        ok = ok and -0.5 + EPS_GEOM < re <= 0.5 + EPS_GEOM
    if not ok:
        raise DomainError(
            f"(|tau|, theta) = ({tau_abs}, {theta}) lies outside the fundamental domain"
        )
    return LatticeSpec(tau_abs, theta)


def square_lattice() -> LatticeSpec:
    return make_lattice(1.0, math.pi / 2)


def hexagonal_lattice() -> LatticeSpec:
    return make_lattice(1.0, math.pi / 3)


def classify(spec: LatticeSpec) -> LatticeClass:
    if spec.tau_abs == 1.0:
        if spec.theta == math.pi / 2:
            return LatticeClass(LatticeTag.SQUARE, "D4", math.sqrt(2.0))
        if spec.theta == math.pi / 3:
            return LatticeClass(LatticeTag.HEXAGONAL, "D6", math.sqrt(3.0))
        return LatticeClass(
            LatticeTag.RHOMBIC, "D2", math.sqrt(2.0 - 2.0 * math.cos(spec.theta))
        )
    rectangular = abs(math.cos(spec.theta)) <= EPS_GEOM or abs(abs(spec.re_tau) - 0.5) <= EPS_GEOM
    # second critical wave number: |v(1,0)| = |tau| competes with |2 v(0,1)| = 2
    return LatticeClass(LatticeTag.NON_EQUILATERAL, "D2" if rectangular else "Z2", min(spec.tau_abs, 2.0))


def dual_vectors_within(
    spec: LatticeSpec, radius: float, max_count: int = MAX_ENUMERATION
) -> list[WaveVector]:
    """All nonzero dual vectors with ``|v| <= radius``, sorted by norm then ``k``.

    Completeness: ``|v| >= sigma_min |k|_2 >= sigma_min |k|_inf``, so every
    hit satisfies ``|k|_inf <= radius / sigma_min``.
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    sigma_min = np.linalg.svd(spec.dual_matrix, compute_uv=False).min()
    bound = int(math.ceil(radius / sigma_min))
    if (2 * bound + 1) ** 2 > max_count:
        raise CapacityError(
            f"enumeration box of {(2 * bound + 1) ** 2} points exceeds limit {max_count}"
        )
    r = np.arange(-bound, bound + 1)
    k1, k2 = (a.ravel() for a in np.meshgrid(r, r, indexing="ij"))
    v = spec.dual_matrix @ np.vstack([k1, k2]).astype(float)
    norm = np.hypot(v[0], v[1])
    keep = (norm <= radius * (1 + 1e-14)) & ((k1 != 0) | (k2 != 0))
    rows = [
        WaveVector((int(a), int(b)), (float(x), float(y)), float(n))
        for a, b, x, y, n in zip(k1[keep], k2[keep], v[0][keep], v[1][keep], norm[keep])
    ]
    rows.sort(key=lambda w: (round(w.norm, 10), w.k))
    return rows


def _lex_positive(k) -> bool:
    return k[0] > 0 or (k[0] == 0 and k[1] > 0)


def critical_wave_vectors(spec: LatticeSpec) -> list[WaveVector]:
    """Unit-norm dual vectors, one per +/- pair, ordered k=(1,0), (0,1), (1,1)."""
    hits = [
        w
        for w in dual_vectors_within(spec, 1.0 + 1e-6)
        if abs(w.norm - 1.0) <= EPS_NORM and _lex_positive(w.k)
    ]
    hits.sort(key=lambda w: (abs(w.k[0]) + abs(w.k[1]), -w.k[0], w.k[1]))
    return hits


def wave_vector_grid(spec: LatticeSpec, n: int, half: bool = False):
    """Integer indices and dual vectors for every DFT mode of an ``n x n`` grid.

    Returns ``(k1, k2, v1, v2)`` arrays in numpy FFT order (full or rfft layout).
    """
    k1 = np.rint(np.fft.fftfreq(n) * n).astype(int)
    k2 = np.rint(np.fft.rfftfreq(n) * n).astype(int) if half else k1
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    D = spec.dual_matrix
    v1 = D[0, 0] * K1 + D[0, 1] * K2
    v2 = D[1, 0] * K1 + D[1, 1] * K2
    return K1, K2, v1, v2


def grid_points(spec: LatticeSpec, n: int) -> np.ndarray:
    """Collocation points ``x_ij = 2 pi A (i/n, j/n)`` as an ``(n, n, 2)`` array."""
    i = np.arange(n) / n
    I, J = np.meshgrid(i, i, indexing="ij")
    A = 2 * np.pi * spec.basis_matrix
    return np.stack([A[0, 0] * I + A[0, 1] * J, A[1, 0] * I + A[1, 1] * J], axis=-1)

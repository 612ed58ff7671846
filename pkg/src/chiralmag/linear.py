"""Closed-form linear analysis at m = 0.

The linearization is block diagonal in Fourier space; on the critical circle
``|v| = 1`` its kernel is spanned by the helical modes ``phi_{1,v}`` and
``phi_{2,v}``.  The three axial isotropy subgroups pick the combinations
``phi_1^(1)`` (helix), ``phi_1^(2)`` (vortex-antivortex) and ``phi_1^(3)``
(skyrmion).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import SymmetryMismatch
from .field import ModelParams, RealField, _check_n
from .lattice import (
    LatticeSpec,
    LatticeTag,
    WaveVector,
    classify,
    critical_wave_vectors,
    dual_vectors_within,
)
from .symmetry import Symmetry

RESONANCE_TOL = 1e-9
NEAR_RESONANCE_BAND = 1e-4
KERNEL_DIM = {
    LatticeTag.NON_EQUILATERAL: 2,
    LatticeTag.RHOMBIC: 4,
    LatticeTag.SQUARE: 4,
    LatticeTag.HEXAGONAL: 6,
}


class NearResonanceWarning(UserWarning):
    pass


class RootSign(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is RootSign.PLUS else -1


@dataclass(frozen=True)
class BifurcationPoint:
    lambda0: float
    root_sign: RootSign
    amplitude_A: float
    kappa: float
    beta: float
    kernel_dim: int | None = None
    resonant: bool | None = None

    @property
    def physical(self) -> bool:
        """Only the larger root is used for stability work."""
        return self.root_sign is RootSign.PLUS


def branch_lambda(kappa: float, beta: float, wave_sq: float, sign: int) -> float:
    """``-|v|^2 - beta/2 +/- sqrt(4 kappa^2 |v|^2 + beta^2/4)``."""
    return -wave_sq - beta / 2 + sign * math.sqrt(4 * kappa**2 * wave_sq + beta**2 / 4)


def bifurcation_point(p: ModelParams, root_sign=RootSign.PLUS) -> BifurcationPoint:
    root_sign = RootSign(root_sign)
    root = math.sqrt(4 * p.kappa**2 + p.beta**2 / 4)
    denom = -p.beta / 2 + root_sign.sign * root
    return BifurcationPoint(
        lambda0=-1 - p.beta / 2 + root_sign.sign * root,
        root_sign=root_sign,
        amplitude_A=2 * p.kappa / denom,
        kappa=p.kappa,
        beta=p.beta,
    )


def constant_mode_degeneracies(bp: BifurcationPoint) -> list[str]:
    """Constant kernel directions at ``lambda0``: in-plane if 0, out-of-plane if ``-beta``."""
    out = []
    if abs(bp.lambda0) <= RESONANCE_TOL:
        out.append("in-plane constant mode (lambda0 = 0)")
    if abs(bp.lambda0 + bp.beta) <= RESONANCE_TOL:
        out.append("out-of-plane constant mode (lambda0 = -beta)")
    return out


def resonance_radius(bp: BifurcationPoint) -> float:
    # sqrt(4k^2 r^2 + b^2/4) <= 2 k r + b/2, so both branches are <= -r^2 + 2 k r,
    # which drops below lambda0 - 1 once r > k + sqrt(k^2 + |lambda0| + 1).
    # The radius below dominates that bound.
    k = bp.kappa
    return 2 * k + math.sqrt(4 * k**2 + abs(bp.lambda0) + bp.beta + 2)


def resonant_vectors(bp: BifurcationPoint, spec: LatticeSpec, tol: float = RESONANCE_TOL):
    """Off-circle dual vectors whose branch value lies within ``tol`` of ``lambda0``."""
    hits = []
    for w in dual_vectors_within(spec, resonance_radius(bp)):
        wsq = w.norm**2
        if abs(wsq - 1.0) <= 1e-9:
            continue
        for sign in (1, -1):
            gap = abs(bp.lambda0 - branch_lambda(bp.kappa, bp.beta, wsq, sign))
            if gap <= tol:
                hits.append((w, sign, gap))
    return hits


def check_resonance(bp: BifurcationPoint, p: ModelParams, spec: LatticeSpec) -> bool:
    """True if ``lambda0`` coincides with a branch value of a non-unit dual vector.

    Constant modes are not part of this test (see
    :func:`constant_mode_degeneracies`).  Parameters within
    ``NEAR_RESONANCE_BAND`` of a resonance trigger a :class:`NearResonanceWarning`.
    """
    if bp.kappa != p.kappa or bp.beta != p.beta:
        raise ValueError("bifurcation point was computed for different parameters")
    near = resonant_vectors(bp, spec, NEAR_RESONANCE_BAND)
    resonant = any(gap <= RESONANCE_TOL for _, _, gap in near)
    if near and not resonant:
        w, _, gap = min(near, key=lambda h: h[2])
        warnings.warn(
            f"lambda0 is within {gap:.2e} of the branch value at k={w.k}",
            NearResonanceWarning,
            stacklevel=2,
        )
    return resonant


def _phase(k, n: int) -> np.ndarray:
    i = np.arange(n)
    I, J = np.meshgrid(i, i, indexing="ij")
    return 2 * np.pi * ((k[0] * I + k[1] * J) % n) / n


def helical_mode(bp: BifurcationPoint, w: WaveVector, n: int, kind: int = 1, raw: bool = False) -> np.ndarray:
    """Sample ``phi_{1,v}`` (``kind=1``) or ``phi_{2,v}`` (``kind=2``) on the grid.

    ``phi_{1,v} = (A v2/|v| sin, -A v1/|v| sin, cos)(v.x) / sqrt(1+A^2)``.  With
    ``raw=True`` the ``1/sqrt(1+A^2)`` factor is dropped, i.e. the kernel mode
    with unit out-of-plane coefficient.
    """
    A = bp.amplitude_A
    ph = _phase(w.k, n)
    u1, u2 = w.v[0] / w.norm, w.v[1] / w.norm
    if kind == 1:
        s, c = np.sin(ph), np.cos(ph)
    elif kind == 2:
        s, c = np.cos(ph), -np.sin(ph)
    else:
        raise ValueError("kind must be 1 or 2")
    out = np.stack([A * u2 * s, -A * u1 * s, c], axis=-1)
    return out if raw else out / math.sqrt(1 + A**2)


@dataclass(frozen=True, eq=False)
class KernelMode:
    symmetry: Symmetry
    wave_vectors: list
    field: RealField
    point: BifurcationPoint
    spec: LatticeSpec


def _require(symmetry: Symmetry, tag: LatticeTag):
    if symmetry is Symmetry.SIGMA2 and tag is LatticeTag.NON_EQUILATERAL:
        raise SymmetryMismatch("Sigma2 (vortex-antivortex) requires an equilateral lattice")
    if symmetry is Symmetry.SIGMA3 and tag is not LatticeTag.HEXAGONAL:
        raise SymmetryMismatch("Sigma3 (skyrmion) requires the hexagonal lattice")


def default_symmetry(spec: LatticeSpec) -> Symmetry:
    tag = classify(spec).tag
    if tag is LatticeTag.HEXAGONAL:
        return Symmetry.SIGMA3
    if tag is LatticeTag.NON_EQUILATERAL:
        return Symmetry.SIGMA1
    return Symmetry.SIGMA2


def available_symmetries(spec: LatticeSpec) -> list[Symmetry]:
    tag = classify(spec).tag
    out = [Symmetry.SIGMA1]
    if tag is not LatticeTag.NON_EQUILATERAL:
        out.append(Symmetry.SIGMA2)
    if tag is LatticeTag.HEXAGONAL:
        out.append(Symmetry.SIGMA3)
    return out


def build_mode(bp: BifurcationPoint, spec: LatticeSpec, symmetry, n: int) -> KernelMode:
    """The L2-normalized ``Sigma``-fixed kernel field ``phi_1`` sampled on an ``n x n`` grid."""
    symmetry = Symmetry.parse(symmetry)
    n = _check_n(n)
    cls = classify(spec)
    _require(symmetry, cls.tag)
    crit = {w.k: w for w in critical_wave_vectors(spec)}
    if symmetry is Symmetry.SIGMA1:
        ws = [crit[(0, 1)]]
        data = math.sqrt(2) * helical_mode(bp, ws[0], n)
    elif symmetry is Symmetry.SIGMA2:
        ws = [crit[(1, 0)], crit[(0, 1)]]
        data = helical_mode(bp, ws[0], n) - helical_mode(bp, ws[1], n)
    else:
        ws = [crit[(1, 0)], crit[(0, 1)], crit[(1, 1)]]
        data = math.sqrt(2 / 3) * sum(helical_mode(bp, w, n) for w in ws)
    bp = replace(bp, kernel_dim=KERNEL_DIM[cls.tag])
    return KernelMode(symmetry, ws, RealField(data), bp, spec)

"""Bifurcation branch to the orders that are known in closed form.

``m_s = s phi_1 + O(s^3)`` and ``lambda_s = lambda0 + s^2 nu2 + O(s^4)``; the
odd coefficients ``nu1, nu3`` and the even correctors ``phi2, phi4`` vanish,
so the truncation below is the complete explicit part of the branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .field import ModelParams, RealField, el_residual, norm
from .lattice import LatticeSpec
from .linear import BifurcationPoint, KernelMode, build_mode

BRANCH_RADIUS = 0.5


def cell_mean(values: np.ndarray) -> float:
    return float(np.mean(values))


def compute_nu2(mode: KernelMode, p: ModelParams) -> float:
    """``nu2 = -alpha <|phi_1|^4> / <|phi_1|^2>^2`` by grid quadrature."""
    m2 = np.sum(mode.field.data**2, axis=-1)
    return -p.alpha * cell_mean(m2 * m2) / cell_mean(m2) ** 2


@dataclass(frozen=True, eq=False)
class BranchData:
    point: BifurcationPoint
    mode: KernelMode
    nu2: float
    s: float
    lambda_s: float
    m_s: RealField
    energy_quartic: float

    def params(self, p: ModelParams) -> ModelParams:
        return p.with_lambda(self.lambda_s)


def branch_state(
    bp: BifurcationPoint,
    mode: KernelMode,
    nu2: float,
    s: float,
    n: int | None = None,
    radius: float = BRANCH_RADIUS,
) -> BranchData:
    if abs(s) > radius:
        raise DomainError(f"|s| = {abs(s)} exceeds the branch validity radius {radius}")
    if n is not None and n != mode.field.n:
        mode = build_mode(bp, mode.spec, mode.symmetry, n)
    return BranchData(
        point=bp,
        mode=mode,
        nu2=nu2,
        s=s,
        lambda_s=bp.lambda0 + s * s * nu2,
        m_s=s * mode.field,
        energy_quartic=s**4 / 4 * nu2,
    )


def residual_scaling(
    bp: BifurcationPoint,
    mode: KernelMode,
    nu2: float,
    spec: LatticeSpec,
    n: int,
    s_list,
    p: ModelParams,
) -> list[tuple[float, float]]:
    """Discrete L2 norm of ``F(s phi_1, lambda0 + s^2 nu2)`` for each ``s``."""
    if n != mode.field.n or spec != mode.spec:
        mode = build_mode(bp, spec, mode.symmetry, n)
    out = []
    for s in s_list:
        st = branch_state(bp, mode, nu2, s)
        out.append((float(s), norm(el_residual(st.m_s, p.with_lambda(st.lambda_s), spec))))
    return out


def loglog_slope(pairs) -> float:
    """Least-squares slope of ``log residual`` against ``log s`` (zeros skipped)."""
    pts = [(math.log(s), math.log(r)) for s, r in pairs if s > 0 and r > 0]
    if len(pts) < 2:
        raise ValueError("need at least two positive samples")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])

"""Spectral stability of the bifurcating lattice states.

Everything here is evaluated at the larger root ``lambda0+``.  The verdicts
combine the spectrum of ``L_0`` (constant modes and ``mu_{0,w}+-``) with the
sign of the second-order perturbation coefficients of the critical
eigenvalue.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .branch import compute_nu2
from .errors import DomainError
from .field import ModelParams, RealField, apply_linear, inner, to_real, to_spectral
from .lattice import LatticeSpec, LatticeTag, WaveVector, classify, critical_wave_vectors, dual_vectors_within
from .linear import (
    BifurcationPoint,
    KernelMode,
    RootSign,
    _require,
    bifurcation_point,
    build_mode,
    helical_mode,
)
from .symmetry import Symmetry

SPECTRUM_RADIUS = 4.0
CONSTANT_MODE = "constant"


class Verdict(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    OUT_OF_SCOPE = "OutOfScope"


def threshold_beta(kappa: float) -> float:
    return 4 * kappa / math.sqrt(3)


def c_tilde_closed(A: float) -> float:
    return (A**2 - 3) / (A**2 + 1)


def hex_witness_closed(A: float, alpha: float) -> float:
    return -alpha * (2 * A**2 + 3) / (3 * (A**2 + 1))


def gap_condition(kappa: float, beta: float, gamma: float) -> bool:
    """``4 kappa^2 <= sqrt(4 kappa^2 + beta^2/4) + sqrt(4 kappa^2 gamma^2 + beta^2/4)``."""
    b = beta**2 / 4
    return 4 * kappa**2 <= math.sqrt(4 * kappa**2 + b) + math.sqrt(4 * kappa**2 * gamma**2 + b)


def mu_pair(kappa: float, beta: float, wave_sq: float) -> tuple[float, float]:
    """Eigenvalues ``mu_{0,w}-`` and ``mu_{0,w}+`` of ``L_0`` for ``|w|^2 = wave_sq``.

    ``mu-`` uses the factored form ``(|w|^2-1)(1 - 4 kappa^2/(S + T))`` so it is
    exactly zero on the critical circle.
    """
    if abs(wave_sq - 1.0) <= 1e-12:
        wave_sq = 1.0
    S = math.sqrt(4 * kappa**2 + beta**2 / 4)
    T = math.sqrt(4 * kappa**2 * wave_sq + beta**2 / 4)
    mu_minus = (wave_sq - 1) * (1 - 4 * kappa**2 / (S + T))
    mu_plus = wave_sq - 1 + S + T
    return mu_minus, mu_plus


@dataclass(frozen=True)
class L0Spectrum:
    modes: list  # (WaveVector, mu_minus, mu_plus)
    constant: tuple[float, float]  # (lambda0, lambda0 + beta)
    lambda0: float

    def min_mu(self) -> float:
        vals = [m for _, m, _ in self.modes] + list(self.constant)
        return min(vals)


def l0_spectrum(p: ModelParams, spec: LatticeSpec, radius: float = SPECTRUM_RADIUS) -> L0Spectrum:
    bp = bifurcation_point(p, RootSign.PLUS)
    modes = []
    for w in dual_vectors_within(spec, radius):
        mm, mp = mu_pair(p.kappa, p.beta, w.norm**2)
        modes.append((w, mm, mp))
    return L0Spectrum(modes, (bp.lambda0, bp.lambda0 + p.beta), bp.lambda0)


@dataclass(frozen=True)
class StabilityReport:
    lambda0: float
    lambda0_positive: bool
    gap_condition: bool
    mu_min_nonneg: bool
    threshold_beta: float
    c_tilde: float
    hex_witness: float
    verdict: Verdict
    worst_mode: object  # WaveVector or CONSTANT_MODE
    worst_mu: float


def stability_verdict(p: ModelParams, spec: LatticeSpec, symmetry) -> StabilityReport:
    symmetry = Symmetry.parse(symmetry)
    cls = classify(spec)
    _require(symmetry, cls.tag)
    bp = bifurcation_point(p, RootSign.PLUS)
    A = bp.amplitude_A
    spectrum = l0_spectrum(p, spec)
    worst_w, worst_mu = min(((w, m) for w, m, _ in spectrum.modes), key=lambda t: t[1])
    if min(spectrum.constant) < worst_mu:
        worst_w, worst_mu = CONSTANT_MODE, min(spectrum.constant)
    pos = bp.lambda0 > 0
    gap = gap_condition(p.kappa, p.beta, cls.gamma)
    thr = threshold_beta(p.kappa)

    if not pos:
        verdict = Verdict.UNSTABLE
    elif cls.tag is LatticeTag.SQUARE and symmetry is Symmetry.SIGMA2:
        verdict = Verdict.STABLE if gap and p.beta > thr else Verdict.UNSTABLE
    elif cls.tag is LatticeTag.SQUARE and symmetry is Symmetry.SIGMA1:
        verdict = Verdict.STABLE if gap and p.beta < thr else Verdict.UNSTABLE
    elif cls.tag is LatticeTag.HEXAGONAL and symmetry is Symmetry.SIGMA3:
        verdict = Verdict.UNSTABLE
    elif cls.tag is LatticeTag.NON_EQUILATERAL and symmetry is Symmetry.SIGMA1:
        verdict = Verdict.STABLE if gap else Verdict.UNSTABLE
    else:
        verdict = Verdict.OUT_OF_SCOPE
    return StabilityReport(
        lambda0=bp.lambda0,
        lambda0_positive=pos,
        gap_condition=gap,
        mu_min_nonneg=spectrum.min_mu() >= -1e-12,
        threshold_beta=thr,
        c_tilde=c_tilde_closed(A),
        hex_witness=hex_witness_closed(A, p.alpha),
        verdict=verdict,
        worst_mode=worst_w,
        worst_mu=worst_mu,
    )


def admissible_region(kappa: float, beta: float) -> bool:
    """Existence and stability region of the square vortex-antivortex lattice."""
    if kappa <= 0 or beta < 0:
        raise DomainError("need kappa > 0 and beta >= 0")
    disc = 16 * kappa**4 - 24 * kappa**2 + 1
    middle = disc < 0 or beta >= math.sqrt(disc)
    return beta > threshold_beta(kappa) and middle and beta < 4 * kappa**2 - 1


def square_competitor(bp: BifurcationPoint, spec: LatticeSpec, n: int) -> RealField:
    """``phi~ = phi_{1,v(2)} + phi_{1,v(3)}``, the kernel field competing with the vortex mode."""
    if classify(spec).tag is LatticeTag.NON_EQUILATERAL:
        raise DomainError("the competing mode exists on equilateral lattices only")
    crit = {w.k: w for w in critical_wave_vectors(spec)}
    return RealField(helical_mode(bp, crit[(1, 0)], n) + helical_mode(bp, crit[(0, 1)], n))


def mu_curvature(mode: KernelMode, p: ModelParams, competitor: RealField | None = None) -> float:
    """Second-order coefficient of a critical eigenvalue of ``L_s``.

    Without ``competitor`` this is ``C = 4 <|phi_1|^4>`` for the eigenvalue
    following ``phi_1`` itself.  With ``competitor = phi~`` it returns
    ``C~ = 4<(phi~.phi_1)^2> + 2<|phi~|^2 |phi_1|^2> + 2 (nu2/alpha) <|phi~|^2>``.
    """
    phi = mode.field.data
    p2 = np.sum(phi * phi, axis=-1)
    if competitor is None:
        return 4 * float(np.mean(p2 * p2))
    q = competitor.data
    q2 = np.sum(q * q, axis=-1)
    dot = np.sum(q * phi, axis=-1)
    nu2 = compute_nu2(mode, p)
    return float(
        4 * np.mean(dot * dot) + 2 * np.mean(q2 * p2) + 2 * nu2 / p.alpha * np.mean(q2)
    )


def linearized_form(
    m: RealField, lam: float, phi: RealField, p: ModelParams, spec: LatticeSpec
) -> float:
    """``<L phi, phi>_N`` for the linearization ``L`` of ``F`` at ``(m, lam)``."""
    q = p.with_lambda(lam)
    lin = to_real(apply_linear(to_spectral(phi), q, spec)).data
    md, fd = m.data, phi.data
    m2 = np.sum(md * md, axis=-1)[..., None]
    dot = np.sum(md * fd, axis=-1)[..., None]
    return inner(RealField(lin + p.alpha * (m2 * fd + 2 * dot * md)), phi)


def hex_witness_quadrature(p: ModelParams, spec: LatticeSpec, n: int, s: float = 1.0) -> float:
    """Leading coefficient of ``<L_s phi, phi>`` in ``s^2`` for ``phi = phi_{1,v(4)} - phi_{1,v(5)}``.

    The witness uses the kernel modes with unit out-of-plane Fourier
    coefficient.  Since the truncated branch is exactly quadratic in ``s``,
    any nonzero ``s`` gives the same ratio up to round-off.
    """
    if classify(spec).tag is not LatticeTag.HEXAGONAL:
        raise DomainError("the skyrmion witness needs the hexagonal lattice")
    bp = bifurcation_point(p, RootSign.PLUS)
    mode = build_mode(bp, spec, Symmetry.SIGMA3, n)
    nu2 = compute_nu2(mode, p)
    crit = {w.k: w for w in critical_wave_vectors(spec)}
    phi = RealField(
        helical_mode(bp, crit[(1, 0)], n, raw=True) - helical_mode(bp, crit[(0, 1)], n, raw=True)
    )
    return linearized_form(s * mode.field, bp.lambda0 + s * s * nu2, phi, p, spec) / (s * s)


def phase_row(kappa: float, beta: float, alpha: float = 1.0) -> dict:
    """One row of the (kappa, beta) phase diagram on the square lattice."""
    from .lattice import square_lattice

    p = ModelParams(kappa, 0.0, alpha, beta)
    rep = stability_verdict(p, square_lattice(), Symmetry.SIGMA2)
    return {
        "kappa": kappa,
        "beta": beta,
        "lambda0": rep.lambda0,
        "c_tilde": rep.c_tilde,
        "verdict": rep.verdict.value,
        "admissible": admissible_region(kappa, beta),
    }

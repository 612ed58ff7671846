"""Magnetization fields on the collocation grid and the operators acting on them.

Grid values live at ``x_ij = 2 pi A (i/N, j/N)``.  Because ``v . x_ij =
2 pi (k1 i + k2 j) / N`` for ``v = A^{-T} k``, the Fourier coefficients on the
lattice are exactly the plain 2D DFT divided by ``N^2``; all metric
information sits in the dual vectors ``v(k)``.

Nonlinear terms are evaluated pointwise on the grid (collocation) without
de-aliasing.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, IncompatibleLattice, SizeError, ZeroAmplitude
from .lattice import LatticeSpec, wave_vector_grid


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("CHIRALMAG_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless coefficients of the energy density."""

    kappa: float
    lam: float
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "lam", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.kappa <= 0:
            raise DomainError("kappa must be positive")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.beta < 0:
            raise DomainError("beta must be non-negative")

    def with_lambda(self, lam: float) -> "ModelParams":
        return ModelParams(self.kappa, lam, self.alpha, self.beta)


@dataclass(frozen=True)
class PhysicalParams:
    exchange: float
    dmi: float
    landau_a: float
    landau_b: float
    anisotropy: float = 0.0
    temperature_offset: float = 0.0
    length_scale: float = 1.0


def nondimensionalize(phys: PhysicalParams) -> ModelParams:
    """Map physical material constants to ``(kappa, lambda, alpha, beta)``.

    A negative DMI constant is mapped to ``|kappa|``; the corresponding
    solutions follow from the reflection ``m3 -> -m3``.
    """
    A, r = phys.exchange, phys.length_scale
    if not (A > 0 and r > 0):
        raise DomainError("exchange constant and length scale must be positive")
    if not (phys.landau_a > 0 and phys.landau_b > 0):
        raise DomainError("Landau coefficients a, b must be positive")
    if phys.anisotropy < 0:
        raise DomainError("anisotropy must be non-negative")
    return ModelParams(
        kappa=abs(phys.dmi) * r / (2 * A),
        lam=phys.landau_a * phys.temperature_offset * r**2 / A,
        alpha=2 * phys.landau_b * r**2 / A,
        beta=phys.anisotropy * r**2 / A,
    )


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1 or n % 2 == 0:
        raise SizeError(f"grid size must be odd, got {n}")
    return n


@dataclass(frozen=True, eq=False)
class RealField:
    """Samples ``m(x_ij)`` stored as an ``(n, n, 3)`` float array."""

    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=float)
        if a.ndim != 3 or a.shape[0] != a.shape[1] or a.shape[2] != 3:
            raise SizeError(f"expected (n, n, 3) samples, got {a.shape}")
        _check_n(a.shape[0])
        if not np.all(np.isfinite(a)):
            raise DomainError("field contains non-finite values")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "RealField":
        return cls(np.zeros((_check_n(n), n, 3)))

    def __add__(self, other):
        return RealField(self.data + other.data)

    def __sub__(self, other):
        return RealField(self.data - other.data)

    def __mul__(self, s):
        return RealField(self.data * s)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.abs(self.data).max()) if self.data.size else 0.0


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients ``m~(k)`` as an ``(n, n, 3)`` complex array in FFT order.

    Index ``[a, b]`` holds ``k = (a, b)`` reduced to ``{-(n-1)/2, ..., (n-1)/2}``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[2] != 3:
            raise SizeError(f"expected (n, n, 3) coefficients, got {c.shape}")
        _check_n(c.shape[0])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def at(self, k) -> np.ndarray:
        return self.coeffs[k[0] % self.n, k[1] % self.n]

    def is_real(self, tol: float = 1e-12) -> bool:
        flipped = np.roll(self.coeffs[::-1, ::-1], 1, axis=(0, 1))
        return bool(np.abs(flipped - self.coeffs.conj()).max() <= tol * max(1.0, np.abs(self.coeffs).max()))


def to_spectral(f: RealField) -> SpectralField:
    n = f.n
    return SpectralField(sfft.fft2(f.data, axes=(0, 1), workers=fft_workers()) / n**2)


def to_real(g: SpectralField) -> RealField:
    n = g.n
    return RealField(sfft.ifft2(g.coeffs * n**2, axes=(0, 1), workers=fft_workers()).real)


@lru_cache(maxsize=64)
def _v_grid(spec: LatticeSpec, n: int, half: bool):
    _, _, v1, v2 = wave_vector_grid(spec, n, half=half)
    v1.setflags(write=False)
    v2.setflags(write=False)
    return v1, v2


def linear_symbol(p: ModelParams, v1, v2) -> np.ndarray:
    """Hermitian 3x3 blocks ``M(v)`` of the linear operator, shape ``v1.shape + (3, 3)``."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    d = v1**2 + v2**2 + p.lam
    M = np.zeros(v1.shape + (3, 3), dtype=complex)
    M[..., 0, 0] = d
    M[..., 1, 1] = d
    M[..., 2, 2] = d + p.beta
    M[..., 0, 2] = 2j * p.kappa * v2
    M[..., 1, 2] = -2j * p.kappa * v1
    M[..., 2, 0] = -2j * p.kappa * v2
    M[..., 2, 1] = 2j * p.kappa * v1
    return M


def _curl_coeffs(c: np.ndarray, v1, v2) -> np.ndarray:
    out = np.empty_like(c)
    out[..., 0] = 1j * v2 * c[..., 2]
    out[..., 1] = -1j * v1 * c[..., 2]
    out[..., 2] = 1j * (v1 * c[..., 1] - v2 * c[..., 0])
    return out


def curl2d(g: SpectralField, spec: LatticeSpec) -> SpectralField:
    v1, v2 = _v_grid(spec, g.n, False)
    return SpectralField(_curl_coeffs(g.coeffs, v1, v2))


def divergence(g: SpectralField, spec: LatticeSpec) -> np.ndarray:
    """Fourier coefficients of the in-plane divergence, shape ``(n, n)``."""
    v1, v2 = _v_grid(spec, g.n, False)
    return 1j * (v1 * g.coeffs[..., 0] + v2 * g.coeffs[..., 1])


def gradient_sq_mean(g: SpectralField, spec: LatticeSpec) -> float:
    """Cell average of ``|grad m|^2`` via Parseval."""
    v1, v2 = _v_grid(spec, g.n, False)
    return float(np.sum((v1**2 + v2**2)[..., None] * np.abs(g.coeffs) ** 2))


def apply_linear(g: SpectralField, p: ModelParams, spec: LatticeSpec) -> SpectralField:
    v1, v2 = _v_grid(spec, g.n, False)
    M = linear_symbol(p, v1, v2)
    return SpectralField(np.einsum("...ij,...j->...i", M, g.coeffs))


def _linear_real(f: RealField, p: ModelParams, spec: LatticeSpec) -> np.ndarray:
    return to_real(apply_linear(to_spectral(f), p, spec)).data


def el_residual(f: RealField, p: ModelParams, spec: LatticeSpec) -> RealField:
    """Euler-Lagrange residual ``L m + alpha |m|^2 m`` on the grid."""
    m = f.data
    return RealField(_linear_real(f, p, spec) + p.alpha * np.sum(m * m, axis=-1)[..., None] * m)


def inner(u: RealField, w: RealField) -> float:
    """Discrete L2 product: the grid average of ``u . w`` over one primitive cell."""
    return float(np.mean(np.sum(u.data * w.data, axis=-1)))


def norm(u: RealField) -> float:
    return math.sqrt(inner(u, u))


def quadratic_form(f: RealField, p: ModelParams, spec: LatticeSpec) -> float:
    """``<m, L m>_N``; equals the Hessian of the energy at ``m = 0`` along ``f``."""
    g = to_spectral(f)
    Lg = apply_linear(g, p, spec)
    return float(np.sum((g.coeffs.conj() * Lg.coeffs).real))


def energy(f: RealField, p: ModelParams, spec: LatticeSpec) -> float:
    """Discrete energy ``1/2 <m, L m>_N + <1, alpha/4 |m|^4>_N``."""
    m2 = np.sum(f.data * f.data, axis=-1)
    return 0.5 * quadratic_form(f, p, spec) + 0.25 * p.alpha * float(np.mean(m2 * m2))


def helix_field(p: ModelParams, spec: LatticeSpec, n: int) -> RealField:
    """Helix ``M (0, cos(kappa x1), sin(kappa x1))`` with ``M = sqrt((kappa^2 - lambda)/alpha)``."""
    n = _check_n(n)
    gap = p.kappa**2 - p.lam
    if gap == 0:
        raise ZeroAmplitude("lambda = kappa^2 gives zero helix amplitude")
    if gap < 0:
        raise DomainError("helix requires lambda < kappa^2")
    # kappa * (x1-component of each lattice basis vector) must lie in 2 pi Z
    q = p.kappa * spec.basis_matrix[0]
    if np.abs(q - np.rint(q)).max() > 1e-9:
        raise IncompatibleLattice(
            f"helix of pitch 2pi/{p.kappa} is not periodic on lattice {spec}"
        )
    q1, q2 = (int(x) for x in np.rint(q))
    M = math.sqrt(gap / p.alpha)
    i = np.arange(n)
    I, J = np.meshgrid(i, i, indexing="ij")
    # kappa x1 = 2 pi (q1 i + q2 j) / n, reduced mod n to keep the phase exact
    ph = 2 * np.pi * ((q1 * I + q2 * J) % n) / n
    return RealField(np.stack([np.zeros_like(ph), M * np.cos(ph), M * np.sin(ph)], axis=-1))

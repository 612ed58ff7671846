"""L2 gradient flow of the discrete energy.

Time stepping is the modified Crank-Nicolson scheme

    (m+ - m)/dt + L (m+ + m)/2 = N(m, m+),   N(u, w) = -alpha (u + w)/4 (|u|^2 + |w|^2)

with Fourier collocation in space.  Taking the discrete product with
``m+ - m`` gives the energy law

    ||m+ - m||^2 / dt + E(m+) = E(m)

exactly, so the energy is non-increasing for any ``dt`` as long as the inner
fixed-point iteration converges.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, FixedPointFailure
from .field import ModelParams, RealField, _check_n, _v_grid, energy, fft_workers, linear_symbol, to_spectral
from .lattice import LatticeSpec, WaveVector

log = logging.getLogger(__name__)

CRITICAL_SHELL = (0.9, 1.1)
PAIR_THRESHOLD = 0.2
HOMOGENEOUS_RATIO = 1e-6


class Termination(str, enum.Enum):
    ENERGY_SLOPE = "EnergySlope"
    MAX_STEPS = "MaxSteps"
    FIXED_POINT_FAILURE = "FixedPointFailure"


class Pattern(str, enum.Enum):
    HOMOGENEOUS = "Homogeneous"
    HELICAL = "Helical"
    VORTEX_ANTIVORTEX = "VortexAntivortex"
    SKYRMION = "Skyrmion"
    STRIPE = "Stripe"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class SolverConfig:
    n: int = 275
    dt: float = 0.1
    fp_tol: float = 1e-8
    grad_tol: float = 1e-7
    max_steps: int = 20_000
    fp_max_iters: int = 200
    seed: int = 0
    init_modulus_max: float = 0.1
    min_steps: int = 0
    rel_tol: float | None = 1e-4

    def __post_init__(self):
        _check_n(self.n)
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not (self.fp_tol > 0 and self.grad_tol > 0) or (self.rel_tol is not None and not self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_steps < 0 or self.min_steps < 0 or self.fp_max_iters < 1:
            raise DomainError("step counts must be non-negative and fp_max_iters >= 1")
        if self.init_modulus_max < 0:
            raise DomainError("init_modulus_max must be non-negative")


@dataclass(eq=False)
class FlowResult:
    final: RealField
    energy_trace: list  # (step, energy)
    steps_taken: int
    termination: Termination
    classification: Pattern | None = None
    dominant_modes: list = field(default_factory=list)
    fp_iters: list = field(default_factory=list)


def random_init(cfg: SolverConfig) -> RealField:
    """Uniform direction on the sphere times a modulus uniform on ``[0, init_modulus_max]``."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    z = rng.uniform(-1.0, 1.0, (n, n))
    phi = rng.uniform(0.0, 2 * np.pi, (n, n))
    r = np.sqrt(1.0 - z * z)
    direction = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    modulus = rng.uniform(0.0, cfg.init_modulus_max, (n, n))
    return RealField(direction * modulus[..., None])


@lru_cache(maxsize=32)
def _blocks(p: ModelParams, spec: LatticeSpec, n: int, dt: float):
    """Per-mode 3x3 matrices on the half spectrum.

    Returns ``(G, Binv)`` with ``Binv = (I + dt/2 M)^-1`` and
    ``G = Binv (I - dt/2 M)``.  The arrays are read-only so the cache can be
    shared between threads.
    """
    v1, v2 = _v_grid(spec, n, True)
    M = linear_symbol(p, v1, v2)
    eye = np.eye(3)
    Binv = np.linalg.inv(eye + 0.5 * dt * M)
    G = Binv @ (eye - 0.5 * dt * M)
    for a in (G, Binv):
        a.setflags(write=False)
    return G, Binv


def _rfft(a: np.ndarray) -> np.ndarray:
    return sfft.rfft2(a, axes=(0, 1), workers=fft_workers())


def _irfft(c: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfft2(c, s=(n, n), axes=(0, 1), workers=fft_workers())


def _apply(B: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", B, c)


def nonlinear(u: np.ndarray, w: np.ndarray, alpha: float) -> np.ndarray:
    su = np.sum(u * u, axis=-1)
    sw = np.sum(w * w, axis=-1)
    return -alpha * 0.25 * (u + w) * (su + sw)[..., None]


def apply_resolvent(g: np.ndarray, p: ModelParams, spec: LatticeSpec, dt: float) -> np.ndarray:
    """``(I + dt/2 L)^-1 g`` for grid samples ``g`` of shape ``(n, n, 3)``."""
    n = g.shape[0]
    _, Binv = _blocks(p, spec, n, dt)
    return _irfft(_apply(Binv, _rfft(g)), n)


def step(m_n: RealField, p: ModelParams, spec: LatticeSpec, cfg: SolverConfig) -> tuple[RealField, int]:
    """One time step; returns ``(m_{n+1}, fixed-point iterations used)``."""
    n = m_n.n
    G, Binv = _blocks(p, spec, n, cfg.dt)
    m = m_n.data
    lin = _apply(G, _rfft(m))
    cur = m
    for it in range(1, cfg.fp_max_iters + 1):
        rhs = lin + cfg.dt * _apply(Binv, _rfft(nonlinear(cur, m, p.alpha)))
        nxt = _irfft(rhs, n)
        diff = float(np.abs(nxt - cur).max())
        cur = nxt
        if diff < cfg.fp_tol:
            return RealField(cur), it
    raise FixedPointFailure(
        f"fixed-point iteration did not reach {cfg.fp_tol:g} in {cfg.fp_max_iters} iterations "
        f"(last update {diff:.3e}); reduce dt"
    )


def energy_law_residual(m_n: RealField, m_next: RealField, p: ModelParams, spec: LatticeSpec, dt: float) -> float:
    d = m_next.data - m_n.data
    dissipation = float(np.mean(np.sum(d * d, axis=-1))) / dt
    return dissipation + energy(m_next, p, spec) - energy(m_n, p, spec)


def relative_rate(m_n: RealField, m_next: RealField, dt: float) -> float:
    size = math.sqrt(float(np.mean(np.sum(m_next.data**2, axis=-1))))
    if size == 0.0:
        return 0.0
    d = m_next.data - m_n.data
    return math.sqrt(float(np.mean(np.sum(d * d, axis=-1)))) / (dt * size)


def run(
    p: ModelParams,
    spec: LatticeSpec,
    cfg: SolverConfig,
    init: RealField | None = None,
    classify: bool = True,
) -> FlowResult:
    """Integrate until ``(E_n - E_{n+1})/dt < grad_tol`` or ``max_steps``.

    The slope test alone is blind to small fields: during the linear growth
    of an unstable mode out of a weak random start the dissipation is far
    below ``grad_tol`` although the field is nowhere near equilibrium.  With
    ``cfg.rel_tol`` set, termination additionally needs the relative rate
    ``||m_{n+1} - m_n|| / (dt ||m_{n+1}||)`` to drop below it (a vanishing
    field counts as stationary).  The slope test is skipped for the first
    ``cfg.min_steps`` steps.
    """
    m = random_init(cfg) if init is None else init
    if m.n != cfg.n:
        raise DomainError(f"initial field has n={m.n}, config has n={cfg.n}")
    e = energy(m, p, spec)
    trace = [(0, e)]
    iters = []
    termination = Termination.MAX_STEPS
    steps = 0
    while steps < cfg.max_steps:
        try:
            m_next, it = step(m, p, spec, cfg)
        except FixedPointFailure as exc:
            partial = FlowResult(m, trace, steps, Termination.FIXED_POINT_FAILURE, fp_iters=iters)
            raise FixedPointFailure(str(exc), partial=partial) from exc
        steps += 1
        e_next = energy(m_next, p, spec)
        trace.append((steps, e_next))
        iters.append(it)
        slope = (e - e_next) / cfg.dt
        done = steps >= cfg.min_steps and slope < cfg.grad_tol
        if done and cfg.rel_tol is not None:
            done = relative_rate(m, m_next, cfg.dt) < cfg.rel_tol
        m, e = m_next, e_next
        if done:
            termination = Termination.ENERGY_SLOPE
            break
    log.debug("flow finished after %d steps (%s), E=%.6g", steps, termination.value, e)
    result = FlowResult(m, trace, steps, termination, fp_iters=iters)
    if classify:
        result.classification, result.dominant_modes = classify_pattern(m, spec)
    return result


def spectral_energy_split(f: RealField, spec: LatticeSpec, shell=CRITICAL_SHELL):
    """Split ``sum |m~(k)|^2`` into DC, critical-shell, inner and outer parts."""
    c = to_spectral(f).coeffs
    v1, v2 = _v_grid(spec, f.n, False)
    vn = np.hypot(v1, v2)
    e = np.sum(np.abs(c) ** 2, axis=-1)
    dc = float(e[0, 0])
    crit = (vn >= shell[0]) & (vn <= shell[1])
    outer = vn > shell[1]
    inner = (vn > 0) & (vn < shell[0])
    return {
        "dc": dc,
        "critical": float(e[crit].sum()),
        "outer": float(e[outer].sum()),
        "inner": float(e[inner].sum()),
        "non_dc": float(e.sum() - dc),
    }


def critical_pairs(f: RealField, spec: LatticeSpec, shell=CRITICAL_SHELL):
    """Critical-shell ``+-k`` pairs with amplitude ``a(k) + a(-k)``, largest first.

    ``a(k)`` is ``|m~(k)|`` summed over the three components.
    """
    n = f.n
    c = to_spectral(f).coeffs
    v1, v2 = _v_grid(spec, n, False)
    vn = np.hypot(v1, v2)
    amp = np.sum(np.abs(c), axis=-1)
    pairs = []
    for a, b in zip(*np.nonzero((vn >= shell[0]) & (vn <= shell[1]))):
        k = (int(a) if a <= n // 2 else int(a) - n, int(b) if b <= n // 2 else int(b) - n)
        if not (k[0] > 0 or (k[0] == 0 and k[1] > 0)):
            continue
        total = float(amp[a, b] + amp[-a % n, -b % n])
        pairs.append((WaveVector.from_index(spec, k), total))
    pairs.sort(key=lambda t: (-t[1], t[0].k))
    return pairs


def classify_pattern(f: RealField, spec: LatticeSpec, threshold: float = PAIR_THRESHOLD):
    """Name the terminal pattern from its Fourier spectrum."""
    m2 = float(np.mean(np.sum(f.data * f.data, axis=-1)))
    if m2 == 0.0:
        return Pattern.HOMOGENEOUS, []
    split = spectral_energy_split(f, spec)
    if split["non_dc"] < HOMOGENEOUS_RATIO * m2:
        return Pattern.HOMOGENEOUS, []
    if split["outer"] > split["critical"] and split["outer"] > split["inner"]:
        return Pattern.STRIPE, []
    pairs = critical_pairs(f, spec)
    if not pairs or pairs[0][1] == 0.0:
        return Pattern.UNCLASSIFIED, []
    top = pairs[0][1]
    dominant = [(w, a) for w, a in pairs if a >= threshold * top]
    kind = {
        1: Pattern.HELICAL,
        2: Pattern.VORTEX_ANTIVORTEX,
        3: Pattern.SKYRMION,
    }.get(len(dominant), Pattern.UNCLASSIFIED)
    return kind, dominant


def dominant_fraction(f: RealField, spec: LatticeSpec, dominant) -> float:
    """Share of the non-DC spectral energy carried by the given ``+-k`` pairs."""
    c = to_spectral(f).coeffs
    e = np.sum(np.abs(c) ** 2, axis=-1)
    total = float(e.sum() - e[0, 0])
    if total == 0.0:
        return 0.0
    n = f.n
    got = sum(float(e[w.k[0] % n, w.k[1] % n] + e[-w.k[0] % n, -w.k[1] % n]) for w, _ in dominant)
    return got / total


def auto_lambda(p: ModelParams, spec: LatticeSpec, symmetry, delta: float = 0.01, n: int = 81) -> float:
    """``lambda0 + delta * nu2`` for the given isotropy subgroup."""
    from .branch import compute_nu2
    from .linear import RootSign, bifurcation_point, build_mode

    bp = bifurcation_point(p, RootSign.PLUS)
    mode = build_mode(bp, spec, symmetry, n)
    return bp.lambda0 + delta * compute_nu2(mode, p)

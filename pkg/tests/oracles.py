"""Independent reference values for the test-suite.

Two oracles that share no code with the package:

* symbolic cell averages of the kernel modes (sympy), computed as the
  constant term of a Laurent polynomial in ``z_i = exp(2 pi i y_i)``;
* a tensor Gauss-Legendre quadrature over the unit cell in lattice
  coordinates ``y``, for numerical spot checks.
"""
from functools import lru_cache

import numpy as np
import sympy as sp

A = sp.symbols("A", positive=True)
_z1, _z2 = sp.symbols("z1 z2")
# stands for 1/sqrt(1 + A^2); kept symbolic so no denominators mix with z1, z2
_c = sp.symbols("c", positive=True)

SQUARE_DUAL = sp.Matrix([[1, 0], [0, 1]])
HEX_DUAL = sp.Matrix([[sp.sqrt(3) / 2, 0], [-sp.Rational(1, 2), 1]])


def _mode(k, dual, normalized=True):
    """phi_{1,v} for v = dual * k as a vector of Laurent polynomials."""
    v = dual * sp.Matrix(k)
    nv = sp.sqrt(v.dot(v))
    e = _z1 ** k[0] * _z2 ** k[1]
    sin = (e - 1 / e) / (2 * sp.I)
    cos = (e + 1 / e) / 2
    vec = sp.Matrix([A * v[1] / nv * sin, -A * v[0] / nv * sin, cos])
    return vec * _c if normalized else vec


def _avg(expr, degree=8):
    """Constant term of a Laurent polynomial of degree < ``degree`` in z1, z2."""
    shifted = sp.expand(sp.expand(expr) * _z1**degree * _z2**degree)
    poly = sp.Poly(shifted, _z1, _z2)
    const = poly.coeff_monomial(_z1**degree * _z2**degree)
    return sp.simplify(const.subs(_c, 1 / sp.sqrt(1 + A**2)))


def _sq(u):
    return u.dot(u)


@lru_cache(maxsize=None)
def square_vortex_quartic():
    """<|phi^(2)|^4> on the square lattice as a function of A."""
    p = _mode((1, 0), SQUARE_DUAL) - _mode((0, 1), SQUARE_DUAL)
    return sp.factor(_avg(_sq(p) ** 2))


@lru_cache(maxsize=None)
def helix_quartic():
    p = sp.sqrt(2) * _mode((0, 1), SQUARE_DUAL)
    return sp.factor(_avg(_sq(p) ** 2))


@lru_cache(maxsize=None)
def hex_quartic():
    p = sp.sqrt(sp.Rational(2, 3)) * sum((_mode(k, HEX_DUAL) for k in ((1, 0), (0, 1), (1, 1))), sp.zeros(3, 1))
    return sp.factor(_avg(_sq(p) ** 2))


@lru_cache(maxsize=None)
def c_tilde():
    p = _mode((1, 0), SQUARE_DUAL) - _mode((0, 1), SQUARE_DUAL)
    q = _mode((1, 0), SQUARE_DUAL) + _mode((0, 1), SQUARE_DUAL)
    nu2 = -square_vortex_quartic()
    expr = 4 * _avg(q.dot(p) ** 2) + 2 * _avg(_sq(q) * _sq(p)) + 2 * nu2 * _avg(_sq(q))
    return sp.factor(expr)


@lru_cache(maxsize=None)
def hex_witness():
    """Leading s^2 coefficient of <L_s phi, phi> for the raw phi_{1,v4} - phi_{1,v5} (alpha = 1)."""
    p3 = sp.sqrt(sp.Rational(2, 3)) * sum((_mode(k, HEX_DUAL) for k in ((1, 0), (0, 1), (1, 1))), sp.zeros(3, 1))
    ph = _mode((1, 0), HEX_DUAL, normalized=False) - _mode((0, 1), HEX_DUAL, normalized=False)
    nu2 = -hex_quartic()
    expr = nu2 * _avg(_sq(ph)) + _avg(_sq(p3) * _sq(ph) + 2 * p3.dot(ph) ** 2)
    return sp.factor(expr)


def evaluate(expr, a):
    return float(expr.subs(A, a))


# ---------------------------------------------------------------- quadrature


def gauss_legendre_average(func, nodes=48):
    """Average of ``func(y1, y2)`` over the unit square by tensor Gauss-Legendre."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    y = 0.5 * (x + 1.0)
    w = 0.5 * w
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    return float(np.sum(np.outer(w, w) * func(Y1, Y2)))


def mode_at(y1, y2, k, dual, amp, normalized=True):
    """Numerical phi_{1,v} at lattice coordinates y (so that v.x = 2 pi k.y)."""
    v = np.asarray(dual, float) @ np.asarray(k, float)
    nv = np.hypot(*v)
    ph = 2 * np.pi * (k[0] * y1 + k[1] * y2)
    out = np.stack([amp * v[1] / nv * np.sin(ph), -amp * v[0] / nv * np.sin(ph), np.cos(ph)], axis=-1)
    return out / np.sqrt(1 + amp**2) if normalized else out


def quartic_average_gl(modes_with_weights, dual, amp, nodes=48):
    def f(y1, y2):
        phi = sum(c * mode_at(y1, y2, k, dual, amp) for k, c in modes_with_weights)
        s = np.sum(phi * phi, axis=-1)
        return s * s

    return gauss_legendre_average(f, nodes)

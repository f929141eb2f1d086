"""Gamma function, normalized associated Legendre functions and Gauss rules."""

from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_sum(z):
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (z + i)
    return acc


def log_gamma(x):
    """log |Gamma(x)| for real x > 0, via the Lanczos approximation."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("log_gamma requires x > 0")
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(_lanczos_sum(z))
    return out if out.ndim else float(out)


def gamma(x):
    """Gamma(x) for real x, Lanczos approximation with reflection for x < 1/2."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    poles = (x <= 0) & (x == np.round(x))
    if np.any(poles):
        raise DomainError("gamma has poles at non-positive integers")
    small = x < 0.5
    if np.any(small):
        xs = x[small]
        out[small] = math.pi / (np.sin(math.pi * xs) * gamma(1.0 - xs))
    big = ~small
    if np.any(big):
        z = x[big] - 1.0
        t = z + _LANCZOS_G + 0.5
        out[big] = math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * np.exp(-t) * _lanczos_sum(z)
    return float(out[0]) if scalar else out


def gamma_ratio(a, b):
    """Gamma(a) / Gamma(b) for a, b > 0 without overflow."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.all(a < 140) and np.all(b < 140):
        out = gamma(a) / gamma(b)
    else:
        out = np.exp(log_gamma(a) - log_gamma(b))
    return float(out) if np.ndim(out) == 0 else out


def sphere_area(n):
    """Surface area of the unit sphere in R^n (n * omega_n)."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


def normalized_legendre(lmax, x):
    """Table of normalized associated Legendre functions.

    Returns ``P[l, m, ...]`` for ``0 <= m <= l <= lmax`` with
    ``int_{-1}^{1} P[l, m](x)**2 dx = 1`` and no Condon-Shortley phase.
    Entries with ``m > l`` are zero.
    """
    x = np.asarray(x, dtype=float)
    sin_t = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    P = np.zeros((lmax + 1, lmax + 1) + x.shape)
    P[0, 0] = math.sqrt(0.5)
    for m in range(1, lmax + 1):
        P[m, m] = math.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * P[m - 1, m - 1]
    for m in range(0, lmax):
        P[m + 1, m] = math.sqrt(2 * m + 3) * x * P[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a_lm = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            a_prev = math.sqrt((4.0 * (l - 1) ** 2 - 1.0) / ((l - 1) ** 2 - m * m))
            P[l, m] = a_lm * (x * P[l - 1, m] - P[l - 2, m] / a_prev)
    return P


@lru_cache(maxsize=256)
def _gauss_legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(order, a=-1.0, b=1.0):
    """Gauss-Legendre nodes and weights on [a, b]."""
    nodes, weights = _gauss_legendre(int(order))
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


@lru_cache(maxsize=256)
def _gauss_jacobi(order, alpha, beta):
    nodes, weights = roots_jacobi(order, alpha, beta)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(order, alpha, beta):
    """Nodes and weights for the weight (1-u)^alpha (1+u)^beta on [-1, 1]."""
    if alpha <= -1 or beta <= -1:
        raise DomainError("Jacobi exponents must exceed -1")
    return _gauss_jacobi(int(order), float(alpha), float(beta))

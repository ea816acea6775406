"""Scalar special functions used by the spherical-harmonic machinery.

Legendre and associated Legendre functions are evaluated by upward
recurrence in degree, which is stable on [-1, 1]. The associated Legendre
functions include the Condon-Shortley phase (-1)^m; spherical harmonics
therefore must not apply it a second time. Negative orders are handled at
the spherical-harmonic level through conjugation symmetry, so the Legendre
routines only accept m >= 0.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import spherical_jn, spherical_yn


class ModeIndex(NamedTuple):
    """Degree/order pair (l, m) with l >= 0 and |m| <= l."""

    l: int
    m: int


def _validate_mode(l: int, m: int) -> None:
    if l < 0:
        raise ValueError(f"degree l must be >= 0, got {l}")
    if abs(m) > l:
        raise ValueError(f"order m must satisfy |m| <= l, got (l, m) = ({l}, {m})")


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, np.isscalar(x) or arr.ndim == 0


def legendre_p(l: int, x):
    """Legendre polynomial P_l(x) by upward recurrence.

    Accepts scalars or arrays in [-1, 1].
    """
    if l < 0:
        raise ValueError(f"degree l must be >= 0, got {l}")
    arr, scalar = _as_float_array(x)
    if np.any(np.abs(arr) > 1.0):
        raise ValueError("legendre_p requires |x| <= 1")
    p_prev = np.ones_like(arr)
    if l == 0:
        return float(p_prev) if scalar else p_prev
    p_curr = arr.copy()
    for n in range(1, l):
        # Bonnet recurrence: (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        p_prev, p_curr = p_curr, ((2 * n + 1) * arr * p_curr - n * p_prev) / (n + 1)
    return float(p_curr) if scalar else p_curr


def _assoc_legendre_xs(l: int, m: int, x, s):
    """Associated Legendre P_l^m with x = cos(theta), s = sin(theta) passed
    separately so callers near the poles keep full precision in the s^m seed.
    Condon-Shortley phase included. Requires 0 <= m <= l.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    # Seed P_m^m = (-1)^m (2m-1)!! s^m
    pmm = np.ones(np.broadcast(x, s).shape, dtype=float)
    for i in range(1, m + 1):
        pmm = pmm * (-(2 * i - 1)) * s
    if l == m:
        return pmm
    pm1 = x * (2 * m + 1) * pmm
    if l == m + 1:
        return pm1
    for n in range(m + 2, l + 1):
        pmm, pm1 = pm1, ((2 * n - 1) * x * pm1 - (n + m - 1) * pmm) / (n - m)
    return pm1


def assoc_legendre(l: int, m: int, x):
    """Associated Legendre function P_l^m(x), Condon-Shortley phase included.

    Only m >= 0 is accepted; negative orders belong to sph_harm's
    conjugation path.
    """
    if m < 0:
        raise ValueError("assoc_legendre requires m >= 0")
    if m > l or l < 0:
        raise ValueError(f"invalid degree/order (l, m) = ({l}, {m})")
    arr, scalar = _as_float_array(x)
    if np.any(np.abs(arr) > 1.0):
        raise ValueError("assoc_legendre requires |x| <= 1")
    out = _assoc_legendre_xs(l, m, arr, np.sqrt(np.clip(1.0 - arr * arr, 0.0, None)))
    return float(out) if scalar else out


def ylm_norm(l: int, m: int) -> float:
    """Orthonormalization factor sqrt((2l+1)(l-m)!/(4 pi (l+m)!)) for m >= 0.

    Uses log-gamma for l > 10 so the factorial ratio cannot overflow.
    """
    if l > 10:
        log_ratio = math.lgamma(l - m + 1) - math.lgamma(l + m + 1)
        return math.sqrt((2 * l + 1) / (4.0 * math.pi)) * math.exp(0.5 * log_ratio)
    return math.sqrt(
        (2 * l + 1) * math.factorial(l - m) / (4.0 * math.pi * math.factorial(l + m))
    )


def sph_harm(mode, theta, phi):
    """Orthonormal complex spherical harmonic Y_{l,m}(theta, phi).

    Negative m is derived from Y_{l,-m} = (-1)^m conj(Y_{l,m}). At the poles
    the exact limit is returned (zero unless m = 0).
    """
    l, m = mode
    _validate_mode(l, m)
    if m < 0:
        return (-1) ** (-m) * np.conj(sph_harm((l, -m), theta, phi))
    th, scalar_t = _as_float_array(theta)
    ph, scalar_p = _as_float_array(phi)
    x = np.cos(th)
    # force the exact polar limit: when cos rounds to +-1, sin(pi) would
    # leave a 1e-16 residue in the s^m seed instead of an exact zero
    s = np.where(np.abs(x) >= 1.0, 0.0, np.sin(th))
    out = ylm_norm(l, m) * _assoc_legendre_xs(l, m, x, s) * np.exp(1j * m * ph)
    return complex(out) if (scalar_t and scalar_p and out.ndim == 0) else out


def spherical_hankel2(l: int, x):
    """Spherical Hankel function of the second kind, j_l(x) - i y_l(x)."""
    if l < 0:
        raise ValueError(f"degree l must be >= 0, got {l}")
    arr, scalar = _as_float_array(x)
    if np.any(arr <= 0.0):
        raise ValueError("spherical_hankel2 requires x > 0")
    out = spherical_jn(l, arr) - 1j * spherical_yn(l, arr)
    return complex(out) if scalar else out

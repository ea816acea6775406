"""Vector spherical harmonics on the far-field sphere.

X_{l,m} is the tangential harmonic built from the angular-momentum operator
acting on Y_{l,m}; r_hat x X_{l,m} is its 90-degree tangent-plane rotation.
Both are returned as (theta, phi) component pairs. Mode bookkeeping (the
flat q <-> (family, l, m) ordering used by every matrix in the toolkit)
lives here as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .specfun import _assoc_legendre_xs, _validate_mode, ylm_norm

POLE_TOL = 1e-6

ELECTRIC = "E"
MAGNETIC = "M"

PARITY_FILTERS = ("all", "odd", "even")
MULTIPOLE_FILTERS = ("both", "electric", "magnetic")


@dataclass
class TangentVector:
    """Tangential field vector: complex theta and phi components.

    Components may be scalars or broadcast numpy arrays; the radial
    component is identically zero by construction.
    """

    e_theta: complex | np.ndarray
    e_phi: complex | np.ndarray

    def magnitude(self):
        return np.sqrt(np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2)

    def __add__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.e_theta + other.e_theta, self.e_phi + other.e_phi)

    def __mul__(self, scale) -> "TangentVector":
        return TangentVector(scale * self.e_theta, scale * self.e_phi)

    __rmul__ = __mul__


class ModeEntry(NamedTuple):
    family: str  # ELECTRIC or MAGNETIC
    l: int
    m: int


@dataclass(frozen=True)
class ModeSet:
    """Ordered, filtered collection of (family, l, m) modes.

    The ordering is the file-format and matrix contract: electric block
    first, then magnetic, each sorted by (l ascending, m ascending).
    """

    lambda_max: int
    parity: str = "all"
    multipole: str = "both"
    entries: tuple[ModeEntry, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def n_electric(self) -> int:
        return sum(1 for e in self.entries if e.family == ELECTRIC)

    @property
    def n_magnetic(self) -> int:
        return sum(1 for e in self.entries if e.family == MAGNETIC)

    def index_of(self, family: str, l: int, m: int) -> int:
        for q, entry in enumerate(self.entries):
            if entry == (family, l, m):
                return q
        raise KeyError(f"mode ({family}, {l}, {m}) not in set")

    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted({e.l for e in self.entries}))


def _filtered_degrees(lambda_max: int, parity: str):
    for l in range(1, lambda_max + 1):
        if parity == "odd" and l % 2 == 0:
            continue
        if parity == "even" and l % 2 == 1:
            continue
        yield l


def build_mode_set(lambda_max: int, parity: str = "all", multipole: str = "both") -> ModeSet:
    """Construct the deterministic mode ordering for a truncation order.

    With parity "all" and multipole "both" the size is 2*L*(L+2). The l = 0
    mode never appears: a radiating antenna has no monopole term.
    """
    if lambda_max < 1:
        raise ValueError(f"lambda_max must be >= 1, got {lambda_max}")
    if parity not in PARITY_FILTERS:
        raise ValueError(f"parity must be one of {PARITY_FILTERS}, got {parity!r}")
    if multipole not in MULTIPOLE_FILTERS:
        raise ValueError(f"multipole must be one of {MULTIPOLE_FILTERS}, got {multipole!r}")
    entries: list[ModeEntry] = []
    if multipole in ("both", "electric"):
        for l in _filtered_degrees(lambda_max, parity):
            for m in range(-l, l + 1):
                entries.append(ModeEntry(ELECTRIC, l, m))
    if multipole in ("both", "magnetic"):
        for l in _filtered_degrees(lambda_max, parity):
            for m in range(-l, l + 1):
                entries.append(ModeEntry(MAGNETIC, l, m))
    return ModeSet(lambda_max, parity, multipole, tuple(entries))


def _vsh_x_nonneg(l: int, m: int, theta, phi):
    """X_{l,m} components for m >= 0 with a guarded path at the poles.

    theta_hat component: -(m / sin(theta)) Y_{l,m} / sqrt(l(l+1))
    phi_hat component:   (-j / sqrt(l(l+1))) dY_{l,m}/dtheta
    where dP_l^m(cos t)/dt = [l cos t P_l^m - (l+m) P_{l-1}^m] / sin t.
    """
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    th, ph = np.broadcast_arrays(th, ph)
    x = np.cos(th)
    s = np.sin(th)

    near_pole = (th < POLE_TOL) | (np.pi - th < POLE_TOL)
    s_safe = np.where(near_pole, 1.0, s)

    nrm = ylm_norm(l, m)
    inv_root = 1.0 / math.sqrt(l * (l + 1))
    plm = _assoc_legendre_xs(l, m, x, s)
    # P_{l-1}^m is conventionally zero when m = l (the (l+m) P_{l-1}^m term drops).
    plm1 = _assoc_legendre_xs(l - 1, m, x, s) if m <= l - 1 else np.zeros_like(x)
    dtheta = (l * x * plm - (l + m) * plm1) / s_safe
    expht = np.exp(1j * m * ph)

    e_theta = (-(m * inv_root) * nrm * plm / s_safe) * expht
    e_phi = (-1j * inv_root) * nrm * dtheta * expht

    if np.any(near_pole):
        # Analytic polar limits: zero unless m == 1.
        if m == 1:
            c = math.sqrt((2 * l + 1) / (16.0 * math.pi))
            north = near_pole & (th < POLE_TOL)
            south = near_pole & ~(th < POLE_TOL)
            e_theta = np.where(north, c * expht, e_theta)
            e_phi = np.where(north, 1j * c * expht, e_phi)
            sgn = (-1) ** l
            e_theta = np.where(south, -sgn * c * expht, e_theta)
            e_phi = np.where(south, sgn * 1j * c * expht, e_phi)
        else:
            zero = np.zeros_like(expht)
            e_theta = np.where(near_pole, zero, e_theta)
            e_phi = np.where(near_pole, zero, e_phi)
    return e_theta, e_phi


def vsh_x(mode, theta, phi) -> TangentVector:
    """Vector spherical harmonic X_{l,m} at (theta, phi); l >= 1 required.

    Negative orders use X_{l,-m} = (-1)^(m+1) conj(X_{l,m}).
    """
    l, m = mode
    _validate_mode(l, m)
    if l < 1:
        raise ValueError("vector spherical harmonics require l >= 1")
    if m < 0:
        et, ep = _vsh_x_nonneg(l, -m, theta, phi)
        sign = (-1) ** ( -m + 1)
        return TangentVector(sign * np.conj(et), sign * np.conj(ep))
    et, ep = _vsh_x_nonneg(l, m, theta, phi)
    return TangentVector(et, ep)


def r_cross_x(mode, theta, phi) -> TangentVector:
    """r_hat x X_{l,m}: the tangent-plane rotation (-X_phi, X_theta)."""
    x = vsh_x(mode, theta, phi)
    return TangentVector(-x.e_phi, x.e_theta)

"""Random multipath chamber simulation.

Each probe sees a sum over propagation paths; a path samples the antenna's
modified far field at a random launch direction, mixes the two
polarizations through a random angle, and applies a complex gain. The
whole chamber is a pure function of its seed, so experiments replay
exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .farfield import ETA0
from .vsh import ELECTRIC, ModeSet, r_cross_x


@dataclass
class ChamberModel:
    """Per-probe, per-path random parameters (all arrays N_s x N_p)."""

    n_probes: int
    n_paths: int
    sigma_rho: float
    seed: int
    rho: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        shape = (self.n_probes, self.n_paths)
        for name in ("rho", "theta", "phi", "alpha"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")


def sample_chamber(seed: int, n_probes: int, n_paths: int, sigma_rho: float = 0.001) -> ChamberModel:
    """Draw a chamber realization.

    Draw order is fixed (rho real, rho imaginary, launch theta, launch phi,
    polarization alpha) from a single PCG64 stream, so a seed pins the model.
    Gains are complex normal; theta is uniform on (0, pi) as specified by
    the path model, not cosine-weighted.
    """
    if n_probes < 1 or n_paths < 1:
        raise ValueError("need at least one probe and one path")
    if sigma_rho <= 0.0:
        raise ValueError("sigma_rho must be positive")
    rng = np.random.default_rng(seed)
    shape = (n_probes, n_paths)
    rho_re = rng.normal(0.0, sigma_rho, shape)
    rho_im = rng.normal(0.0, sigma_rho, shape)
    theta = rng.uniform(0.0, np.pi, shape)
    phi = rng.uniform(0.0, 2.0 * np.pi, shape)
    alpha = rng.uniform(0.0, 2.0 * np.pi, shape)
    return ChamberModel(
        n_probes=n_probes,
        n_paths=n_paths,
        sigma_rho=sigma_rho,
        seed=int(seed),
        rho=rho_re + 1j * rho_im,
        theta=theta,
        phi=phi,
        alpha=alpha,
    )


def probe_voltages(chamber: ChamberModel, field) -> np.ndarray:
    """Voltages at every probe for a radiating field.

    v_k = sum_n rho_kn [E_theta(launch_kn) cos(alpha_kn)
                        + E_phi(launch_kn) sin(alpha_kn)]
    """
    sampled = field(chamber.theta, chamber.phi)
    mixed = sampled.e_theta * np.cos(chamber.alpha) + sampled.e_phi * np.sin(chamber.alpha)
    return np.sum(chamber.rho * mixed, axis=1)


@dataclass
class ChannelMatrix:
    """Linear map from multipole amplitude vectors to probe voltages."""

    entries: np.ndarray  # complex, N_s x mode_set.size
    mode_set: ModeSet

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[1] != self.mode_set.size:
            raise ValueError(
                f"channel must be N_s x {self.mode_set.size}, got {self.entries.shape}"
            )

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.entries))


def analytic_channel(chamber: ChamberModel, mode_set: ModeSet) -> ChannelMatrix:
    """Channel matrix built directly from the path parameters.

    Only valid for electric-multipole-only mode sets; each column couples one
    mode's tangential pattern into every probe:

      T[k, q] = -eta0 j^(l+1) sum_n rho_kn [R_theta cos(alpha) + R_phi sin(alpha)]

    with R the components of r_hat x X at the launch direction. Applied to an
    unscaled amplitude vector it reproduces probe_voltages of the truncated
    field exactly; against the exact field it differs by the truncation
    residual.
    """
    if any(entry.family != ELECTRIC for entry in mode_set.entries):
        raise ValueError("analytic channel requires an electric-only mode set")
    cos_a = np.cos(chamber.alpha)
    sin_a = np.sin(chamber.alpha)
    entries = np.empty((chamber.n_probes, mode_set.size), dtype=complex)
    for q, (_, l, m) in enumerate(mode_set.entries):
        vec = r_cross_x((l, m), chamber.theta, chamber.phi)
        mixed = vec.e_theta * cos_a + vec.e_phi * sin_a
        entries[:, q] = -ETA0 * (1j ** (l + 1)) * np.sum(chamber.rho * mixed, axis=1)
    return ChannelMatrix(entries, mode_set)


def select_chamber(
    seeds,
    voltage_builder,
    n_probes: int,
    n_paths: int,
    sigma_rho: float = 0.001,
) -> tuple[ChamberModel, float]:
    """Pick the candidate chamber with the best-conditioned reference voltages.

    voltage_builder maps a ChamberModel to its N_s x N_R reference voltage
    matrix. Ties keep the earliest seed, so selection is deterministic.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one candidate seed")
    best: tuple[float, ChamberModel] | None = None
    for seed in seeds:
        chamber = sample_chamber(seed, n_probes, n_paths, sigma_rho)
        cond = float(np.linalg.cond(voltage_builder(chamber)))
        if best is None or cond < best[0]:
            best = (cond, chamber)
    return best[1], best[0]

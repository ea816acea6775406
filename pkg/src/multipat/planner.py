"""Mode budgeting and measurement-setup quality metrics.

How many harmonics does an antenna of a given electrical size need, and how
good is a particular calibration set or chamber at resolving them? The
optimizer is a plain Nelder-Mead simplex over reference orientations with
a budgeted evaluation count and a monotone best-so-far trace.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import dipole, farfield
from .vsh import ModeSet


def mode_count(lambda_max: int) -> int:
    """Number of harmonics for a truncation order: 2 L (L + 2)."""
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    return 2 * lambda_max * (lambda_max + 2)


def lambda_simple(k_r: float) -> int:
    """Truncation order from the enclosing-sphere size: ceil(kR)."""
    if k_r <= 0.0:
        raise ValueError("kR must be positive")
    return math.ceil(k_r)


def lambda_jensen(k_r: float, p_tr: float, p_r: float = 0.0) -> int:
    """Conservative truncation order from a target truncated-power level.

    ceil(kR + 0.045 (kR)^(1/3) (p_r - p_tr)), powers in dB. The fit behind
    it is only validated for electrically large antennas and p_tr <= -40 dB;
    outside that range a warning is emitted and the value is advisory.
    """
    if k_r <= 0.0:
        raise ValueError("kR must be positive")
    if k_r < 10.0:
        warnings.warn(
            f"kR = {k_r:.3g} is outside the validity range (kR >> 1); "
            f"treat the estimate as advisory"
        )
    if p_tr > -40.0:
        warnings.warn(f"p_tr = {p_tr:.3g} dB is above the -40 dB validity limit")
    return math.ceil(k_r + 0.045 * np.cbrt(k_r) * (p_r - p_tr))


@dataclass
class ModeBudget:
    lambda_max: int
    n_modes: int
    rule: str  # "simple-ceiling" or "jensen"
    p_tr: float | None = None
    p_r: float = 0.0


def plan_modes(k_r: float, p_tr: float | None = None, p_r: float = 0.0) -> ModeBudget:
    """Mode budget for an enclosing-sphere size, optionally accuracy-driven."""
    if p_tr is None:
        lam = lambda_simple(k_r)
        return ModeBudget(lam, mode_count(lam), "simple-ceiling")
    lam = lambda_jensen(k_r, p_tr, p_r)
    return ModeBudget(lam, mode_count(lam), "jensen", p_tr=p_tr, p_r=p_r)


def _entries(matrix) -> np.ndarray:
    return np.asarray(getattr(matrix, "entries", matrix), dtype=complex)


def epsilon_entropy(channel, epsilon: float) -> float:
    """Information bound of a channel at uncertainty epsilon.

    Sum over singular values of log2(sigma / epsilon). A singular channel
    yields -inf. At epsilon = 1 this equals half the log2 determinant of
    T T^H (consistency is pinned by tests).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    t = _entries(channel)
    if not np.any(t):
        raise ValueError("channel matrix is zero")
    sigma = np.linalg.svd(t, compute_uv=False)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log2(sigma / epsilon)))


def capacity_objective(channel) -> float:
    """Placement objective -det(T T^H); lower means more informative."""
    t = _entries(channel)
    return float(-np.linalg.det(t @ t.conj().T).real)


def wrap_orientation(theta: float, phi: float) -> tuple[float, float]:
    """Map arbitrary angles to the canonical (theta in [0, pi], phi in [0, 2 pi))."""
    x = math.sin(theta) * math.cos(phi)
    y = math.sin(theta) * math.sin(phi)
    z = math.cos(theta)
    t = math.acos(max(-1.0, min(1.0, z)))
    p = math.atan2(y, x) % (2.0 * math.pi)
    return t, p


def fibonacci_orientations(n: int) -> list[tuple[float, float]]:
    """Quasi-uniform axis directions on the upper hemisphere.

    Avoids antipodal pairs (which would duplicate dipole patterns) and the
    exact pole only by construction of the z offsets.
    """
    golden = math.pi * (3.0 - math.sqrt(5.0))
    out = []
    for i in range(n):
        z = 1.0 - (i + 0.5) / n  # z in (0, 1): upper hemisphere
        out.append((math.acos(z), (i * golden) % (2.0 * math.pi)))
    return out


def dipole_coefficient_matrix(
    orientations,
    mode_set: ModeSet,
    length: float = 0.5,
    current: float = 1.0,
    grid: farfield.SphereGrid | None = None,
    k: float = 2.0 * math.pi,
) -> np.ndarray:
    """Amplitude-vector matrix (modes x orientations) of identical dipoles."""
    if grid is None:
        grid = farfield.default_grid(mode_set.lambda_max)
    cols = []
    for t, p in orientations:
        spec = dipole.DipoleSpec(length=length, theta0=t, phi0=p, current=current)
        coeffs = farfield.decompose(spec.field(k), mode_set, grid)
        cols.append(coeffs.to_amplitude_vector())
    return np.column_stack(cols)


def nelder_mead(fun, x0: np.ndarray, budget: int, step: float = 0.25, ftol_rel: float = 1e-6):
    """Budgeted Nelder-Mead minimizer.

    Standard reflection/expansion/contraction coefficients (1, 2, 0.5) and
    shrink 0.5. Stops when the simplex objective spread falls below ftol_rel
    relative or the evaluation budget is exhausted; always returns the best
    point seen. The trace records (evaluations_used, best_so_far) at every
    improvement.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    evals = 0
    trace: list[tuple[int, float]] = []
    best_x, best_f = x0.copy(), math.inf

    def record(x, f):
        nonlocal best_x, best_f
        if f < best_f:
            best_x, best_f = x.copy(), f
            trace.append((evals, f))

    def call(x):
        nonlocal evals
        evals += 1
        f = fun(x)
        record(x, f)
        return f

    f0 = fun(x0)  # baseline, not counted against the budget
    record(x0, f0)
    if budget <= 0:
        return best_x, best_f, trace

    simplex = [x0.copy()]
    fvals = [f0]
    for i in range(n):
        if evals >= budget:
            return best_x, best_f, trace
        xi = x0.copy()
        xi[i] += step
        simplex.append(xi)
        fvals.append(call(xi))

    while evals < budget:
        order = np.argsort(fvals)
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        spread = fvals[-1] - fvals[0]
        if spread <= ftol_rel * max(abs(fvals[0]), 1e-300):
            break
        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + (centroid - simplex[-1])
        fr = call(reflected)
        if fr < fvals[0]:
            if evals < budget:
                expanded = centroid + 2.0 * (centroid - simplex[-1])
                fe = call(expanded)
                if fe < fr:
                    simplex[-1], fvals[-1] = expanded, fe
                    continue
            simplex[-1], fvals[-1] = reflected, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, fr
            continue
        if evals >= budget:
            break
        if fr < fvals[-1]:  # outside contraction
            contracted = centroid + 0.5 * (reflected - centroid)
            fc = call(contracted)
            if fc <= fr:
                simplex[-1], fvals[-1] = contracted, fc
                continue
        else:  # inside contraction
            contracted = centroid - 0.5 * (centroid - simplex[-1])
            fc = call(contracted)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = contracted, fc
                continue
        for i in range(1, n + 1):  # shrink toward the best vertex
            if evals >= budget:
                break
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            fvals[i] = call(simplex[i])
    return best_x, best_f, trace


@dataclass
class OptimizationResult:
    orientations: list[tuple[float, float]]
    objective_value: float
    trace: list[tuple[int, float]]


def optimize_reference_orientations(
    initial,
    matrix_builder=None,
    objective: str = "cond-A",
    budget: int = 2000,
    mode_set: ModeSet | None = None,
    length: float = 0.5,
    step: float = 0.25,
) -> OptimizationResult:
    """Locally optimize reference-antenna orientations.

    matrix_builder maps a list of (theta0, phi0) pairs to the matrix the
    objective is computed on; the default builds the dipole amplitude matrix
    over mode_set. Objectives: "cond-A" (condition number) or "capacity"
    (-det(M M^H)). Angles float freely during the search and are wrapped to
    the canonical ranges for every evaluation, so no boundary clipping
    distorts the simplex.
    """
    orientations = [(float(t), float(p)) for t, p in initial]
    if matrix_builder is None:
        if mode_set is None:
            raise ValueError("default matrix builder needs a mode_set")
        if len(orientations) < mode_set.size:
            raise ValueError(
                f"{len(orientations)} orientations cannot span {mode_set.size} modes"
            )
        grid = farfield.default_grid(mode_set.lambda_max)

        def matrix_builder(pairs):
            return dipole_coefficient_matrix(pairs, mode_set, length=length, grid=grid)

    if objective == "cond-A":
        score = lambda m: float(np.linalg.cond(m))
    elif objective == "capacity":
        score = capacity_objective
    else:
        raise ValueError(f"unknown objective {objective!r}")

    def unpack(x):
        return [wrap_orientation(x[2 * i], x[2 * i + 1]) for i in range(len(orientations))]

    def fun(x):
        return score(matrix_builder(unpack(x)))

    x0 = np.array([a for pair in orientations for a in pair], dtype=float)
    best_x, best_f, trace = nelder_mead(fun, x0, budget=budget, step=step)
    return OptimizationResult(unpack(best_x), best_f, trace)

"""File formats for configs, coefficients, chambers, and pattern grids.

JSON documents are written with sorted keys and repr-exact floats, and CSV
cells use repr as well, so write -> read -> write is byte-identical and
replayed experiments diff clean. Complex numbers are [re, im] pairs.
Angles in files are always radians.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .vsh import ModeEntry, ModeSet, build_mode_set


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# JSON plumbing

def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def complex_to_pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(pair) -> complex:
    return complex(pair[0], pair[1])


def matrix_to_pairs(matrix) -> list:
    return [[complex_to_pair(z) for z in row] for row in np.asarray(matrix, dtype=complex)]


def pairs_to_matrix(rows) -> np.ndarray:
    return np.array([[pair_to_complex(p) for p in row] for row in rows], dtype=complex)


# ---------------------------------------------------------------------------
# Mode sets and coefficients

def mode_set_to_dict(ms: ModeSet) -> dict:
    return {"lambda_max": ms.lambda_max, "parity": ms.parity, "multipole": ms.multipole}


def mode_set_from_dict(d: dict) -> ModeSet:
    try:
        return build_mode_set(
            int(d["lambda_max"]), d.get("parity", "all"), d.get("multipole", "both")
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad mode_set section: {exc}") from exc


def coefficients_to_dict(coeffs) -> dict:
    """Self-describing coefficient document: the mode ordering rides along."""
    modes = [
        {"family": e.family, "l": e.l, "m": e.m, "value": complex_to_pair(v)}
        for e, v in zip(coeffs.mode_set.entries, coeffs.values)
    ]
    return {
        "format": "vsh-coefficients/1",
        "mode_set": mode_set_to_dict(coeffs.mode_set),
        "modes": modes,
    }


def coefficients_from_dict(d: dict):
    from .farfield import VshCoefficients

    if d.get("format") != "vsh-coefficients/1":
        raise ConfigError(f"not a coefficient document: format={d.get('format')!r}")
    ms = mode_set_from_dict(d["mode_set"])
    listed = tuple(ModeEntry(m["family"], int(m["l"]), int(m["m"])) for m in d["modes"])
    if listed != ms.entries:
        raise ConfigError("coefficient file ordering disagrees with its mode_set")
    values = np.array([pair_to_complex(m["value"]) for m in d["modes"]], dtype=complex)
    return VshCoefficients(ms, values)


# ---------------------------------------------------------------------------
# Chambers

def chamber_to_dict(ch) -> dict:
    return {
        "format": "chamber/1",
        "n_probes": ch.n_probes,
        "n_paths": ch.n_paths,
        "sigma_rho": ch.sigma_rho,
        "seed": ch.seed,
        "rho": matrix_to_pairs(ch.rho),
        "theta": np.asarray(ch.theta).tolist(),
        "phi": np.asarray(ch.phi).tolist(),
        "alpha": np.asarray(ch.alpha).tolist(),
    }


def chamber_from_dict(d: dict):
    from .chamber import ChamberModel

    if d.get("format") != "chamber/1":
        raise ConfigError(f"not a chamber document: format={d.get('format')!r}")
    return ChamberModel(
        n_probes=int(d["n_probes"]),
        n_paths=int(d["n_paths"]),
        sigma_rho=float(d["sigma_rho"]),
        seed=int(d["seed"]),
        rho=pairs_to_matrix(d["rho"]),
        theta=np.array(d["theta"], dtype=float),
        phi=np.array(d["phi"], dtype=float),
        alpha=np.array(d["alpha"], dtype=float),
    )


def voltages_to_dict(named_voltages: dict[str, np.ndarray]) -> dict:
    return {
        "format": "probe-voltages/1",
        "antennas": [
            {"name": name, "voltages": [complex_to_pair(z) for z in vec]}
            for name, vec in named_voltages.items()
        ],
    }


def voltages_from_dict(d: dict) -> dict[str, np.ndarray]:
    if d.get("format") != "probe-voltages/1":
        raise ConfigError(f"not a voltage document: format={d.get('format')!r}")
    return {
        a["name"]: np.array([pair_to_complex(p) for p in a["voltages"]], dtype=complex)
        for a in d["antennas"]
    }


def calibration_to_dict(cal, extra: dict | None = None) -> dict:
    doc = {
        "format": "calibration/1",
        "mode_set": mode_set_to_dict(cal.mode_set),
        "coefficient_matrix": matrix_to_pairs(cal.coefficient_matrix),
        "voltage_matrix": matrix_to_pairs(cal.voltage_matrix),
    }
    if extra:
        doc.update(extra)
    return doc


def calibration_from_dict(d: dict):
    from .recon import CalibrationSet

    if d.get("format") != "calibration/1":
        raise ConfigError(f"not a calibration document: format={d.get('format')!r}")
    return CalibrationSet(
        coefficient_matrix=pairs_to_matrix(d["coefficient_matrix"]),
        voltage_matrix=pairs_to_matrix(d["voltage_matrix"]),
        mode_set=mode_set_from_dict(d["mode_set"]),
    )


# ---------------------------------------------------------------------------
# CSV grids

PATTERN_HEADER = ["theta", "phi", "E_theta_re", "E_theta_im", "E_phi_re", "E_phi_im", "mag"]


def write_pattern_csv(path, theta_mesh, phi_mesh, field_values) -> None:
    """Pattern samples, theta-major row order."""
    et = np.broadcast_to(field_values.e_theta, theta_mesh.shape)
    ep = np.broadcast_to(field_values.e_phi, theta_mesh.shape)
    mag = np.sqrt(np.abs(et) ** 2 + np.abs(ep) ** 2)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PATTERN_HEADER)
        for t, p, a, b, m in zip(
            theta_mesh.ravel(), phi_mesh.ravel(), et.ravel(), ep.ravel(), mag.ravel()
        ):
            writer.writerow(
                [repr(float(t)), repr(float(p)), repr(float(a.real)), repr(float(a.imag)),
                 repr(float(b.real)), repr(float(b.imag)), repr(float(m))]
            )


def read_pattern_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != PATTERN_HEADER:
            raise ConfigError(f"unexpected pattern header {header}")
        rows = [[float(c) for c in row] for row in reader]
    arr = np.array(rows)
    return {name: arr[:, i] for i, name in enumerate(PATTERN_HEADER)}


SWEEP_HEADER = [
    "theta0", "phi0", "rms_field_error",
    "radiation_resistance_error", "directivity_error", "status",
]


def write_sweep_csv(path, rows) -> None:
    """rows: iterables (theta0, phi0, rms, rr_err, d_err, status)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for t0, p0, rms, rr, dd, status in rows:
            writer.writerow(
                [repr(float(t0)), repr(float(p0)), repr(float(rms)),
                 repr(float(rr)), repr(float(dd)), status]
            )


def read_sweep_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SWEEP_HEADER:
            raise ConfigError(f"unexpected sweep header {header}")
        return [
            (float(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), r[5])
            for r in reader
        ]


# ---------------------------------------------------------------------------
# Experiment configuration

@dataclass
class ExperimentConfig:
    wavelength: float
    lambda_max: int
    parity: str
    multipole: str
    n_theta: int
    n_phi: int
    ref_length: float
    ref_current: float
    ref_orientations: list[tuple[float, float]] | None
    ref_count: int
    optimize_objective: str | None
    optimize_budget: int
    n_probes: int
    n_paths: int
    sigma_rho: float
    seeds: list[int]
    test_length: float
    test_theta0: float
    test_phi0: float
    test_current: float
    method: str
    normalization: dict | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.wavelength

    def mode_set(self) -> ModeSet:
        return build_mode_set(self.lambda_max, self.parity, self.multipole)


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing '{key}' in {where} section")
    return section[key]


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    wavelength = float(doc.get("wavelength", 1.0))
    if wavelength <= 0:
        raise ConfigError("wavelength must be positive")

    ms_sec = doc.get("mode_set", {})
    mode_set = mode_set_from_dict(
        {
            "lambda_max": ms_sec.get("lambda_max", 3),
            "parity": ms_sec.get("parity", "odd"),
            "multipole": ms_sec.get("multipole", "electric"),
        }
    )

    grid_sec = doc.get("grid", {})
    n_default = 4 * mode_set.lambda_max + 16
    n_theta = int(grid_sec.get("n_theta", n_default))
    n_phi = int(grid_sec.get("n_phi", n_default))

    ref_sec = doc.get("references", {})
    orientations = ref_sec.get("orientations")
    if orientations is not None:
        try:
            orientations = [(float(t), float(p)) for t, p in orientations]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad reference orientations: {exc}") from exc
    count = int(ref_sec.get("count", len(orientations) if orientations else mode_set.size))
    if orientations is not None and len(orientations) != count:
        raise ConfigError(
            f"references.count = {count} but {len(orientations)} orientations listed"
        )
    opt_sec = ref_sec.get("optimize")
    optimize_objective = None
    optimize_budget = 0
    if opt_sec:
        optimize_objective = opt_sec.get("objective", "cond-A")
        if optimize_objective not in ("cond-A", "capacity"):
            raise ConfigError(f"unknown optimize objective {optimize_objective!r}")
        optimize_budget = int(opt_sec.get("budget", 1000))

    ch_sec = doc.get("chamber", {})
    n_probes = int(ch_sec.get("n_probes", mode_set.size))
    n_paths = int(ch_sec.get("n_paths", mode_set.size))
    sigma_rho = float(ch_sec.get("sigma_rho", 0.001))
    if "seeds" in ch_sec:
        seeds = [int(s) for s in ch_sec["seeds"]]
    elif "seed" in ch_sec:
        seeds = [int(ch_sec["seed"])]
    else:
        seeds = [0]
    if not seeds:
        raise ConfigError("chamber.seeds must not be empty")
    if n_probes < mode_set.size or n_paths < mode_set.size:
        raise ConfigError(
            f"chamber needs at least {mode_set.size} probes and paths for this "
            f"mode set, got n_probes={n_probes}, n_paths={n_paths}"
        )
    if count < mode_set.size:
        raise ConfigError(
            f"{count} reference antennas cannot span {mode_set.size} modes"
        )

    test_sec = doc.get("test_antenna", {})
    rec_sec = doc.get("reconstruction", {})
    method = rec_sec.get("method", "inverse")
    if method not in ("inverse", "direct-weights", "lse"):
        raise ConfigError(f"unknown reconstruction method {method!r}")
    normalization = rec_sec.get("normalization")
    if normalization is not None:
        if normalization.get("mode") not in ("unit-weight", "radiation-resistance"):
            raise ConfigError(f"unknown normalization {normalization!r}")
        if method == "inverse" and normalization["mode"] == "unit-weight":
            raise ConfigError("unit-weight normalization needs a weight-based method")

    return ExperimentConfig(
        wavelength=wavelength,
        lambda_max=mode_set.lambda_max,
        parity=mode_set.parity,
        multipole=mode_set.multipole,
        n_theta=n_theta,
        n_phi=n_phi,
        ref_length=float(ref_sec.get("length", 0.5)),
        ref_current=float(ref_sec.get("current", 1.0)),
        ref_orientations=orientations,
        ref_count=count,
        optimize_objective=optimize_objective,
        optimize_budget=optimize_budget,
        n_probes=n_probes,
        n_paths=n_paths,
        sigma_rho=sigma_rho,
        seeds=seeds,
        test_length=float(test_sec.get("length", 0.5)),
        test_theta0=float(test_sec.get("theta0", 0.0)),
        test_phi0=float(test_sec.get("phi0", 0.0)),
        test_current=float(test_sec.get("current", 1.0)),
        method=method,
        normalization=normalization,
        raw=doc,
    )


def load_config(path) -> ExperimentConfig:
    try:
        doc = read_json(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)

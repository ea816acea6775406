"""Command-line driver and experiment orchestration.

Subcommands: decompose | simulate | calibrate | reconstruct | sweep | plan
| optimize. Every experiment is reproducible from its config file: chamber
seeds, reference orientations, and the optimizer are all deterministic, so
two runs produce identical outputs apart from the report timestamp.

Exit codes: 0 success, 2 configuration error, 3 numerical/conditioning
error.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import chamber as chamber_mod
from . import dipole, farfield, fileio, planner, recon
from .fileio import ConfigError, ExperimentConfig

REPORT_FORMAT = "report/1"


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _summary_dict(s: farfield.RadiationSummary) -> dict:
    return {
        "power_w": s.power,
        "radiation_resistance_ohm": s.radiation_resistance,
        "directivity": s.directivity,
        "directivity_db": s.directivity_db,
        "current_a": s.current,
    }


@dataclass
class MeasurementSetup:
    """Everything the reconstruction pipeline derives from a config."""

    config: ExperimentConfig
    mode_set: object
    grid: farfield.SphereGrid
    orientations: list[tuple[float, float]]
    references: list[dipole.DipoleSpec]
    reference_coeffs: list
    calibration: recon.CalibrationSet
    chamber: chamber_mod.ChamberModel
    cond_v_selected: float


def build_setup(cfg: ExperimentConfig) -> MeasurementSetup:
    """References (optionally orientation-optimized), chamber selection,
    and calibration, all deterministic given the config."""
    mode_set = cfg.mode_set()
    grid = farfield.SphereGrid(cfg.n_theta, cfg.n_phi)
    k = cfg.k

    orientations = cfg.ref_orientations or planner.fibonacci_orientations(cfg.ref_count)
    if cfg.optimize_objective is not None and cfg.optimize_budget > 0:
        result = planner.optimize_reference_orientations(
            orientations,
            objective=cfg.optimize_objective,
            budget=cfg.optimize_budget,
            mode_set=mode_set,
            length=cfg.ref_length,
        )
        orientations = result.orientations

    references = dipole.reference_dipole_set(orientations, cfg.ref_length, cfg.ref_current)
    ref_fields = [spec.field(k) for spec in references]
    ref_coeffs = [farfield.decompose(f, mode_set, grid) for f in ref_fields]

    def voltage_matrix(ch):
        return np.column_stack([chamber_mod.probe_voltages(ch, f) for f in ref_fields])

    selected, cond_v = chamber_mod.select_chamber(
        cfg.seeds, voltage_matrix, cfg.n_probes, cfg.n_paths, cfg.sigma_rho
    )
    calibration = recon.calibrate(ref_coeffs, chamber=selected, fields=ref_fields)
    return MeasurementSetup(
        config=cfg,
        mode_set=mode_set,
        grid=grid,
        orientations=orientations,
        references=references,
        reference_coeffs=ref_coeffs,
        calibration=calibration,
        chamber=selected,
        cond_v_selected=cond_v,
    )


def _reconstruct_voltages(setup: MeasurementSetup, voltages: np.ndarray) -> recon.ReconstructionResult:
    cfg = setup.config
    if cfg.method == "inverse":
        channel = recon.channel_from_calibration(setup.calibration)
        result = recon.reconstruct_inverse(channel, voltages)
        result.diagnostics["cond_A"] = float(np.linalg.cond(setup.calibration.coefficient_matrix))
    elif cfg.method == "direct-weights":
        result = recon.reconstruct_weights_direct(setup.calibration, voltages)
    else:
        result = recon.reconstruct_lse(setup.calibration, voltages)
    if cfg.normalization is not None:
        norm = cfg.normalization
        result = recon.apply_normalization(
            result,
            norm["mode"],
            k=cfg.k,
            current=cfg.test_current,
            r_meas=norm.get("r_meas"),
            r_loss=norm.get("r_loss", 0.0),
        )
    return result


def _reconstruct_test(setup: MeasurementSetup, test: dipole.DipoleSpec):
    """Reconstruct one test antenna; returns (result, metrics, summaries)."""
    cfg = setup.config
    k = cfg.k
    field = test.field(k)
    voltages = chamber_mod.probe_voltages(setup.chamber, field)
    result = _reconstruct_voltages(setup, voltages)

    theory = farfield.field_radiation_summary(field, setup.grid, k, test.resolved_current)
    reconstructed = farfield.radiation_summary(result.coefficients, k, test.resolved_current)

    exact = field(setup.grid.theta_mesh, setup.grid.phi_mesh)
    synth = farfield.synthesize_on_grid(result.coefficients, setup.grid)
    rms = farfield.rms_field_error(exact.magnitude(), synth.magnitude())
    return result, rms, theory, reconstructed, exact, synth


def _condition_numbers(setup: MeasurementSetup) -> dict:
    cal = setup.calibration
    out = {
        "a_matrix": float(np.linalg.cond(cal.coefficient_matrix)),
        "v_matrix": float(np.linalg.cond(cal.voltage_matrix)),
    }
    if cal.coefficient_matrix.shape[0] == cal.coefficient_matrix.shape[1]:
        out["channel"] = recon.channel_from_calibration(cal).cond
    return out


# ---------------------------------------------------------------------------
# Subcommands

def cmd_decompose(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    mode_set = cfg.mode_set()
    grid = farfield.SphereGrid(cfg.n_theta, cfg.n_phi)
    k = cfg.k
    test = dipole.DipoleSpec(cfg.test_length, cfg.test_theta0, cfg.test_phi0, cfg.test_current)
    coeffs = farfield.decompose(test.field(k), mode_set, grid, check_convergence=True)
    fileio.write_json(out_dir / "coefficients.json", fileio.coefficients_to_dict(coeffs))

    # Spectrum normalized to the axis-aligned twin of the same antenna.
    upright = dipole.DipoleSpec(cfg.test_length, 0.0, 0.0, cfg.test_current)
    ref_peak = float(
        np.max(np.abs(farfield.decompose(upright.field(k), mode_set, grid).values))
    )
    with open(out_dir / "spectrum.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "l", "m", "magnitude", "normalized"])
        for entry, value in zip(mode_set.entries, coeffs.values):
            mag = abs(value)
            writer.writerow(
                [entry.family, entry.l, entry.m, repr(float(mag)), repr(float(mag / ref_peak))]
            )

    summary = farfield.radiation_summary(coeffs, k, test.resolved_current)
    print(f"decomposed {mode_set.size} modes; wrote {out_dir / 'coefficients.json'}")
    print(
        f"radiation resistance {summary.radiation_resistance:.3f} ohm, "
        f"directivity {summary.directivity:.4f} ({summary.directivity_db:.3f} dB)"
    )
    return 0


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    setup = build_setup(cfg)
    k = cfg.k
    fileio.write_json(out_dir / "chamber.json", fileio.chamber_to_dict(setup.chamber))
    named = {
        f"reference_{i:02d}": chamber_mod.probe_voltages(setup.chamber, spec.field(k))
        for i, spec in enumerate(setup.references)
    }
    test = dipole.DipoleSpec(cfg.test_length, cfg.test_theta0, cfg.test_phi0, cfg.test_current)
    named["test"] = chamber_mod.probe_voltages(setup.chamber, test.field(k))
    fileio.write_json(out_dir / "voltages.json", fileio.voltages_to_dict(named))
    print(
        f"chamber seed {setup.chamber.seed} (cond V = {setup.cond_v_selected:.4g}); "
        f"wrote chamber.json and voltages.json to {out_dir}"
    )
    return 0


def cmd_calibrate(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    setup = build_setup(cfg)
    conds = _condition_numbers(setup)
    doc = fileio.calibration_to_dict(
        setup.calibration,
        extra={
            "chamber_seed": setup.chamber.seed,
            "condition_numbers": conds,
            "reference_orientations": [[t, p] for t, p in setup.orientations],
        },
    )
    fileio.write_json(out_dir / "calibration.json", doc)
    print(
        "calibration written; cond(A_R) = {a_matrix:.4g}, cond(V_R) = {v_matrix:.4g}".format(
            **conds
        )
    )
    return 0


def cmd_reconstruct(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    setup = build_setup(cfg)
    test = dipole.DipoleSpec(cfg.test_length, cfg.test_theta0, cfg.test_phi0, cfg.test_current)
    result, rms, theory, reconstructed, exact, synth = _reconstruct_test(setup, test)

    fileio.write_pattern_csv(
        out_dir / "pattern_theory.csv", setup.grid.theta_mesh, setup.grid.phi_mesh, exact
    )
    fileio.write_pattern_csv(
        out_dir / "pattern_reconstructed.csv", setup.grid.theta_mesh, setup.grid.phi_mesh, synth
    )
    fileio.write_json(
        out_dir / "coefficients_reconstructed.json",
        fileio.coefficients_to_dict(result.coefficients),
    )

    report = {
        "format": REPORT_FORMAT,
        "timestamp": _timestamp(),
        "method": result.method,
        "normalization": cfg.normalization,
        "seeds": {"candidates": cfg.seeds, "chamber_selected": setup.chamber.seed},
        "reference_orientations": [[t, p] for t, p in setup.orientations],
        "test_antenna": {
            "length": cfg.test_length,
            "theta0": cfg.test_theta0,
            "phi0": cfg.test_phi0,
            "current": cfg.test_current,
        },
        "condition_numbers": _condition_numbers(setup),
        "diagnostics": result.diagnostics,
        "theory": _summary_dict(theory),
        "reconstruction": _summary_dict(reconstructed),
        "rms_field_error": rms,
    }
    fileio.write_json(out_dir / "report.json", report)
    print(
        f"rms field error {rms:.3e}; "
        f"R_r {reconstructed.radiation_resistance:.3f} ohm "
        f"(theory {theory.radiation_resistance:.3f}); "
        f"D {reconstructed.directivity:.4f} (theory {theory.directivity:.4f})"
    )
    print(f"report written to {out_dir / 'report.json'}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    step = float(args.step)
    if args.degrees:
        step = math.radians(step)
    if step <= 0 or step > math.pi:
        raise ConfigError(f"sweep step {step} rad is out of range")
    setup = build_setup(cfg)
    k = cfg.k

    n_theta = int(round(math.pi / step)) + 1
    n_phi = int(round(2.0 * math.pi / step))
    if n_theta < 2 or n_phi < 1:
        raise ConfigError("sweep grid is empty")
    theta0s = np.linspace(0.0, math.pi, n_theta)
    phi0s = np.arange(n_phi) * (2.0 * math.pi / n_phi)

    # Theory resistance/directivity of an identical dipole are orientation
    # invariant, so evaluate them once from the closed-form field.
    probe = dipole.DipoleSpec(cfg.test_length, 0.0, 0.0, cfg.test_current)
    theory = farfield.field_radiation_summary(probe.field(k), setup.grid, k, cfg.test_current)

    rows = []
    for t0 in theta0s:
        for p0 in phi0s:
            spec = dipole.DipoleSpec(cfg.test_length, float(t0), float(p0), cfg.test_current)
            try:
                field = spec.field(k)
                voltages = chamber_mod.probe_voltages(setup.chamber, field)
                result = _reconstruct_voltages(setup, voltages)
                summary = farfield.radiation_summary(result.coefficients, k, cfg.test_current)
                exact = field(setup.grid.theta_mesh, setup.grid.phi_mesh)
                synth = farfield.synthesize_on_grid(result.coefficients, setup.grid)
                rms = farfield.rms_field_error(exact.magnitude(), synth.magnitude())
                rows.append(
                    (
                        float(t0),
                        float(p0),
                        rms,
                        summary.radiation_resistance - theory.radiation_resistance,
                        summary.directivity - theory.directivity,
                        "ok",
                    )
                )
            except (recon.IllConditionedError, np.linalg.LinAlgError, ValueError) as exc:
                rows.append((float(t0), float(p0), math.nan, math.nan, math.nan, f"error:{exc}"))

    fileio.write_sweep_csv(out_dir / "sweep.csv", rows)
    meta = {
        "format": "sweep-meta/1",
        "step_rad": step,
        "grid_shape": [n_theta, n_phi],
        "reference_orientations": [[t, p] for t, p in setup.orientations],
        "chamber_seed": setup.chamber.seed,
        "condition_numbers": _condition_numbers(setup),
        "theory": _summary_dict(theory),
    }
    fileio.write_json(out_dir / "sweep_meta.json", meta)
    failed = sum(1 for r in rows if r[5] != "ok")
    print(f"swept {len(rows)} orientations ({failed} failed); wrote {out_dir / 'sweep.csv'}")
    return 0


def cmd_plan(args) -> int:
    budget = planner.plan_modes(args.kr, p_tr=args.p_tr, p_r=args.p_r)
    print(f"rule: {budget.rule}")
    print(f"truncation order: {budget.lambda_max}")
    print(f"mode count (both multipole families): {budget.n_modes}")
    if args.p_tr is not None:
        simple = planner.plan_modes(args.kr)
        print(f"simple-ceiling comparison: order {simple.lambda_max}, {simple.n_modes} modes")
    return 0


def cmd_optimize(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    mode_set = cfg.mode_set()
    orientations = cfg.ref_orientations or planner.fibonacci_orientations(cfg.ref_count)
    objective = cfg.optimize_objective or "cond-A"
    budget = args.budget if args.budget is not None else (cfg.optimize_budget or 1000)
    result = planner.optimize_reference_orientations(
        orientations,
        objective=objective,
        budget=budget,
        mode_set=mode_set,
        length=cfg.ref_length,
    )
    fileio.write_json(
        out_dir / "orientations.json",
        {
            "format": "orientations/1",
            "objective": objective,
            "objective_value": result.objective_value,
            "orientations": [[t, p] for t, p in result.orientations],
        },
    )
    with open(out_dir / "optimize_trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["evaluations", "objective"])
        for evals, value in result.trace:
            writer.writerow([evals, repr(float(value))])
    print(f"{objective} improved to {result.objective_value:.4g} after {budget} evaluations")
    return 0


# ---------------------------------------------------------------------------
# Entry point

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override chamber seed")
    parser.add_argument(
        "--degrees", action="store_true", help="interpret angle flags in degrees"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multipat",
        description="Antenna pattern reconstruction from multipath probe voltages",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("decompose", "simulate", "calibrate", "reconstruct", "optimize"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "optimize":
            p.add_argument("--budget", type=int, default=None, help="objective evaluations")

    p = sub.add_parser("sweep")
    _add_common(p)
    p.add_argument(
        "--step",
        type=float,
        default=math.radians(10.0),
        help="orientation grid step (radians unless --degrees)",
    )

    p = sub.add_parser("plan")
    p.add_argument("--kr", type=float, required=True, help="wavenumber times enclosing radius")
    p.add_argument("--p-tr", dest="p_tr", type=float, default=None, help="truncated power, dB")
    p.add_argument("--p-r", dest="p_r", type=float, default=0.0, help="source relative power, dB")
    return parser


_COMMANDS = {
    "decompose": cmd_decompose,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plan":
            return cmd_plan(args)
        cfg = fileio.load_config(args.config)
        if args.seed is not None:
            cfg.seeds = [args.seed]
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (recon.IllConditionedError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

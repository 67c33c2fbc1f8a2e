"""Batch front-end: analyze systems from JSON files and emit certificates.

Every command reads JSON descriptions, runs one analysis and prints a
JSON document to stdout (numeric fields at 9 significant digits, so a
rerun with the same seed is byte-identical up to the timestamp field).
Exit codes: 0 certified or success, 1 inconclusive, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .certificates import (
    BoundedAngle,
    StabilityCertificate,
    Verdict,
    certificate_to_dict,
    cyclic_small_angle,
)
from .lti_systems import (
    FrequencyGrid,
    LtiSystem,
    SectorBound,
    frequencywise_angle,
    hinf_singular_angle,
    hinf_small_angle_check,
    is_stable,
    load_system_json,
    lti_small_angle_check,
    lure_cone_check,
    write_sweep_csv,
)
from .matrix_angle import (
    AngleSolverOptions,
    certified_angle_upper_bound,
    load_matrix_json,
    matrix_singular_angle,
    normalized_numerical_range,
    write_wn_csv,
)
from .multipliers import MultiplierOperator
from .nonlinear_estimation import (
    FeedbackConvergenceError,
    LtiSurrogate,
    StaticNonlinearity,
    estimate_generalized_angle,
    estimate_incremental_angle,
    estimate_l2e_angle,
    estimate_singular_angle,
    load_operator_json,
    make_probes,
    sector_angle_bound,
)
from .signal_core import DiscreteSignal

__all__ = ["run", "main", "AnalysisConfig"]

EXIT_CERTIFIED = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


@dataclass
class AnalysisConfig:
    """Resolved options of one CLI invocation; the seed is always set."""

    command: str
    inputs: list = field(default_factory=list)
    seed: int = 42
    tol: float = 1e-9
    margin: float = 0.0
    grid: FrequencyGrid | None = None
    probe_count: int = 32
    probe_t_max: float = 10.0
    probe_h: float = 0.01
    csv_out: str | None = None


def _round9(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return float(f"{obj:.9g}")
    if isinstance(obj, (np.floating, np.integer)):
        return _round9(obj.item())
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _emit(doc: dict) -> None:
    doc = _round9(doc)
    doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    print(json.dumps(doc, sort_keys=True, indent=2))


def _emit_certificate(cert: StabilityCertificate) -> int:
    _emit(certificate_to_dict(cert))
    return EXIT_CERTIFIED if cert.certified else EXIT_INCONCLUSIVE


def _parse_grid(spec: str | None) -> FrequencyGrid:
    if spec is None:
        return FrequencyGrid.default()
    try:
        wmin, wmax, count = spec.split(":")
        return FrequencyGrid.default(count=int(count), wmin=float(wmin), wmax=float(wmax))
    except ValueError as exc:
        raise ValueError(f"grid spec must be 'wmin:wmax:count', got {spec!r}") from exc


def _parse_sector(spec: str) -> SectorBound:
    try:
        a, b = (float(x) for x in spec.split(","))
    except ValueError as exc:
        raise ValueError(f"sector spec must be 'a,b', got {spec!r}") from exc
    return SectorBound(a, b)


def _load_stable_system(path) -> LtiSystem:
    system = load_system_json(path)
    if not is_stable(system):
        raise ValueError(f"system in {path} is unstable "
                         "(poles touch the closed right half-plane)")
    return system


# --------------------------------------------------------------------------
# subcommands

def _cmd_matrix_angle(cfg: AnalysisConfig) -> int:
    A = load_matrix_json(cfg.inputs[0])
    opts = AngleSolverOptions(seed=cfg.seed, tol=cfg.tol)
    result = matrix_singular_angle(A, opts)
    upper = certified_angle_upper_bound(A)
    _emit({
        "angle_rad": result.angle.value,
        "angle_deg": result.angle.degrees,
        "cos_value": result.cos_value,
        "certified_upper_rad": upper.value,
        "bound_direction": "lower_bound_on_theta",
        "converged": result.converged,
        "method": result.method,
        "seed": result.seed,
        "witness": [[z.real, z.imag] for z in result.witness],
    })
    return EXIT_CERTIFIED


def _cmd_wn_boundary(cfg: AnalysisConfig, count: int) -> int:
    A = load_matrix_json(cfg.inputs[0])
    samples = normalized_numerical_range(A, count=count, seed=cfg.seed)
    if cfg.csv_out:
        write_wn_csv(cfg.csv_out, samples)
    points = np.array([s.point for s in samples])
    _emit({
        "sample_count": len(samples),
        "min_re": float(points.real.min()),
        "max_abs": float(np.abs(points).max()),
        "angle_from_samples_rad": float(np.arccos(np.clip(points.real.min(), -1, 1))),
        "seed": cfg.seed,
        "csv_out": cfg.csv_out,
    })
    return EXIT_CERTIFIED


def _cmd_lti_angle(cfg: AnalysisConfig) -> int:
    system = _load_stable_system(cfg.inputs[0])
    grid = cfg.grid or FrequencyGrid.default()
    opts = AngleSolverOptions(seed=cfg.seed)
    result = hinf_singular_angle(system, grid, opts)
    if cfg.csv_out:
        rows = [(w, frequencywise_angle(system, w, opts).value) for w in grid.points]
        write_sweep_csv(cfg.csv_out, rows)
    _emit({
        "angle_rad": result.angle.value,
        "cos_theta_inf": result.cos_value,
        "argmax_omega": result.argmax_omega,
        "seed": cfg.seed,
        "csv_out": cfg.csv_out,
    })
    return EXIT_CERTIFIED


def _cmd_feedback_check(cfg: AnalysisConfig, method: str) -> int:
    P = _load_stable_system(cfg.inputs[0])
    C = _load_stable_system(cfg.inputs[1])
    grid = cfg.grid or FrequencyGrid.default()
    opts = AngleSolverOptions(seed=cfg.seed)
    if method == "cor3":
        cert = hinf_small_angle_check(P, C, grid, margin=cfg.margin, opts=opts)
    else:
        cert = lti_small_angle_check(P, C, grid, margin=cfg.margin, opts=opts)
    return _emit_certificate(cert)


def _operator_upper_bound(path, cfg: AnalysisConfig) -> tuple[BoundedAngle, dict]:
    """Upper-bound angle for a cyclic operand, with a note on its basis."""
    with open(path) as fh:
        data = json.load(fh)
    if "kind" not in data:
        data = {"kind": "lti", "system": data, "sample_period": cfg.probe_h}
    op = None
    if data["kind"] == "static":
        op = load_operator_json_dict_static(data)
        if op.sector is None:
            raise ValueError(f"{path}: static operator needs a 'sector' for an "
                             "analytic angle bound")
        bound = sector_angle_bound(op.sector)
        return BoundedAngle.analytic(bound), {"basis": "sector", "sector": [op.sector.a, op.sector.b]}
    if data["kind"] == "lti":
        from .lti_systems import system_from_json_dict
        system = system_from_json_dict(data["system"])
        if not is_stable(system):
            raise ValueError(f"{path}: unstable system")
        grid = cfg.grid or FrequencyGrid.default()
        res = hinf_singular_angle(system, grid, AngleSolverOptions(seed=cfg.seed))
        theta_inf = res.angle.value
        if system.is_siso:
            bound = theta_inf if theta_inf > math.pi / 2 else math.pi / 2
            return (BoundedAngle.certified(bound),
                    {"basis": "siso-frequency-sup", "theta_inf_rad": theta_inf,
                     "coverage": "grid"})
        if theta_inf <= math.pi / 2:
            return (BoundedAngle.certified(math.pi / 2),
                    {"basis": "mimo-passivity", "theta_inf_rad": theta_inf,
                     "coverage": "grid"})
        raise ValueError(f"{path}: no sound time-domain angle bound is available for a "
                         "MIMO system whose frequency-domain angle exceeds pi/2")
    raise ValueError(f"{path}: cyclic operands must be static-with-sector or LTI, "
                     f"got kind {data['kind']!r}")


def load_operator_json_dict_static(data) -> StaticNonlinearity:
    from .nonlinear_estimation import operator_from_json_dict
    op = operator_from_json_dict(data)
    assert isinstance(op, StaticNonlinearity)
    return op


def _cmd_cyclic_check(cfg: AnalysisConfig) -> int:
    bounds = []
    notes = []
    for path in cfg.inputs:
        bound, note = _operator_upper_bound(path, cfg)
        bounds.append(bound)
        notes.append(note)
    cert = cyclic_small_angle(bounds)
    doc = certificate_to_dict(cert)
    doc["witnesses"]["operands"] = notes
    _emit(doc)
    return EXIT_CERTIFIED if cert.certified else EXIT_INCONCLUSIVE


def _cmd_lure_check(cfg: AnalysisConfig, sector: SectorBound) -> int:
    P = _load_stable_system(cfg.inputs[0])
    grid = cfg.grid or FrequencyGrid.default()
    cert = lure_cone_check(P, sector, grid, margin=cfg.margin)
    return _emit_certificate(cert)


def _truncation_times(cfg: AnalysisConfig) -> list:
    times = list(np.geomspace(cfg.probe_t_max / 16, cfg.probe_t_max, 8))
    times.append(2.0 * cfg.probe_t_max)  # beyond every probe's support
    return times


def _cmd_estimate_angle(cfg: AnalysisConfig, flavor: str, m1_path, m2_path) -> int:
    op = load_operator_json(cfg.inputs[0])
    probes = make_probes(cfg.probe_count, dim=op.dim, sample_period=cfg.probe_h,
                         t_max=cfg.probe_t_max, seed=cfg.seed)
    if flavor == "std":
        est = estimate_singular_angle(op, probes, seed=cfg.seed)
    elif flavor == "l2e":
        est = estimate_l2e_angle(op, probes, _truncation_times(cfg), seed=cfg.seed)
    elif flavor == "incremental":
        zero = DiscreteSignal(np.zeros((1, op.dim)), cfg.probe_h)
        pairs = list(zip(probes, probes[1:])) + [(u, zero) for u in probes]
        est = estimate_incremental_angle(op, pairs, seed=cfg.seed)
    elif flavor == "generalized":
        m1 = (MultiplierOperator(_load_stable_system(m1_path))
              if m1_path else MultiplierOperator.identity(op.dim))
        m2 = (MultiplierOperator(_load_stable_system(m2_path))
              if m2_path else MultiplierOperator.identity(op.dim))
        est = estimate_generalized_angle(op, m1, m2, probes, seed=cfg.seed)
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    _emit({
        "angle_rad": est.angle.value,
        "cos_value": est.cos_value,
        "bound_direction": est.bound_direction,
        "flavor": est.flavor,
        "witness_probe": est.witness_probe,
        "probe_count": est.probe_count,
        "seed": est.seed,
    })
    return EXIT_CERTIFIED


def _cmd_secant_check(cfg: AnalysisConfig, gains_spec: str | None) -> int:
    from .nonlinear_estimation import secant_condition_check
    gains = []
    notes = []
    if gains_spec:
        gains = [float(g) for g in gains_spec.split(",")]
        notes.append({"basis": "explicit-gains"})
    else:
        for path in cfg.inputs:
            op = load_operator_json(path)
            if not isinstance(op, StaticNonlinearity) or op.sector is None:
                raise ValueError(
                    f"{path}: secant certification needs an upper bound on the secant "
                    "gain; provide a static operator with a sector (bound a+b) or "
                    "pass explicit --gains")
            gains.append(op.sector.a + op.sector.b)
            notes.append({"basis": "sector", "sector": [op.sector.a, op.sector.b]})
    cert = secant_condition_check(gains, margin=cfg.margin)
    doc = certificate_to_dict(cert)
    doc["witnesses"]["operands"] = notes
    _emit(doc)
    return EXIT_CERTIFIED if cert.certified else EXIT_INCONCLUSIVE


# --------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="angleguard",
        description="Singular-angle analysis and small-angle stability certificates.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    common.add_argument("--tol", type=float, default=1e-9, help="solver tolerance")
    common.add_argument("--margin", type=float, default=0.0,
                        help="extra angular margin demanded beyond the strict threshold")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix-angle", parents=[common],
                       help="singular angle of a complex matrix")
    p.add_argument("matrix", help="matrix JSON file")

    p = sub.add_parser("wn-boundary", parents=[common],
                       help="normalized numerical range samples")
    p.add_argument("matrix", help="matrix JSON file")
    p.add_argument("--count", type=int, default=2000)
    p.add_argument("--csv-out", help="write samples as CSV (re, im)")

    p = sub.add_parser("lti-angle", parents=[common],
                       help="largest frequency-domain angle of a system")
    p.add_argument("system", help="system JSON file")
    p.add_argument("--grid", help="frequency grid as wmin:wmax:count")
    p.add_argument("--csv-out", help="write the angle sweep as CSV")

    p = sub.add_parser("feedback-check", parents=[common],
                       help="two-block loop certificate")
    p.add_argument("plant", help="plant system JSON")
    p.add_argument("controller", help="controller system JSON")
    p.add_argument("--method", choices=["thm3", "cor3"], default="thm3")
    p.add_argument("--grid", help="frequency grid as wmin:wmax:count")

    p = sub.add_parser("cyclic-check", parents=[common],
                       help="cyclic loop certificate from angle bounds")
    p.add_argument("operands", nargs="+", help="operator/system JSON files")
    p.add_argument("--grid", help="frequency grid as wmin:wmax:count")

    p = sub.add_parser("lure-check", parents=[common],
                       help="sector cone certificate for a SISO plant")
    p.add_argument("plant", help="plant system JSON")
    p.add_argument("--sector", required=True, help="sector slopes as a,b")
    p.add_argument("--grid", help="frequency grid as wmin:wmax:count")

    p = sub.add_parser("estimate-angle", parents=[common],
                       help="probe-based operator angle estimate")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--flavor", choices=["std", "l2e", "incremental", "generalized"],
                   default="std")
    p.add_argument("--probes", type=int, default=32)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--h", type=float, default=0.01, help="probe sample period")
    p.add_argument("--m1", help="first multiplier system JSON (generalized flavor)")
    p.add_argument("--m2", help="second multiplier system JSON (generalized flavor)")

    p = sub.add_parser("secant-check", parents=[common],
                       help="cyclic secant-gain certificate")
    p.add_argument("operands", nargs="*", help="static operator JSONs with sectors")
    p.add_argument("--gains", help="explicit comma-separated secant gain upper bounds")
    return parser


def run(argv) -> int:
    """Entry point: parse arguments, run one analysis, return the exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code not in (0, None) else 0

    cfg = AnalysisConfig(command=ns.command, seed=ns.seed, tol=ns.tol, margin=ns.margin)
    try:
        if getattr(ns, "grid", None):
            cfg.grid = _parse_grid(ns.grid)
        if ns.command == "matrix-angle":
            cfg.inputs = [ns.matrix]
            return _cmd_matrix_angle(cfg)
        if ns.command == "wn-boundary":
            cfg.inputs = [ns.matrix]
            cfg.csv_out = ns.csv_out
            return _cmd_wn_boundary(cfg, ns.count)
        if ns.command == "lti-angle":
            cfg.inputs = [ns.system]
            cfg.csv_out = ns.csv_out
            return _cmd_lti_angle(cfg)
        if ns.command == "feedback-check":
            cfg.inputs = [ns.plant, ns.controller]
            return _cmd_feedback_check(cfg, ns.method)
        if ns.command == "cyclic-check":
            cfg.inputs = list(ns.operands)
            return _cmd_cyclic_check(cfg)
        if ns.command == "lure-check":
            cfg.inputs = [ns.plant]
            return _cmd_lure_check(cfg, _parse_sector(ns.sector))
        if ns.command == "estimate-angle":
            cfg.inputs = [ns.operator]
            cfg.probe_count = ns.probes
            cfg.probe_t_max = ns.t_max
            cfg.probe_h = ns.h
            return _cmd_estimate_angle(cfg, ns.flavor, ns.m1, ns.m2)
        if ns.command == "secant-check":
            cfg.inputs = list(ns.operands)
            return _cmd_secant_check(cfg, ns.gains)
        raise ValueError(f"unknown command {ns.command!r}")
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (FeedbackConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

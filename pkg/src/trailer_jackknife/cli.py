"""Command-line front end: ``trailer-jackknife <verb> --config FILE``."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import analysis as an
from .config import (ConfigError, build_params, build_scenario, build_slip, load_config)
from .errors import DomainError, InconclusiveError, NumericError
from .estimation import (MODES, predict_limits_from_sensors, read_sensor_csv,
                         stream_from_log, write_prediction_csv)
from .kinematics import SideslipState, VehicleTrailerParams
from .oracle import OracleConfig, cross_check, random_configuration
from .simulator import run_scenario

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _deg(x: Optional[float]) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{math.degrees(x):.6f}"


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _require_config(args):
    if not args.config:
        raise ConfigError(f"{args.verb} needs --config")
    return load_config(args.config)


def _v_sign(raw) -> float:
    v = raw.get("run", {}).get("v", -1.0)
    return 1.0 if v > 0 else -1.0


def cmd_limits(args) -> int:
    raw = _require_config(args)
    p, slip = build_params(raw), build_slip(raw)
    v_sign = _v_sign(raw)
    rmap = an.region_map(p, slip)
    kmin, kmax = p.curvature_limits(slip)
    print(f"category: {rmap.category.value}")
    print(f"subcase: {rmap.subcase}")
    print(f"curvature limits: [{kmin:.6g}, {kmax:.6g}] 1/m")
    rows = []
    for lim in rmap.limits:
        if lim.exists:
            safety = an.classify_limit_safety(lim, v_sign, p, slip, rmap).value
            print(f"  {lim.kind.value:16s} {math.degrees(lim.psi):10.4f} deg  {safety}"
                  f"{'' if lim.typical else '  (non-typical)'}")
        else:
            safety = ""
            print(f"  {lim.kind.value:16s} {'absent':>10s}")
        rows.append([lim.kind.value, int(lim.exists), _deg(lim.psi), safety, int(lim.typical)])
    if not rmap.limits.existing:
        print("no jackknife limit")
    poles = an.uncontrollable_hitch_angles(p, slip)
    print("uncontrollable hitch angles: "
          + ("none" if poles is None else ", ".join(f"{math.degrees(a):.4f} deg" for a in poles)))
    if rmap.extrema is not None:
        e = rmap.extrema
        print(f"critical curvature extrema: max {e.kappa_star_max:.6g} at {math.degrees(e.psi_at_max):.4f} deg,"
              f" min {e.kappa_star_min:.6g} at {math.degrees(e.psi_at_min):.4f} deg")
    if args.out:
        _write_rows(Path(args.out) / "limits.csv",
                    ["kind", "exists", "psi_deg", "safety", "typical"], rows)
    return EXIT_OK


def cmd_regions(args) -> int:
    raw = _require_config(args)
    p, slip = build_params(raw), build_slip(raw)
    rmap = an.region_map(p, slip)
    print(f"category: {rmap.category.value}  subcase: {rmap.subcase}")
    rows = []
    for label, arcs in (("non-jackknife", rmap.nonjackknife), ("jackknife", rmap.jackknife)):
        for arc in arcs:
            span = "whole circle" if arc.full else f"[{math.degrees(arc.lo):.4f}, {math.degrees(arc.hi):.4f}] deg"
            print(f"  {label:14s} {span}")
            rows.append([label, int(arc.full), "" if arc.full else _deg(arc.lo),
                         "" if arc.full else _deg(arc.hi)])
    if args.out:
        _write_rows(Path(args.out) / "regions.csv", ["region", "full", "lo_deg", "hi_deg"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    raw = _require_config(args)
    scenario = build_scenario(raw)
    log = run_scenario(scenario)
    out = Path(args.out or ".") / f"{scenario.name}.csv"
    log.write_csv(out)
    print(f"wrote {len(log)} rows to {out}")
    if log.error is not None:
        print(f"numeric failure at step {log.error.step}: {log.error}", file=sys.stderr)
        return EXIT_NUMERIC
    jk = np.nonzero(log["jackknife"] > 0)[0]
    if jk.size:
        print(f"first jackknife state at t = {log['t'][jk[0]]:.2f} s")
    print(f"final hitch angle {math.degrees(log['psi'][-1]):.4f} deg")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    raw = load_config(args.config) if args.config else {}
    section = raw.get("oracle", {})
    count = int(args.count if args.count is not None else section.get("count", 100))
    seed = args.seed if args.seed is not None else int(section.get("seed", 0))
    rng = np.random.default_rng(seed)
    cfg = OracleConfig()
    rows, bad = [], 0
    for i in range(count):
        p, slip = random_configuration(rng)
        try:
            res = cross_check(p, slip, cfg)
        except InconclusiveError as exc:
            print(f"config {i}: inconclusive ({exc})", file=sys.stderr)
            bad += 1
            continue
        ok = res.ok
        bad += not ok
        rows.append([i, res.subcase, f"{p.hitch_length:.6f}", f"{p.tongue_length:.6f}",
                     _deg(slip.beta_R), _deg(slip.beta_T), len(res.analytic), len(res.oracle),
                     f"{res.max_error:.3e}", res.safety_mismatches, res.region_mismatches, int(ok)])
    subcases = sorted({r[1] for r in rows})
    print(f"{count} configurations, seed {seed}: {count - bad} matched, {bad} mismatched")
    print("subcases covered: " + " ".join(subcases))
    if args.out:
        _write_rows(Path(args.out) / "oracle_check.csv",
                    ["index", "subcase", "L1", "L2", "beta_R_deg", "beta_T_deg", "n_analytic",
                     "n_oracle", "max_error_rad", "safety_mismatches", "region_mismatches", "ok"], rows)
    return EXIT_OK if bad == 0 else EXIT_NUMERIC


def parse_grid(text: str):
    """``lo:hi:n`` in degrees."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"grid must look like lo:hi:n, got {text!r}") from exc
    if n < 2 or not lo < hi or max(abs(lo), abs(hi)) >= 90.0:
        raise ConfigError("grid needs n >= 2 and -90 < lo < hi < 90")
    return np.radians(np.linspace(lo, hi, n))


def limit_grid(p: VehicleTrailerParams, beta_F: float, beta_R, beta_T,
               kind: an.LimitKind = an.LimitKind.PLUS_KMAX) -> np.ndarray:
    """One jackknife limit over a beta_R x beta_T grid; NaN where it does not exist."""
    out = np.full((len(beta_R), len(beta_T)), np.nan)
    for i, br in enumerate(beta_R):
        for j, bt in enumerate(beta_T):
            lim = an.jackknife_limits(p, SideslipState(beta_F, br, bt))[kind]
            if lim.exists:
                out[i, j] = lim.psi
    return out


def continuous_branch(values: np.ndarray) -> np.ndarray:
    """Shift wrapped angles onto one branch centred on the middle cell."""
    finite = values[~np.isnan(values)]
    if not finite.size:
        return values.copy()
    mid = values[values.shape[0] // 2, values.shape[1] // 2]
    ref = mid if not np.isnan(mid) else float(np.median(finite))
    d = values - ref
    return ref + (np.pi - np.mod(np.pi - d, 2.0 * np.pi))


def contour_flatness(beta_R, beta_T, values, levels) -> List[float]:
    """Max distance (rad of slip) of each level curve from the secant joining its ends."""
    out = []
    for level in levels:
        pts = []
        for i, br in enumerate(beta_R):
            row = values[i] - level
            for j in range(len(beta_T) - 1):
                a, b = row[j], row[j + 1]
                if np.isnan(a) or np.isnan(b) or a * b > 0 or a == b:
                    continue
                pts.append((br, beta_T[j] + (beta_T[j + 1] - beta_T[j]) * a / (a - b)))
                break
        if len(pts) < 3:
            out.append(math.nan)
            continue
        pts = np.array(pts)
        d = pts[-1] - pts[0]
        normal = np.array([-d[1], d[0]]) / np.hypot(*d)
        out.append(float(np.max(np.abs((pts - pts[0]) @ normal))))
    return out


def cmd_sweep(args) -> int:
    raw = _require_config(args)
    p = build_params(raw)
    section = raw.get("sweep", {})
    grid_text = args.grid or section.get("grid", "-60:60:25")
    betas = parse_grid(grid_text)
    beta_F = math.radians(float(raw.get("slip", {}).get("beta_F_deg", 0.0)))
    values = limit_grid(p, beta_F, betas, betas)
    rows = []
    for i, br in enumerate(betas):
        for j, bt in enumerate(betas):
            rows.append([f"{math.degrees(br):.6f}", f"{math.degrees(bt):.6f}", _deg(float(values[i, j]))])
    out = Path(args.out or ".")
    _write_rows(out / "sweep.csv", ["beta_R_deg", "beta_T_deg", "psi_plus_kmax_deg"], rows)
    branch = continuous_branch(values)
    finite = branch[~np.isnan(branch)]
    if finite.size:
        levels = np.quantile(finite, [0.2, 0.35, 0.5, 0.65, 0.8])
        flat = contour_flatness(betas, betas, branch, levels)
        _write_rows(out / "sweep_flatness.csv", ["level_deg", "max_secant_deviation_deg"],
                    [[_deg(float(l)), _deg(f)] for l, f in zip(levels, flat)])
        for l, f in zip(levels, flat):
            print(f"contour {math.degrees(l):9.4f} deg: max deviation from secant "
                  f"{'n/a' if math.isnan(f) else f'{math.degrees(f):.4f} deg'}")
    print(f"wrote {len(rows)} cells to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    raw = _require_config(args)
    section = raw.get("estimate", {})
    mode = args.mode or section.get("mode", "slip_partial")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    p = build_params(raw)
    if "sensor_csv" in section:
        source = Path(section["sensor_csv"])
        if not source.is_absolute():
            source = Path(args.config).parent / source
        stream = read_sensor_csv(source)
    else:
        scenario = build_scenario(raw)
        log = run_scenario(scenario)
        if log.error is not None:
            print(f"numeric failure at step {log.error.step}: {log.error}", file=sys.stderr)
            return EXIT_NUMERIC
        seed = args.seed if args.seed is not None else int(section.get("seed", 0))
        stream = stream_from_log(log, scenario.v, float(section.get("yaw_noise", 0.0)),
                                 np.random.default_rng(seed))
    prediction = predict_limits_from_sensors(stream, p, mode, int(section.get("window", 9)))
    out = Path(args.out or ".") / f"estimate_{mode}.csv"
    write_prediction_csv(prediction, out)
    for kind in an.LIMIT_KINDS:
        series = prediction[kind.value]
        if not np.all(np.isnan(series)):
            print(f"{kind.value}: final {_deg(float(series[-1]))} deg")
    print(f"wrote {len(stream)} rows to {out}")
    return EXIT_OK


COMMANDS = {
    "limits": cmd_limits,
    "regions": cmd_regions,
    "simulate": cmd_simulate,
    "oracle-check": cmd_oracle_check,
    "sweep": cmd_sweep,
    "estimate": cmd_estimate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trailer-jackknife",
                                 description="Jackknife limits for vehicle-trailer systems with sideslip.")
    ap.add_argument("verb", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="TOML scenario file (angles in degrees)")
    ap.add_argument("--out", help="output directory for CSV files")
    ap.add_argument("--seed", type=int, help="seed for randomized verbs")
    ap.add_argument("--count", type=int, help="number of random configurations for oracle-check")
    ap.add_argument("--grid", help="slip grid lo:hi:n in degrees for sweep")
    ap.add_argument("--mode", choices=MODES, help="estimation mode")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericError, InconclusiveError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

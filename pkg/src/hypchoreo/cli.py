"""Command-line front end.

Subcommands: solve (two-phase minimization), verify (decay / gradient /
residual triple), sweep (curvature continuation against the flat limit),
export (orbit samples or coefficient magnitudes as CSV), and search
(multi-seed random exploration).

Exit codes: 0 success; 2 non-convergence or failed verification;
3 infeasible seed; 4 unreadable, malformed, or unwritable files.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import geometry
from .action import Configuration
from .continuation import (
    ContinuationResult,
    _fit_bandwidth,
    continue_in_R,
    convergence_rate,
    solve_planar,
)
from .optimizer import (
    Choreography,
    InfeasibleSeedError,
    Phase1Options,
    Phase2Options,
    SolveFailure,
    phase1_bfgs,
    random_seed,
    solve,
)
from .solutions import MalformedSolutionError, load_bundled, load_solution, save_solution
from .trigpath import TrigPath, nodes, pack_vars
from .verify import SolveReport, VerificationThresholds, verify_all

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 2
EXIT_INFEASIBLE_SEED = 3
EXIT_FILE_ERROR = 4

_REPORT_ROWS = (
    ("Action", lambda r: f"{r.action:.16g}"),
    ("Number of coefficients", lambda r: str(r.coefficient_count)),
    ("Computer time (s)", lambda r: f"{r.wall_time_seconds:.2f}"),
    ("Number of iterations", lambda r: str(r.iterations)),
    ("Relative 2-norm of the gradient", lambda r: f"{r.gradient_rel_norm:.2e}"),
    ("Smallest coefficient", lambda r: f"{r.smallest_coefficient:.2e}"),
    ("Relative 2-norm of the residual", lambda r: f"{r.residual_rel_norm:.2e}"),
)


def _radius(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError("R must be positive (inf for the flat problem)")
    return value


def _format_report(report: SolveReport) -> str:
    records = [(label, rec) for label, rec in (("Phase 1", report.phase1), ("Phase 2", report.phase2)) if rec is not None]
    if not records:
        return "(no diagnostics)"
    width = max(len(label) for label, _ in _REPORT_ROWS) + 2
    lines = [" " * width + "".join(f"{label:>18}" for label, _ in records)]
    for label, fmt in _REPORT_ROWS:
        lines.append(f"{label:<{width}}" + "".join(f"{fmt(rec):>18}" for _, rec in records))
    return "\n".join(lines)


def _load_file(token: str) -> Choreography:
    if token.startswith("bundled:"):
        return load_bundled(token[len("bundled:"):])
    return load_solution(token)


def _resolve_seed(token: str, config: Configuration, modes: int) -> TrigPath:
    try:
        rng_seed = int(token)
    except ValueError:
        return _fit_bandwidth(_load_file(token).path, config.K)
    return random_seed(config, modes=min(modes, config.K), rng_seed=rng_seed)


def _write_text(out, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _f(value) -> str:
    return repr(float(value))


def cmd_solve(args) -> int:
    config = Configuration(n=args.n, R=args.R, K=args.K, omega=args.omega)
    seed = _resolve_seed(args.seed, config, args.modes)
    options2 = Phase2Options(K2=args.K2)
    try:
        choreo = solve(config, seed, Phase1Options(), options2)
    except SolveFailure as exc:
        print(_format_report(exc.choreography.report))
        print(f"FAILED: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(_format_report(choreo.report))
    if args.out is not None:
        save_solution(args.out, choreo)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    choreo = _load_file(args.file)
    thresholds = VerificationThresholds(
        decay=args.decay_threshold,
        gradient=args.gradient_threshold,
        residual=args.residual_threshold,
    )
    result = verify_all(choreo, thresholds)

    def line(name, value, bound):
        shown = "unavailable" if value is None else f"{value:.3e}"
        status = "ok" if value is not None and value <= bound else "FAIL"
        return f"{name:<22} {shown:>14}   (threshold {bound:.1e})  {status}"

    print(line("coefficient decay", result.decay, thresholds.decay))
    print(line("gradient rel norm", result.gradient, thresholds.gradient))
    print(line("motion residual", result.residual, thresholds.residual))
    for failure in result.failures:
        print(f"note: {failure}")
    print("PASS" if result.passed else "FAIL")
    return EXIT_OK if result.passed else EXIT_NO_CONVERGENCE


def _sweep_rows(label: str, result: ContinuationResult) -> str:
    slope = ""
    if len(result.members) >= 3 and all(m.diff_to_planar > 0.0 for m in result.members):
        slope = _f(convergence_rate(result.members))
    lines = ["family,R,diff,slope"]
    for member in result.members:
        lines.append(f"{label},{_f(member.R)},{_f(member.diff_to_planar)},{slope}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    family = _load_file(args.family)
    radii = sorted({float(tok) for tok in args.R_list.split(",") if tok.strip()}, reverse=True)
    if not radii:
        print("empty R list", file=sys.stderr)
        return EXIT_FILE_ERROR
    K1 = args.K if args.K is not None else (family.config.K + 1) // 2
    K2 = args.K2 if args.K2 is not None else family.config.K
    options2 = Phase2Options(K2=K2)

    try:
        if family.config.is_planar:
            planar_start = family
        else:
            planar_config = replace(family.config, R=math.inf, K=K1)
            planar_seed = _fit_bandwidth(TrigPath(family.path.coeffs * 2.0), K1)
            planar_start = solve_planar(planar_config, planar_seed, Phase1Options(), options2)
        family_config = replace(family.config, R=radii[0], K=K1)
        result = continue_in_R(family_config, radii, planar_start, Phase1Options(), options2)
    except (SolveFailure, InfeasibleSeedError) as exc:
        print(f"FAILED: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    _write_text(args.out, _sweep_rows(Path(args.family).stem, result))
    if not result.complete:
        print(f"sweep stopped at R = {result.failed_at}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_export(args) -> int:
    choreo = _load_file(args.file)
    path, config = choreo.path, choreo.config
    if args.format == "coeffs":
        lines = ["k,abs_c"]
        for k, c in zip(path.wavenumbers, path.coeffs):
            lines.append(f"{k},{_f(abs(c))}")
        _write_text(args.out, "\n".join(lines) + "\n")
        return EXIT_OK

    t = nodes(args.samples)
    bodies = [path.eval(t + 2.0 * np.pi * j / config.n) for j in range(config.n)]
    header = ["t"]
    for j in range(config.n):
        header += [f"re_z{j}", f"im_z{j}"]
    lift = None
    if not config.is_planar:
        header += ["x1", "x2", "x3"]
        lift = geometry.lift_coords(bodies[0], config.R)
    lines = [",".join(header)]
    for m in range(args.samples):
        row = [_f(t[m])]
        for z in bodies:
            row += [_f(z[m].real), _f(z[m].imag)]
        if lift is not None:
            row += [_f(lift[m, 0]), _f(lift[m, 1]), _f(lift[m, 2])]
        lines.append(",".join(row))
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_search(args) -> int:
    config = Configuration(n=args.n, R=args.R, K=args.K, omega=args.omega)
    options1 = Phase1Options()
    options2 = Phase2Options(K2=args.K2)

    candidates = []
    for trial in range(args.trials):
        try:
            seed = random_seed(config, modes=min(args.modes, config.K), rng_seed=args.rng + trial)
        except InfeasibleSeedError:
            continue
        result = phase1_bfgs(pack_vars(seed), config, options1)
        if result.converged:
            candidates.append((result.value, trial, seed))

    candidates.sort(key=lambda item: (item[0], item[1]))
    distinct = []
    for value, trial, seed in candidates:
        if all(abs(value - kept) > 1e-6 * max(abs(value), abs(kept)) for kept, _, _ in distinct):
            distinct.append((value, trial, seed))

    solved = []
    for value, trial, seed in distinct:
        try:
            choreo = solve(config, seed, options1, options2)
        except (SolveFailure, InfeasibleSeedError):
            continue
        solved.append((choreo.action, trial, choreo))

    solved.sort(key=lambda item: (item[0], item[1]))
    kept = []
    for action, trial, choreo in solved:
        if all(abs(action - a) > 1e-6 * max(abs(action), abs(a)) for a, _, _ in kept):
            kept.append((action, trial, choreo))

    if not kept:
        print("no converged solutions found", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index, (action, trial, choreo) in enumerate(kept):
        target = out_dir / f"search_{index:03d}.json"
        save_solution(target, choreo)
        print(f"trial {trial:3d}  action {action:.16g}  -> {target}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypchoreo",
        description="Choreographic n-body orbits on the hyperbolic disk (R = inf for the flat problem).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--n", type=int, required=True, help="number of bodies")
        p.add_argument("--R", type=_radius, required=True, help="curvature radius, or inf")
        p.add_argument("--omega", type=float, default=0.0, help="rotating-frame angular velocity")
        p.add_argument("--K", type=int, required=True, help="bandwidth (2K+1 coefficients)")
        p.add_argument("--K2", type=int, default=None, help="padded bandwidth for Newton (default 2K)")

    p_solve = sub.add_parser("solve", help="two-phase minimization from a seed")
    add_config_flags(p_solve)
    p_solve.add_argument("--seed", required=True, help="integer (random seed) or solution/seed file; bundled:<name> for shipped seeds")
    p_solve.add_argument("--modes", type=int, default=5, help="bandwidth of integer-seeded random paths")
    p_solve.add_argument("--out", default=None, help="write the solution file here")
    p_solve.set_defaults(handler=cmd_solve)

    p_verify = sub.add_parser("verify", help="check decay, gradient norm, and motion residual")
    p_verify.add_argument("file", help="solution file (or bundled:<name>)")
    p_verify.add_argument("--decay-threshold", type=float, default=1e-8)
    p_verify.add_argument("--gradient-threshold", type=float, default=1e-8)
    p_verify.add_argument("--residual-threshold", type=float, default=1e-8)
    p_verify.set_defaults(handler=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="continue a family in R and compare to the flat limit")
    p_sweep.add_argument("--family", required=True, help="solution file identifying the family")
    p_sweep.add_argument("--R-list", required=True, help="comma-separated radii, e.g. 10,100,1000")
    p_sweep.add_argument("--K", type=int, default=None, help="phase-1 bandwidth for members (default half the file's)")
    p_sweep.add_argument("--K2", type=int, default=None, help="phase-2 bandwidth for members (default the file's)")
    p_sweep.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_export = sub.add_parser("export", help="emit orbit samples or coefficient magnitudes as CSV")
    p_export.add_argument("file", help="solution file (or bundled:<name>)")
    p_export.add_argument("--format", choices=("csv", "coeffs"), required=True)
    p_export.add_argument("--samples", type=int, default=2048)
    p_export.add_argument("--out", default=None, help="output path (default stdout)")
    p_export.set_defaults(handler=cmd_export)

    p_search = sub.add_parser("search", help="random multi-seed exploration")
    add_config_flags(p_search)
    p_search.add_argument("--trials", type=int, default=20)
    p_search.add_argument("--rng", type=int, default=0, help="base seed; trial i uses rng + i")
    p_search.add_argument("--modes", type=int, default=5)
    p_search.add_argument("--out-dir", default=".", help="directory for search_NNN.json files")
    p_search.set_defaults(handler=cmd_search)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InfeasibleSeedError as exc:
        print(f"infeasible seed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE_SEED
    except MalformedSolutionError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FILE_ERROR
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FILE_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 local/separable verdict (or plain success), 1 nonlocal/entangled
verdict, 2 usage or input error, 3 numeric failure.  A human-readable summary
goes to stdout; ``--out`` receives the machine-readable JSON report.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .exceptions import DomainError, NonlocalityError, NumericError, ShapeError, SizeError
from .linalg import hermitian_eigenvalues
from .locality import (
    behavior_from_state,
    canonical_chsh_settings,
    chsh_max,
    chsh_optimal_settings,
    chsh_value,
    lhv_membership,
    mix_local_model,
    no_signaling_residual,
    sample_local_model,
)
from .quantum import bell_state, random_density, random_measurement, werner_state
from .separability import (
    FAMILIES,
    family_state,
    ppt_test,
    regime_boundaries,
    scan_family,
    verify_separable_decomposition,
)

DEFAULT_SEED = 0
DEFAULT_TOL = 1e-9
NOSIG_RANDOM_SETTINGS = 4

EXIT_LOCAL, EXIT_NONLOCAL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(args, report: dict) -> None:
    if getattr(args, "out", None):
        io.write_json(args.out, report)


def _base_report(argv, inputs=(), **tolerances) -> dict:
    return {
        "command": list(argv),
        "inputs": {str(p): io.digest(p) for p in inputs},
        "tolerances": tolerances,
    }


def _load_state(path):
    try:
        return io.state_from_dict(io.read_json(path))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except io.FileFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _print_rows(rows) -> None:
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {value}")


def cmd_state(args, argv) -> int:
    fam = args.family
    if fam == "werner":
        rho = werner_state(_required(args.p, "--p"))
    elif fam == "bell":
        rho = bell_state(args.kind)
    elif fam == "isotropic":
        rho = family_state("isotropic", _required(args.p, "--p"), args.kind)
    elif fam == "random":
        da, db = args.dims
        seed = DEFAULT_SEED if args.seed is None else args.seed
        rho = random_density(da * db, seed, dims=(da, db))
    else:
        raise UsageError(f"unknown family {fam!r}")
    data = io.state_to_dict(rho)
    if args.out:
        io.write_json(args.out, data)
        spectrum = hermitian_eigenvalues(rho.matrix)[::-1]
        _print_rows([("family", fam), ("dims", rho.dims), ("spectrum", np.array2string(spectrum, precision=6)), ("written", args.out)])
    else:
        sys.stdout.write(io.dumps(data))
    return EXIT_LOCAL


def _required(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this family")
    return value


def _settings(rho, which):
    if rho.dims != (2, 2):
        raise UsageError(f"mode needs a two-qubit state, got dims {rho.dims}")
    return canonical_chsh_settings() if which == "canonical" else chsh_optimal_settings(rho)


def cmd_analyze(args, argv) -> int:
    tol = args.tol
    report = _base_report(argv, [args.state], tol=tol)
    try:
        rho = _load_state(args.state)
        if args.mode == "ppt":
            ppt = ppt_test(rho, tol)
            results = {"min_eigenvalue": ppt.min_eigenvalue, "dims": list(ppt.dims)}
            verdict = ppt.verdict
            code = EXIT_NONLOCAL if verdict == "entangled" else EXIT_LOCAL
        elif args.mode == "chsh":
            meas_a, meas_b = _settings(rho, args.settings)
            smax = chsh_max(rho)
            s_at = chsh_value(behavior_from_state(rho, meas_a, meas_b))
            results = {"chsh_max": smax, "chsh_at_settings": s_at, "settings": args.settings, "local_bound": 2.0}
            verdict = "violation" if smax > 2.0 + tol else "no-violation"
            code = EXIT_NONLOCAL if verdict == "violation" else EXIT_LOCAL
        elif args.mode == "lhv":
            meas_a, meas_b = _settings(rho, args.settings)
            beh = behavior_from_state(rho, meas_a, meas_b)
            lhv = lhv_membership(beh)
            results = {"settings": args.settings, "behavior": io.behavior_to_dict(beh), "lhv": io.lhv_to_dict(lhv)}
            verdict = lhv.verdict
            code = EXIT_LOCAL if lhv.feasible else EXIT_NONLOCAL
        else:
            seed = DEFAULT_SEED if args.seed is None else args.seed
            rng = np.random.Generator(np.random.PCG64(seed))
            n_set = NOSIG_RANDOM_SETTINGS
            meas_a = [random_measurement(rho.dim_a, rng) for _ in range(n_set)]
            meas_b = [random_measurement(rho.dim_b, rng) for _ in range(n_set)]
            residual = no_signaling_residual(behavior_from_state(rho, meas_a, meas_b))
            results = {"no_signaling_residual": residual, "random_settings_per_party": n_set, "seed": seed}
            verdict = "no-signaling" if residual <= tol else "signaling"
            code = EXIT_LOCAL if residual <= tol else EXIT_NONLOCAL
    except NumericError as exc:
        report.update(verdict="error", error=str(exc), exit_code=EXIT_NUMERIC)
        _emit(args, report)
        raise
    except (UsageError, NonlocalityError) as exc:
        report.update(verdict="error", error=str(exc), exit_code=EXIT_USAGE)
        _emit(args, report)
        raise
    report.update(mode=args.mode, results=results, verdict=verdict, exit_code=code)
    _emit(args, report)
    rows = [("state", args.state), ("mode", args.mode)]
    rows += [(k, v) for k, v in results.items() if not isinstance(v, dict)]
    rows += [("verdict", verdict), ("exit", code)]
    _print_rows(rows)
    return code


def cmd_simulate(args, argv) -> int:
    try:
        model = io.model_from_dict(io.read_json(args.model))
    except OSError as exc:
        raise UsageError(f"cannot read {args.model}: {exc}") from exc
    except (io.FileFormatError, DomainError, ShapeError, SizeError) as exc:
        raise UsageError(f"{args.model}: {exc}") from exc
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    sample = sample_local_model(model, args.trials, seed, workers=args.workers)
    exact = mix_local_model(model)
    results = {
        "trials": args.trials,
        "seed": seed,
        "counts": sample.counts.tolist(),
        "frequencies": sample.frequencies.tolist(),
        "exact": exact.p.tolist(),
        "missing_setting_pairs": [list(m) for m in sample.missing],
    }
    if not sample.missing:
        results["max_deviation"] = float(np.max(np.abs(sample.frequencies - exact.p)))
        if model.scenario.shape == (2, 2, 2, 2):
            results["empirical_chsh"] = chsh_value(sample.behavior)
            results["exact_chsh"] = chsh_value(exact)
    report = _base_report(argv, [args.model])
    report.update(results=results, verdict="simulated", exit_code=EXIT_LOCAL)
    _emit(args, report)
    _print_rows([(k, results[k]) for k in ("trials", "seed", "max_deviation", "empirical_chsh", "exact_chsh") if k in results])
    return EXIT_LOCAL


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list of values."""
    try:
        if ":" in spec:
            start, stop, step = (float(v) for v in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            grid = [round(start + i * step, 12) for i in range(n + 1)]
        else:
            grid = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"invalid grid specification {spec!r}") from None
    if not grid:
        raise UsageError("grid is empty")
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise UsageError("grid values must lie in [0, 1]")
    return grid


def cmd_scan(args, argv) -> int:
    if args.family not in FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; expected one of {FAMILIES}")
    grid = parse_grid(args.grid)
    rows = scan_family(args.family, grid, kind=args.kind)
    bounds = regime_boundaries(rows, args.family, kind=args.kind, tol=args.tol)
    report = _base_report(argv, tol=args.tol, ppt_tol=DEFAULT_TOL)
    report.update(
        family=args.family,
        rows=[
            {
                "parameter": r.parameter,
                "ppt_min_eigenvalue": r.ppt.min_eigenvalue,
                "ppt_verdict": r.ppt.verdict,
                "chsh_max": r.chsh_max,
                "lhv_verdict": r.lhv_verdict,
                "classification": r.classification,
            }
            for r in rows
        ],
        boundaries=[
            {"lower": b.lower, "upper": b.upper, "parameter": b.parameter, "bracket": list(b.bracket)}
            for b in bounds
        ],
        note=rows[0].note,
        verdict="scanned",
        exit_code=EXIT_LOCAL,
    )
    _emit(args, report)
    print(f"{'p':>8}  {'ppt_min_eig':>12}  {'chsh_max':>9}  {'lhv':>10}  classification")
    for r in rows:
        print(f"{r.parameter:8.4f}  {r.ppt.min_eigenvalue:12.6f}  {r.chsh_max:9.6f}  {r.lhv_verdict:>10}  {r.classification}")
    for b in bounds:
        print(f"boundary {b.lower} -> {b.upper} at p = {b.parameter:.9f}")
    return EXIT_LOCAL


def cmd_verify(args, argv) -> int:
    rho = _load_state(args.state)
    try:
        comps = io.components_from_dict(io.read_json(args.decomposition))
    except OSError as exc:
        raise UsageError(f"cannot read {args.decomposition}: {exc}") from exc
    except io.FileFormatError as exc:
        raise UsageError(f"{args.decomposition}: {exc}") from exc
    try:
        residual = verify_separable_decomposition(rho, comps)
    except ShapeError as exc:
        raise UsageError(str(exc)) from exc
    certified = residual <= args.tol
    code = EXIT_LOCAL if certified else EXIT_NONLOCAL
    report = _base_report(argv, [args.state, args.decomposition], tol=args.tol)
    report.update(
        results={"residual": residual, "components": len(comps)},
        verdict="certified-separable" if certified else "not-certified",
        exit_code=code,
    )
    _emit(args, report)
    _print_rows([("residual", residual), ("components", len(comps)), ("verdict", report["verdict"]), ("exit", code)])
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocality", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="write a two-party state file")
    p.add_argument("family", choices=["werner", "bell", "isotropic", "random"])
    p.add_argument("--p", type=float, help="mixing parameter for werner/isotropic")
    p.add_argument("--kind", default="phi+", choices=["phi+", "phi-", "psi+", "psi-"])
    p.add_argument("--dims", type=int, nargs=2, default=(2, 2), metavar=("DA", "DB"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("analyze", help="PPT, CHSH, LHV or no-signaling analysis of a state")
    p.add_argument("state")
    p.add_argument("--mode", required=True, choices=["ppt", "chsh", "lhv", "nosig"])
    p.add_argument("--settings", default="optimal", choices=["optimal", "canonical"])
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo sampling of a common-cause model")
    p.add_argument("model")
    p.add_argument("--trials", type=int, default=10000, help="total trials, round-robin over setting pairs")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="classify a state family over a parameter grid")
    p.add_argument("family")
    p.add_argument("--grid", required=True, help="start:stop:step or comma-separated values")
    p.add_argument("--kind", default="phi+", choices=["phi+", "phi-", "psi+", "psi-"])
    p.add_argument("--tol", type=float, default=1e-6, help="boundary bisection tolerance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="check a separable decomposition certificate")
    p.add_argument("state")
    p.add_argument("decomposition")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NonlocalityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``fraclap``.

Global flags may appear before or after the subcommand.  For every
subcommand other than ``sweep``, ``--config`` names an INI file whose
section of the same name (e.g. ``[simulate]``) supplies option defaults.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from fraclap.exponents import ExponentParams, report
from fraclap.fieldio import load_field, save_field, write_binary
from fraclap.grid import Descriptor, make_grid, norms, sample
from fraclap.ju import JuSuiteConfig, ju_sweep
from fraclap.kernels import BACKEND
from fraclap.operators import OperatorSpec, calibrated, frac_lap
from fraclap.simulate import PDEParams, SimControls, run
from fraclap.sweep import EXIT_DIVERGED, EXIT_INVALID, EXIT_OK, run_config
from fraclap.testfn import CutoffSpec, scaling_study

log = logging.getLogger("fraclap")

EXIT_FAILED = 1


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _number(text: str):
    """Exact Fraction for rational literals like ``3/2``, float otherwise."""
    return Fraction(text) if "/" in text else float(text)


def _write_json(obj, path: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])


def _outdir(args) -> Path | None:
    out = getattr(args, "sub_out", None) or getattr(args, "out", None)
    return Path(out) if out else None


# {{{ subcommands


def cmd_exponents(args) -> int:
    params = ExponentParams(args.p, args.q, args.beta, args.N, args.gamma, args.epsilon)
    out = _outdir(args)
    _write_json(report(params), out / "exponents.json" if out else None)
    return EXIT_OK


def cmd_frac_op(args) -> int:
    f = load_field(args.input)
    spec = OperatorSpec(args.beta, args.backend)
    if args.backend == "singular_integral" and args.calibrate:
        spec = calibrated(spec, f.grid)
    g = frac_lap(f, spec)
    save_field(g, args.output)
    diag = {
        "beta": args.beta,
        "backend": args.backend,
        "kernel_backend": BACKEND,
        "calibration_factor": spec.calibration_factor,
        "dim": f.grid.dim,
        "n": f.grid.n,
        "L": f.grid.L,
        "input_warnings": list(f.warnings),
        "output_norms": norms(g),
        "output": str(args.output),
    }
    _write_json(diag, Path(args.diagnostics) if args.diagnostics else None)
    return EXIT_OK


def cmd_ju_check(args) -> int:
    cfg = JuSuiteConfig(
        count=args.count,
        q_list=tuple(args.q_list),
        delta_list=tuple(args.delta_list),
        seed=args.seed if args.seed is not None else 42,
        dim=args.dim,
        n=args.n,
        L=args.L,
        backend=args.backend,
        tolerance=args.tolerance,
        workers=args.threads or 1,
    )
    rep = ju_sweep(cfg)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(rep.to_json() + "\n", encoding="utf-8")
    out = _outdir(args)
    if out:
        cols = ["index", "q", "delta", "max_violation", "max_violation_refined"]
        _write_csv(out / "ju_cases.csv", cols, [[c.get(k) for k in cols] for c in rep.cases])
    print(f"ju-check: {len(rep.cases)} cases, aggregate max_violation={rep.aggregate_max_violation:.3e}, "
          f"{'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_testfn_scaling(args) -> int:
    params = ExponentParams(args.p, args.q, args.beta, args.N, args.gamma, args.epsilon)
    cutoff = None
    if args.ell or args.eta:
        default = CutoffSpec.for_exponents(float(args.p), float(args.q))
        cutoff = CutoffSpec(args.ell or default.ell, args.eta or default.eta)
    rows, fit = scaling_study(params, args.T_list, args.B_list, cutoff)
    cols = ["T", "B", "I1", "I2", "lower_bound", "predicted_delta", "predicted_growth"]
    target = _outdir(args)
    if target is not None:
        if target.suffix != ".csv":
            target = target / "testfn_scaling.csv"
        _write_csv(target, cols, [[r[k] for k in cols] for r in rows])
    _write_json({"fitted_slopes": fit.fitted_slopes, "predicted_slopes": fit.predicted,
                 "T_values": fit.T_values, "B_values": fit.B_values}, None)
    return EXIT_OK


def _initial(args, grid):
    text = args.initial
    if text in ("algdecay", "algebraic_decay"):
        if args.gamma is None:
            raise ValueError("algdecay initial data needs --gamma")
        text = str(Descriptor("algebraic_decay", (args.epsilon or 1.0, args.gamma)))
    return sample(text, grid)


def cmd_simulate(args) -> int:
    params = PDEParams(args.p, args.q, args.beta, args.N, args.gamma)
    controls = SimControls(t_max=args.t_max, cfl=args.cfl, blowup_threshold=args.threshold)
    grid = make_grid(args.N, args.n, args.L)
    u0 = _initial(args, grid)
    for w in u0.warnings:
        log.warning("initial data: %s", w)
    out = run(u0, params, controls)
    record = out.to_dict()
    record.update({"initial": args.initial, "n": args.n, "L": args.L})
    target = _outdir(args)
    if target is None:
        _write_json(record, None)
    else:
        _write_json(record, target / "outcome.json")
        _write_csv(target / "history.csv", ["t", "sup", "L2"], out.history)
        if args.snapshot:
            write_binary(u0, target / "initial.bin")
            write_binary(out.final, target / "final.bin")
    print(f"simulate: {out.classification.value} at t={out.t_final:.6g} ({out.steps} steps)", file=sys.stderr)
    return EXIT_DIVERGED if out.diverged else EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config:
        log.error("sweep needs --config PATH")
        return EXIT_INVALID
    code, directory = run_config(args.config, {"seed": args.seed, "out": args.out, "threads": args.threads})
    if directory is not None:
        print(f"sweep: artifacts in {directory}", file=sys.stderr)
    return code


# }}}


def _globals(parser: argparse.ArgumentParser, suppress: bool, with_out: bool = True) -> None:
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", metavar="PATH", **kw, help="INI config file")
    parser.add_argument("--seed", type=int, **kw, help="random seed")
    if with_out:
        parser.add_argument("--out", metavar="DIR", **kw, help="output directory")
    parser.add_argument("--threads", type=int, **kw, help="worker count")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], **kw)


def _pde_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=_number, required=True)
    p.add_argument("--q", type=_number, required=True)
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--gamma", type=_number)
    p.add_argument("--epsilon", type=_number)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclap", description="Fractional Laplacian blow-up toolkit.")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        # these two take their own --out (a file or run directory)
        _globals(sp, suppress=True, with_out=name not in ("testfn-scaling", "simulate"))
        sp.set_defaults(func=fn)
        return sp

    sp = add("exponents", cmd_exponents, "derived exponents and regime")
    _pde_args(sp)

    sp = add("frac-op", cmd_frac_op, "apply the fractional Laplacian to a field file")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--backend", choices=["spectral", "singular_integral"], default="spectral")
    sp.add_argument("--input", required=True, help="CSV or binary (.bin/.fld) field")
    sp.add_argument("--output", required=True, help="CSV or binary (.bin/.fld) field")
    sp.add_argument("--diagnostics", help="JSON diagnostics path (stdout if omitted)")
    sp.add_argument("--calibrate", action="store_true", help="measure the singular-backend constant")

    sp = add("ju-check", cmd_ju_check, "seeded check of Ju's pointwise inequality")
    sp.add_argument("--q-list", type=_floats, default=[1.0, 1.5, 2.0, 3.0])
    sp.add_argument("--delta-list", type=_floats, default=[0.5, 1.0, 1.5])
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--tolerance", type=float, default=1e-8)
    sp.add_argument("--report", help="JSON report path")
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--L", type=float, default=10.0)
    sp.add_argument("--backend", choices=["spectral", "singular_integral"], default="spectral")

    sp = add("testfn-scaling", cmd_testfn_scaling, "scaling of the test-function integrals")
    _pde_args(sp)
    sp.add_argument("--T-list", type=_floats, default=[16, 32, 64, 128, 256])
    sp.add_argument("--B-list", type=_floats, default=[1.0])
    sp.add_argument("--ell", type=int)
    sp.add_argument("--eta", type=int)
    sp.add_argument("--out", dest="sub_out", metavar="CSV", help="rows CSV (or directory)")

    sp = add("simulate", cmd_simulate, "integrate the PDE and classify the outcome")
    _pde_args(sp)
    sp.add_argument("--initial", default="gaussian:1,1", help="gaussian:a,w | algdecay | any field descriptor")
    sp.add_argument("--t-max", type=float, default=50.0)
    sp.add_argument("--cfl", type=float, default=0.4)
    sp.add_argument("--threshold", type=float, default=1e6, help="blow-up threshold on the sup norm")
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--L", type=float, default=40.0)
    sp.add_argument("--snapshot", action="store_true", help="also write initial/final binary fields")
    sp.add_argument("--out", dest="sub_out", metavar="DIR", help="output directory")

    add("sweep", cmd_sweep, "run a sweep config")
    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, argv) -> None:
    """Seed subcommand defaults from ``[<subcommand>]`` in the --config file."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    cmd = next((a for a in rest if not a.startswith("-")), None)
    if not known.config or cmd in (None, "sweep"):
        return
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(known.config, encoding="utf-8"):
        raise FileNotFoundError(f"unreadable config {known.config}")
    if cmd not in cp:
        return
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = subparsers.choices.get(cmd)
    if sp is None:
        return
    actions = {a.dest: a for a in sp._actions}
    values = {}
    for key, raw in cp[cmd].items():
        dest = key.lstrip("-").replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise ValueError(f"[{cmd}] {key}: unknown option")
        values[dest] = (action.type or str)(raw)
        action.required = False
    sp.set_defaults(**values)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"fraclap: {exc}", file=sys.stderr)
        return EXIT_INVALID
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(args, "log_level", None) or "WARNING",
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"fraclap {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

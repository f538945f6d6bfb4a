"""Batch command-line surface.

Subcommands: validate, coeffs, mixing, perturb-eval, noise-eval, simulate,
regions.  Every command writes a UTF-8, LF-terminated CSV whose header
comments carry the tool version, grid sizes, and tolerances; identical
configurations and seeds produce byte-identical files.  Unless ``--no-plot``
is given, each command also renders a companion PNG figure next to the CSV.

Exit codes: 0 success, 1 malformed spec (the message names the offending
field), 2 validation failure, 3 numeric non-convergence.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .core import validate as validate_model
from .dependence import (
    coefficient_reports,
    perturbation_identities,
    tail_lower_report,
    tail_upper_report,
)
from .errors import CopulabError, MarginalMismatch, NotACopula, NotADensity, SpecError
from .marginals import parse_marginal
from .mixing import decay_table
from .noise import (
    UNIFORM01,
    c5_general,
    c6_general,
    c7_general,
    noise_copula,
)
from .perturbations import apply_perturbation
from .simulate import reachability_map, sample_chain
from .specio import copula_from_spec, parse_perturbation

FLOAT_FMT = "{:.12g}"


def _fmt(x):
    if isinstance(x, float):
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        if np.isnan(x):
            return "nan"
        return FLOAT_FMT.format(x)
    return str(x)


def write_csv(path, comments, columns, rows):
    """Fixed-format CSV with comment header; LF endings, '.' decimals."""
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _figure_path(out):
    return str(Path(out).with_suffix(".png"))


def _load_copula(args):
    text = args.copula
    if text is None:
        raise SpecError("copula", "this command needs --copula")
    candidate = Path(text)
    if not text.lstrip().startswith("{") and candidate.is_file():
        text = candidate.read_text(encoding="utf-8")
    return copula_from_spec(text)


_MARGINAL_SPLIT = re.compile(r"[;]|,(?=\s*(?:uniform|normal|gauss|exponential|exp|[un])\s*:)",
                             re.IGNORECASE)


def _split_marginals(text, count):
    """Split the --marginals value into specs.

    Marginal parameters themselves contain commas, so splitting happens on
    semicolons or on commas directly followed by a marginal kind.
    """
    if text is None:
        return [UNIFORM01] * count
    parts = [p for p in _MARGINAL_SPLIT.split(text) if p and p.strip()]
    if len(parts) != count:
        raise SpecError("marginals", f"expected {count} marginal specs, got {len(parts)}")
    return [parse_marginal(p) for p in parts]


def _header(args, extras=()):
    out = [f"copulab {__version__}", f"command: {args.command}"]
    out.extend(extras)
    return out


def cmd_validate(args):
    model = apply_perturbation(_load_copula(args), parse_perturbation(args.perturb))
    report = validate_model(model, n=args.grid, tol=args.tol)
    print(report.summary(), file=sys.stderr)
    rows = [
        ("grounded", report.worst_grounded, args.tol, "pass" if report.worst_grounded <= args.tol else "fail"),
        ("uniform_margins", report.worst_margin, args.tol, "pass" if report.worst_margin <= args.tol else "fail"),
        ("rectangle_inequality", report.worst_rectangle, -args.tol,
         "pass" if report.worst_rectangle >= -args.tol else "fail"),
    ]
    write_csv(args.out, _header(args, [f"model: {report.model}", f"grid: {report.n}",
                                       f"tol: {report.tol:g}"]),
              ["check", "worst_value", "threshold", "status"], rows)
    if args.plot:
        plotting.plot_validation(model, report, _figure_path(args.out), n=args.grid)
    return 0 if report.passed else 2


def cmd_coeffs(args):
    model = apply_perturbation(_load_copula(args), parse_perturbation(args.perturb))
    reports = coefficient_reports(model, grid=args.grid)
    rows = [(r.name, r.value, r.method, r.grid, r.tol) for r in reports]
    write_csv(args.out, _header(args, [f"model: {model.model_id()}", f"grid: {args.grid}"]),
              ["coefficient", "value", "method", "grid", "tol"], rows)
    for r in reports:
        print(f"{r.name} = {r.value:.6g} ({r.method})", file=sys.stderr)
    if args.plot:
        plotting.plot_coefficients(reports, _figure_path(args.out), model.model_id())
    lo = tail_lower_report(model)
    hi = tail_upper_report(model)
    if not (lo.converged and hi.converged):
        print("tail extrapolation did not settle within 0.02", file=sys.stderr)
        return 3
    return 0


def cmd_mixing(args):
    model = _load_copula(args)
    pert = parse_perturbation(args.perturb)
    table = decay_table(model, pert, args.n_max, grid=args.grid)
    rows = [(r.n, r.beta, r.phi, r.psi, r.predicted_beta) for r in table.rows]
    write_csv(args.out, _header(args, [f"model: {table.base}",
                                       f"perturbation: {pert.kind}:{pert.theta:g}",
                                       f"grid: {table.grid}",
                                       f"fitted_rate: {table.fitted_rate:.6g}"]),
              ["n", "beta", "phi", "psi", "predicted_beta"], rows)
    print(f"fitted geometric rate of beta: {table.fitted_rate:.4g}", file=sys.stderr)
    if args.plot:
        plotting.plot_decay(table, _figure_path(args.out),
                            f"{table.base} with {pert.kind}:{pert.theta:g}")
    return 0


def cmd_perturb_eval(args):
    model = _load_copula(args)
    pert = parse_perturbation(args.perturb)
    if pert.kind not in ("tilde", "hat"):
        raise SpecError("perturb", "perturb-eval needs tilde:theta or hat:theta")
    report = perturbation_identities(model, pert.theta)
    rows = [(r.coefficient, r.kind, r.measured, r.predicted, r.error) for r in report.rows]
    write_csv(args.out, _header(args, [f"model: {report.base}", f"theta: {report.theta:g}",
                                       "tol: 2e-3"]),
              ["coefficient", "kind", "measured", "predicted", "abs_error"], rows)
    print(f"max identity error: {report.max_error:.3e}", file=sys.stderr)
    if args.plot:
        plotting.plot_identity_errors(report, _figure_path(args.out),
                                      f"{report.base}, theta={report.theta:g}")
    return 0


def _noise_eval_grid(args):
    n = args.resolution
    pts = np.linspace(0.0, 1.0, n + 2)[1:-1]
    return np.meshgrid(pts, pts, indexing="ij")


def cmd_noise_eval(args):
    if args.noise is None:
        raise SpecError("noise", "this command needs --noise")
    U, V = _noise_eval_grid(args)
    noise_id = args.noise.lower()
    if noise_id in ("c5-m-uniform", "c6-indep-uniform"):
        from .core import M, PI

        closed = noise_copula(noise_id)
        if noise_id == "c5-m-uniform":
            oracle = c5_general(M, UNIFORM01, UNIFORM01, UNIFORM01)
        else:
            oracle = c6_general(PI, UNIFORM01, UNIFORM01, UNIFORM01)
        closed_vals = np.asarray(closed.cdf(U, V), dtype=float)
        quad_vals = oracle(U, V)
        diff = np.abs(closed_vals - quad_vals)
        rows = [(U[i, j], V[i, j], closed_vals[i, j], quad_vals[i, j], diff[i, j])
                for i in range(U.shape[0]) for j in range(U.shape[1])]
        write_csv(args.out, _header(args, [f"noise: {noise_id}", f"resolution: {args.resolution}",
                                           "oracle: quadrature"]),
                  ["u", "v", "closed", "quadrature", "abs_diff"], rows)
        print(f"max |closed - quadrature| = {diff.max():.3e}", file=sys.stderr)
        if args.plot:
            plotting.plot_surface_pair(U[:, 0], V[0, :], closed_vals, quad_vals,
                                       _figure_path(args.out), noise_id)
        return 0
    if noise_id in ("c5", "c6", "c7"):
        base = _load_copula(args)
        if noise_id == "c7":
            f1, f2, g1, g2 = _split_marginals(args.marginals, 4)
            fn = c7_general(base, f1, f2, g1, g2)
        else:
            f1, f2, f3 = _split_marginals(args.marginals, 3)
            maker = c5_general if noise_id == "c5" else c6_general
            fn = maker(base, f1, f2, f3)
        vals = fn(U, V)
        rows = [(U[i, j], V[i, j], vals[i, j])
                for i in range(U.shape[0]) for j in range(U.shape[1])]
        write_csv(args.out, _header(args, [f"noise: {noise_id}", f"base: {base.model_id()}",
                                           f"resolution: {args.resolution}"]),
                  ["u", "v", "value"], rows)
        if args.plot:
            plotting.plot_surface_pair(U[:, 0], V[0, :], vals, vals,
                                       _figure_path(args.out), f"{noise_id}({base.model_id()})")
        return 0
    raise SpecError("noise", f"unknown noise spec {args.noise!r}")


def cmd_simulate(args):
    model = apply_perturbation(_load_copula(args), parse_perturbation(args.perturb))
    sample = sample_chain(model, args.length, args.seed, start=args.start)
    comments = _header(args, [f"seed: {sample.seed}", f"model: {sample.model_id}",
                              f"generator: {sample.generator}",
                              f"start: {'stationary' if args.start is None else args.start}"])
    write_csv(args.out, comments, ["value"], [(v,) for v in sample.values])
    print(f"chain of {args.length} steps from {sample.model_id} written", file=sys.stderr)
    if args.plot:
        plotting.plot_chain(sample, _figure_path(args.out), sample.model_id)
    return 0


def cmd_regions(args):
    if args.noise:
        model = noise_copula(args.noise.lower())
    else:
        model = apply_perturbation(_load_copula(args), parse_perturbation(args.perturb))
    rmap = reachability_map(model, resolution=args.resolution)
    rows = [tuple(int(z) for z in row) for row in rmap.one_step_zero]
    cols = [f"v{j}" for j in range(args.resolution)]
    write_csv(args.out, _header(args, [f"model: {model.model_id()}",
                                       f"resolution: {args.resolution}",
                                       "cells: 1 = zero one-step density",
                                       "threshold: 1e-06"]), cols, rows)
    two_path = str(Path(args.out).with_name(Path(args.out).stem + "-two-step.csv"))
    write_csv(two_path, _header(args, [f"model: {model.model_id()}",
                                       f"resolution: {args.resolution}",
                                       "cells: 1 = zero two-step density",
                                       "threshold: 1e-06"]),
              cols, [tuple(int(z) for z in row) for row in rmap.two_step_zero])
    frac = rmap.one_step_zero.mean()
    print(f"one-step zero-density fraction: {frac:.3f}; "
          f"two-step fully reachable: {rmap.two_step_fully_reachable()}", file=sys.stderr)
    if args.plot:
        plotting.plot_region_map(rmap, _figure_path(args.out), model.model_id())
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "coeffs": cmd_coeffs,
    "mixing": cmd_mixing,
    "perturb-eval": cmd_perturb_eval,
    "noise-eval": cmd_noise_eval,
    "simulate": cmd_simulate,
    "regions": cmd_regions,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="copulab",
                                     description="copula perturbation and mixing laboratory")
    parser.add_argument("--version", action="version", version=f"copulab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default=256):
        p.add_argument("--copula", help="copula spec: inline JSON or a path to a JSON file")
        p.add_argument("--perturb", help="perturbation spec kind:theta (tilde, hat, mesiar, dolati)")
        p.add_argument("--marginals", help="marginal specs, e.g. 'uniform:0,1;normal:0,1;exponential:1'")
        p.add_argument("--grid", type=int, default=grid_default, help="quadrature/scan grid")
        p.add_argument("--n-max", type=int, default=4, dest="n_max", help="largest step count")
        p.add_argument("--seed", type=int, default=0, help="generator seed")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--no-plot", dest="plot", action="store_false",
                       help="skip the companion PNG figure")
        p.add_argument("--resolution", type=int, default=128, help="cell/evaluation resolution")
        p.add_argument("--tol", type=float, default=1e-6, help="validation tolerance")

    common(sub.add_parser("validate", help="check the copula axioms on a grid"), grid_default=64)
    common(sub.add_parser("coeffs", help="dependence coefficients as CSV"))
    common(sub.add_parser("mixing", help="mixing-coefficient decay table"),
           grid_default=128)
    common(sub.add_parser("perturb-eval", help="blend-perturbation identity report"))
    pn = sub.add_parser("noise-eval", help="noise copula closed form vs quadrature")
    common(pn)
    pn.add_argument("--noise", help="c5-m-uniform | c6-indep-uniform | c5 | c6 | c7")
    pn.set_defaults(resolution=33)
    ps = sub.add_parser("simulate", help="sample a stationary chain")
    common(ps)
    ps.add_argument("--length", type=int, default=10000)
    ps.add_argument("--start", type=float, default=None,
                    help="initial state (default: stationary uniform draw)")
    pr = sub.add_parser("regions", help="zero-density region maps")
    common(pr)
    pr.add_argument("--noise", help="closed-form noise copula id")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = f"{args.command.replace('-', '_')}.csv"
    try:
        if not 16 <= args.grid <= 1024:
            raise SpecError("grid", f"must lie in [16, 1024], got {args.grid}")
        return COMMANDS[args.command](args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NotADensity, NotACopula) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except MarginalMismatch as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    except CopulabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: energies, ladder decompositions, scale and
capacity builds, jump-form reports, and the verification suites.

All numeric output is printed with 12 significant digits and no timestamps,
so a run with a fixed configuration and seed reproduces its stdout byte for
byte.  Verdict tables additionally carry wall-clock runtimes in their CSV
column; everything else in the table is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import EnergyParams, dirichlet_energy, gagliardo_energy
from .grids import GridFunction, IntervalSet, PlateauSpec, StepFunction, \
    make_plateau
from .ladder import ladder_decompose
from .levy import LevyTriplet, PowerLawDensity, finite_variation_test, \
    growth_exponent_fit, levy_indicator_energy, levy_symbol
from .scalecap import FatCantorSpec, build_fat_cantor, capacity_estimate, \
    scale_from_open_set
from .verify import SUITES, list_checks, run_suite

__all__ = ["RunConfig", "main", "run", "emit_table"]


def _fmt(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "divergent"
    return f"{v:.12g}"


@dataclass
class RunConfig:
    """One CLI invocation: the command, its parameters, and run context."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = field(default_factory=Path)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems exit 1 (2 is reserved for verification failures)
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def parse_function_literal(text: str, step: float):
    """Grammar: indicator:a,b | plateau:a,b,rho[,profile] | bump:center,width
    | csv:path | json:path."""
    kind, _, rest = text.partition(":")
    if kind == "indicator":
        a, b = (float(t) for t in rest.split(","))
        return StepFunction(np.array([a, b]), np.array([1.0]))
    if kind == "plateau":
        parts = rest.split(",")
        a, b, rho = (float(t) for t in parts[:3])
        profile = parts[3] if len(parts) > 3 else "linear"
        return make_plateau(PlateauSpec(a, b, rho, profile), step)
    if kind == "bump":
        c, w = (float(t) for t in rest.split(","))
        return GridFunction.from_callable(
            lambda u: np.where(np.abs(u - c) < w,
                               np.cos(np.pi * (u - c) / (2.0 * w)) ** 2, 0.0),
            c - w, c + w, step, pad=4)
    if kind == "csv":
        return GridFunction.from_csv(Path(rest).read_text(encoding="utf-8"))
    if kind == "json":
        data = json.loads(Path(rest).read_text(encoding="utf-8"))
        return GridFunction.from_json_dict(data)
    raise ValueError(f"unknown function literal {text!r}")


def emit_table(records, path) -> None:
    """Verdict table with the fixed column schema."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["check_id", "status", "measured", "tolerance",
                         "runtime_ms"])
        for rec in records:
            writer.writerow([
                rec.check_id, rec.status,
                ";".join(_fmt(m) for m in rec.measured),
                _fmt(rec.tolerance), rec.runtime_ms,
            ])


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# -- subcommand implementations ----------------------------------------------------


def _cmd_energy(cfg: RunConfig) -> int:
    p = cfg.params
    f = parse_function_literal(p["function"], p["step"])
    alpha = p["alpha"]
    if alpha == 2.0:
        if isinstance(f, StepFunction):
            f = f.sample(p["step"])
        value = dirichlet_energy(f)
        print(f"dirichlet_energy = {_fmt(value)}")
        return 0
    rep = gagliardo_energy(f, EnergyParams(alpha=alpha))
    print(f"alpha = {_fmt(alpha)}")
    print(f"energy = {_fmt(rep.value)}"
          + (" (DIVERGENT)" if rep.divergent else ""))
    print(f"l2_norm_sq = {_fmt(rep.l2_norm_sq)}")
    print(f"e1 = {_fmt(rep.e1_value)}")
    for res, est in rep.refinement_trace:
        print(f"trace {res} {_fmt(est)}")
    out = p.get("out")
    if out:
        _write_json(rep.to_json_dict(), cfg.out_dir / out)
    return 0


def _cmd_ladder(cfg: RunConfig) -> int:
    p = cfg.params
    f = parse_function_literal(p["function"], p["step"])
    if isinstance(f, StepFunction):
        f = f.sample(p["step"])
    # the decomposition wants non-negative input; split signed functions
    vals = f.values
    parts = {}
    if np.any(vals > 0):
        parts["positive"] = f.with_values(np.maximum(vals, 0.0))
    if np.any(vals < 0):
        parts["negative"] = f.with_values(np.maximum(-vals, 0.0))
    result = {}
    trace_rows = []
    for name, part in parts.items():
        tree = ladder_decompose(part, max_nodes=p["max_nodes"],
                                sup_tol=p["sup_tol"])
        result[name] = tree.to_json_dict()
        flag = "converged" if tree.converged else "NOT_CONVERGED"
        print(f"{name}: nodes = {tree.n_nodes}, gap = {_fmt(tree.sup_gap())}, "
              f"{flag}")
        for n, gap in tree.trace:
            trace_rows.append([name, n, _fmt(gap)])
    _write_json(result, cfg.out_dir / p["tree_out"])
    with (cfg.out_dir / p["trace_out"]).open("w", encoding="utf-8",
                                             newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["part", "nodes", "sup_gap"])
        writer.writerows(trace_rows)
    return 0


def _cmd_scale(cfg: RunConfig) -> int:
    p = cfg.params
    if p.get("spec"):
        spec_data = json.loads(Path(p["spec"]).read_text(encoding="utf-8"))
        spec = FatCantorSpec(alpha=float(spec_data["alpha"]),
                             budget=float(spec_data["budget"]),
                             a_log=float(spec_data.get("a_log", 2.0)))
        n_intervals = int(spec_data.get("n_intervals", 63))
    else:
        spec = FatCantorSpec(alpha=p["alpha"], budget=p["budget"])
        n_intervals = p["n_intervals"]
    g = build_fat_cantor(spec, n_intervals)
    s = scale_from_open_set(g, density_window=(-1.0, 1.0))
    print(f"islands = {len(g)}")
    print(f"measure_in_unit_window = {_fmt(g.measure_between(-1.0, 1.0))}")
    print(f"density_depth = {s.density_depth}")
    _write_json(g.to_json_list(), cfg.out_dir / p["set_out"])
    xs = np.arange(-1.5, 1.5 + p["step"] / 2, p["step"])
    sv = s(xs)
    with (cfg.out_dir / p["scale_out"]).open("w", encoding="utf-8",
                                             newline="\n") as fh:
        for x, v in zip(xs, sv):
            fh.write(f"{_fmt(x)},{_fmt(v)}\n")
    return 0


def _cmd_capacity(cfg: RunConfig) -> int:
    p = cfg.params
    target = IntervalSet.from_json_list(
        json.loads(Path(p["target"]).read_text(encoding="utf-8"))
        if p["target"].endswith(".json")
        else json.loads(p["target"]))
    lo, hi = (float(t) for t in p["domain"].split(","))
    est = capacity_estimate(target, p["alpha_star"], (lo, hi), p["step"])
    print(f"capacity = {_fmt(est.value)}")
    print(f"residual = {_fmt(est.residual)}")
    print(f"resolution = {_fmt(est.resolution)}")
    print(f"clamp_violation = {_fmt(est.clamp_violation)}")
    out = p.get("out")
    if out:
        _write_json(est.to_json_dict(), cfg.out_dir / out)
    return 0


def _cmd_levy(cfg: RunConfig) -> int:
    p = cfg.params
    if p.get("triplet"):
        t = LevyTriplet.from_json_dict(
            json.loads(Path(p["triplet"]).read_text(encoding="utf-8")))
    else:
        atoms = tuple((float(a.split(":")[0]), float(a.split(":")[1]))
                      for a in p.get("atom", []))
        density = None
        if p.get("power_alpha") is not None:
            density = PowerLawDensity(p["power_alpha"],
                                      p.get("power_coef", 1.0))
        t = LevyTriplet(sigma=p.get("sigma", 0.0), atoms=atoms,
                        density=density)
    finite, value = finite_variation_test(t)
    print(f"finite_variation = {finite}"
          + (f" (integral = {_fmt(value)})" if finite else ""))
    if p.get("indicator"):
        a, b = (float(x) for x in p["indicator"].split(","))
        e = levy_indicator_energy(a, b, t)
        print(f"indicator_energy = {_fmt(e)}")
    xi = np.geomspace(p["xi_min"], p["xi_max"], p["n_xi"])
    xi = np.concatenate([-xi[::-1], xi])
    curve = levy_symbol(t, xi)
    out = p.get("symbol_out")
    if out:
        with (cfg.out_dir / out).open("w", encoding="utf-8", newline="\n") as fh:
            for x, v in zip(curve.xi_grid, curve.psi_values):
                fh.write(f"{_fmt(x)},{_fmt(v)}\n")
    try:
        fit = growth_exponent_fit(curve, max(1.0, p["xi_min"]))
        rel = "reliable" if fit.reliable else "unreliable"
        print(f"growth_fit alpha_hat = {_fmt(fit.alpha_hat)} "
              f"c_hat = {_fmt(fit.c_hat)} r2 = {_fmt(fit.r_squared)} ({rel})")
        if fit.reliable and fit.alpha_hat >= 1.0 - 0.02:
            # the numerical part certifies only the growth hypothesis; the
            # conclusion is supplied by the characterization theorem
            print("verdict: PROPER-SUBSPACES-EXIST "
                  "(theorem-backed; certified numerically: fitted symbol "
                  "growth exponent >= 1)")
    except ValueError as exc:
        print(f"growth_fit skipped: {exc}")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params
    if p.get("list"):
        for cid, num, doc in list_checks():
            print(f"{num:2d}  {cid}: {doc}")
        return 0
    suite = p["suite"]
    records = run_suite(suite, cfg.seed)
    print(f"suite = {suite}")
    print(f"seed = {cfg.seed}")
    for rec in records:
        measured = ", ".join(_fmt(m) for m in rec.measured)
        print(f"{rec.check_id}: {rec.status} (measured = [{measured}], "
              f"tolerance = {_fmt(rec.tolerance)})")
    if suite == "properness":
        ratio = records[0].measured[0]
        if records[0].status == "PASS" and ratio < 0.9:
            print(f"PROPER (ratio={_fmt(ratio)})")
        else:
            print(f"INCONCLUSIVE (ratio={_fmt(ratio)})")
    emit_table(records, cfg.out_dir / p["table_out"])
    n_fail = sum(1 for rec in records if not rec.passed)
    print(f"passed {len(records) - n_fail} / {len(records)}")
    return 2 if n_fail else 0


_COMMANDS = {
    "energy": _cmd_energy,
    "ladder": _cmd_ladder,
    "scale": _cmd_scale,
    "capacity": _cmd_capacity,
    "levy": _cmd_levy,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[cfg.command](cfg)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracform",
                     description="fractional energies, excursion ladders, "
                                 "scale functions, capacities, jump forms")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=None,
                        help="output directory (default: $FSL_OUT_DIR or .)")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    pe = sub.add_parser("energy", parents=[common],
                        help="fractional energy of a function")
    pe.add_argument("--alpha", type=float, required=True)
    pe.add_argument("--function", required=True)
    pe.add_argument("--step", type=float, default=1.0 / 256.0)
    pe.add_argument("--out", default=None, help="JSON report filename")

    pl = sub.add_parser("ladder", parents=[common], help="excursion decomposition")
    pl.add_argument("--function", required=True)
    pl.add_argument("--step", type=float, default=1.0 / 256.0)
    pl.add_argument("--max-nodes", type=int, default=256)
    pl.add_argument("--sup-tol", type=float, default=1e-6)
    pl.add_argument("--tree-out", default="ladder_tree.json")
    pl.add_argument("--trace-out", default="ladder_trace.csv")

    ps = sub.add_parser("scale", parents=[common], help="build an island set and its scale")
    ps.add_argument("--spec", default=None, help="JSON spec filename")
    ps.add_argument("--alpha", type=float, default=1.5)
    ps.add_argument("--budget", type=float, default=0.1)
    ps.add_argument("--n-intervals", type=int, default=63)
    ps.add_argument("--step", type=float, default=1.0 / 256.0)
    ps.add_argument("--set-out", default="open_set.json")
    ps.add_argument("--scale-out", default="scale.csv")

    pc = sub.add_parser("capacity", parents=[common], help="capacity of an interval set")
    pc.add_argument("--target", required=True,
                    help="JSON file or inline JSON list of [lo, hi] pairs")
    pc.add_argument("--alpha-star", type=float, required=True)
    pc.add_argument("--domain", required=True, help="lo,hi")
    pc.add_argument("--step", type=float, required=True)
    pc.add_argument("--out", default=None)

    pv = sub.add_parser("levy", parents=[common], help="jump-form reports")
    pv.add_argument("--triplet", default=None, help="JSON triplet filename")
    pv.add_argument("--sigma", type=float, default=0.0)
    pv.add_argument("--atom", action="append", default=[],
                    help="x:mass, repeatable")
    pv.add_argument("--power-alpha", type=float, default=None)
    pv.add_argument("--power-coef", type=float, default=1.0)
    pv.add_argument("--indicator", default=None, help="a,b")
    pv.add_argument("--xi-min", type=float, default=0.1)
    pv.add_argument("--xi-max", type=float, default=200.0)
    pv.add_argument("--n-xi", type=int, default=200)
    pv.add_argument("--symbol-out", default=None)

    pf = sub.add_parser("verify", parents=[common], help="run a verification suite")
    pf.add_argument("--suite", choices=sorted(SUITES), default="core")
    pf.add_argument("--list", action="store_true")
    pf.add_argument("--table-out", default="verdicts.csv")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "seed", "out_dir")}
    out_dir = args.out_dir or os.environ.get("FSL_OUT_DIR") or "."
    cfg = RunConfig(command=args.command, params=params, seed=args.seed,
                    out_dir=Path(out_dir))
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

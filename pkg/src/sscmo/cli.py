"""Command line driver: generate, solve, validate, metrics, export-lp, bench.

Exit codes: 0 success, 1 usage or input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import grid, metrics
from .instgen import PROFILES, ConfigError, generate, illustrative_config, load_config, tiny_config
from .mathfix import FixSolver
from .mathlagr import LagrSolver
from .milp import export_lp_format
from .ssc.builder import build_model, validate_solution
from .ssc.instance import SSCInstance, validate_instance

log = logging.getLogger("sscmo")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2
METHODS = ("exact", "lagr", "fix")
DEFAULT_TIME_LIMIT = 60.0
DEFAULT_GRID = 10


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def make_solver(method: str, time_limit: float, rel_gap: float, backend: str,
                trace: str | None = None, rule: str = "standard"):
    if method == "exact":
        return grid.ExactSolver(rel_gap=rel_gap, time_limit=time_limit, backend=backend)
    if method == "lagr":
        return LagrSolver(rel_gap=rel_gap, time_limit=time_limit, backend=backend,
                          trace_path=trace, rule=rule)
    if method == "fix":
        return FixSolver(rel_gap=rel_gap, time_limit=time_limit, backend=backend)
    raise UsageError(f"--method: unknown method {method!r}")


PRESETS = {"illustrative": illustrative_config, "tiny": tiny_config}


def preset_config(preset: str, config_path=None, **over):
    """Generator config for a named preset; ``std`` reads the key = value file."""
    if preset == "std":
        return load_config(config_path, **over)
    if config_path:
        raise UsageError("--config: cannot be combined with --preset other than std")
    seed = over.pop("seed", 1)
    cfg = PRESETS[preset](seed, **over)
    cfg.validate()
    return cfg


def _config(args):
    over = {k: v for k, v in (("seed", args.seed), ("periods", args.periods),
                              ("profile", args.profile)) if v is not None}
    return preset_config(args.preset, args.config, **over)


def _load_instance(path) -> SSCInstance:
    try:
        return SSCInstance.load(path)
    except FileNotFoundError:
        raise UsageError(f"--in: no such file {path}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--in: {exc}") from None


def cmd_generate(args) -> int:
    inst = generate(_config(args))
    if args.out:
        inst.save(args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(inst.dumps() + "\n")
    if inst.meta.get("capacity_guard") != "ok":
        log.warning("capacity guard failed; instance may be infeasible")
    return EXIT_OK


def solve_front(inst: SSCInstance, method: str, dg: int, eps: float, time_limit: float,
                rel_gap: float, backend: str, trace: str | None = None,
                rule: str = "standard") -> grid.ParetoFront:
    model = build_model(inst)
    solver = make_solver(method, time_limit, rel_gap, backend, trace, rule)
    try:
        front = grid.run(model, solver, dg=dg, eps=eps)
    except grid.InfeasibleModel as exc:
        raise SolverFailure(f"{method}: {exc}") from None
    if not front.points:
        raise SolverFailure(f"{method}: no feasible point found")
    return front


def cmd_solve(args) -> int:
    inst = _load_instance(args.inp)
    front = solve_front(inst, args.method, args.grid, args.eps, args.time_limit, args.rel_gap,
                        args.backend, args.trace, args.update_rule)
    front.save(args.out)
    log.info("%s: %d points, %d invocations, %.1f s -> %s", args.method, len(front.points),
             front.invocations, front.seconds, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _load_instance(args.inp)
    problems = validate_instance(inst)
    for p in problems:
        print(f"instance: {p}")
    if args.front and not problems:
        model = build_model(inst)
        front = grid.ParetoFront.load(args.front)
        for p in front.points:
            if not p.assignment:
                problems.append(f"point {p.id}: no assignment stored")
                continue
            for label, amount in validate_solution(inst, model, p.assignment, args.tol)[:10]:
                problems.append(f"point {p.id}: {label} violated by {amount:.3g}")
            f = model.evaluate(p.assignment)
            for k in metrics.OBJ:
                if metrics.gap(f[k], p.f[k]) > 1e-6:
                    problems.append(f"point {p.id}: stored {k} differs from recomputed value")
        for p in problems:
            print(p)
    if problems:
        return EXIT_USAGE
    print("ok")
    return EXIT_OK


def _read_ideal(spec: str, A, Z):
    if spec == "auto":
        return metrics.IdealPoint.of(A, Z)
    try:
        return metrics.IdealPoint.from_json(json.loads(Path(spec).read_text()))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"--ideal: {exc}") from None


def _load_front(flag: str, path: str) -> grid.ParetoFront:
    try:
        return grid.ParetoFront.load(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{flag}: {exc}") from None


def cmd_metrics(args) -> int:
    A = _load_front("--front", args.front)
    Z = _load_front("--ref", args.ref) if args.ref else A
    if not A.points or not Z.points:
        raise UsageError("--front/--ref: fronts must be non-empty")
    rep = metrics.report(A, Z, _read_ideal(args.ideal, A, Z), args.nweights)
    text = json.dumps(rep, sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    inst = _load_instance(args.inp)
    model = build_model(inst)
    mop = grid.build_single(model, args.objective)
    text = export_lp_format(mop.model, mop.objective)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        out.extend(range(int(lo), int(hi or lo) + 1))
    return out


def bench(profiles, periods, seeds, methods, dg: int, eps: float, time_limit: float,
          rel_gap: float, backend: str, outdir: Path | None = None,
          preset: str = "std") -> list[dict]:
    """One row per (instance, method); r2 is taken against the exact front when
    it was run, the ideal point over every front of the instance."""
    rows = []
    for profile in profiles:
        for T in periods:
            for seed in seeds:
                inst = generate(preset_config(preset, seed=seed, periods=T, profile=profile))
                name = f"{profile}_T{T}_s{seed}"
                if preset != "std":
                    name = f"{preset}_{name}"
                fronts = {}
                for m in methods:
                    try:
                        fronts[m] = solve_front(inst, m, dg, eps, time_limit, rel_gap, backend)
                    except SolverFailure as exc:
                        log.warning("%s: %s", name, exc)
                    if outdir and m in fronts:
                        fronts[m].save(outdir / f"{name}_{m}.json")
                if not fronts:
                    continue
                ref = fronts.get("exact") or next(iter(fronts.values()))
                ideal = metrics.IdealPoint.of(*fronts.values())
                for m, fr in fronts.items():
                    rows.append({
                        "instance": name, "method": m, "points": len(fr.points),
                        "invocations": fr.invocations, "solver_calls": fr.solver_calls,
                        "time_s": round(fr.seconds, 3),
                        "amid": metrics.amid(fr, ideal), "asns": metrics.asns(fr, ideal),
                        "r2": metrics.r2(fr, ref, ideal),
                    })
                log.info("%s done", name)
    return rows


def format_table(rows: list[dict]) -> str:
    cols = ["instance", "method", "points", "invocations", "solver_calls", "time_s", "amid",
            "asns", "r2"]
    cells = [[f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c]) for c in cols]
             for r in rows]
    width = [max(len(c), *(len(x[i]) for x in cells)) if cells else len(c)
             for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, width))]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, width)) for row in cells]
    return "\n".join(lines)


def cmd_bench(args) -> int:
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    rows = bench(args.profiles, args.periods, _seeds(args.seeds), args.methods, args.grid,
                 args.eps, args.time_limit, args.rel_gap, args.backend, outdir, args.preset)
    print(format_table(rows))
    if outdir:
        with open(outdir / "bench.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["instance"])
            w.writeheader()
            w.writerows(rows)
    if not rows:
        raise SolverFailure("bench: no method produced a front")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sscmo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    g = sub.add_parser("generate", help="sample an instance")
    g.add_argument("--seed", type=int)
    g.add_argument("--periods", type=int)
    g.add_argument("--profile", choices=PROFILES)
    g.add_argument("--preset", choices=("std", *PRESETS), default="std")
    g.add_argument("--config", help="key = value generator config file")
    g.add_argument("--out")

    def solver_flags(q, grid_default=DEFAULT_GRID):
        q.add_argument("--grid", type=int, default=grid_default)
        q.add_argument("--eps", type=float, default=1e-3)
        q.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT,
                       help="seconds per mono problem")
        q.add_argument("--rel-gap", type=float, default=1e-4)
        q.add_argument("--backend", choices=("highs", "builtin"), default="highs")

    s = sub.add_parser("solve", help="approximate the Pareto front of an instance")
    s.add_argument("--method", choices=METHODS, default="exact")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--trace", help="JSONL trace of Lagrangian iterations")
    s.add_argument("--update-rule", choices=("standard", "literal"), default="standard",
                   help="multiplier step of the Lagrangian method")
    solver_flags(s)

    v = sub.add_parser("validate", help="check an instance and, optionally, a front")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--front")
    v.add_argument("--tol", type=float, default=1e-6)

    m = sub.add_parser("metrics", help="amid, asns and r2 of a front")
    m.add_argument("--front", required=True)
    m.add_argument("--ref")
    m.add_argument("--ideal", default="auto")
    m.add_argument("--nweights", type=int, default=105)
    m.add_argument("--out")

    e = sub.add_parser("export-lp", help="write one mono-objective model in LP format")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--objective", choices=metrics.OBJ, default="eco")
    e.add_argument("--out")

    b = sub.add_parser("bench", help="profiles x horizons comparison of the three methods")
    b.add_argument("--profiles", nargs="+", choices=PROFILES, default=list(PROFILES))
    b.add_argument("--periods", nargs="+", type=int, default=[3, 5, 10])
    b.add_argument("--seeds", default="1", help="e.g. 1-5 or 1,3,7")
    b.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    b.add_argument("--preset", choices=("std", *PRESETS), default="std")
    b.add_argument("--out", help="directory for fronts and bench.csv")
    solver_flags(b)
    return p


HANDLERS = {"generate": cmd_generate, "solve": cmd_solve, "validate": cmd_validate,
            "metrics": cmd_metrics, "export-lp": cmd_export_lp, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.cmd is None:
            raise UsageError("sscmo: a subcommand is required")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        if getattr(args, "grid", 1) < 1:
            raise UsageError("--grid: must be at least 1")
        return HANDLERS[args.cmd](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Variable-fixing matheuristic for one mono problem.

Solve the LP of the mono problem with its strategic rows relaxed (the kept
variant used by the Lagrangian method, i.e. zero multipliers), read off which
entities and technologies the relaxation uses, fix the binaries accordingly,
put trip-count floors on the truck arcs it loads, and solve what is left.
When the fully fixed problem is infeasible, only the binaries at 1 are kept
fixed, and after that only the installation binaries at 1.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass, field

from .grid import MonoOutcome, MonoProblem, _point
from .mathlagr import build_prl, build_relaxation
from .milp import Block, SolveStats, fix_variables, solve_lp, solve_milp, tighten_bounds
from .milp.solve import DEFAULT_GAP

POSITIVE = 1e-6
FIX_LEVELS = ("all", "ones", "y-ones")


def restrict_fixes(fixes: dict[str, float], wprime, level: str) -> dict[str, float]:
    if level == "all":
        return dict(fixes)
    if level == "ones":
        return {v: x for v, x in fixes.items() if x == 1.0}
    if level == "y-ones":
        return {v: x for v, x in fixes.items() if x == 1.0 and v in wprime}
    raise ValueError(f"unknown fixing level {level!r}")


def binary_fixes(mop: MonoProblem, x: dict) -> dict[str, float]:
    """Y from implied utilisation of the capacity rows, Z as the strongest
    technology per (product, factory) group."""
    wprime = mop.base.wprime
    implied = defaultdict(float)
    for c in mop.model.rows(Block.RELAXABLE):
        for coeffs, rhs in c.as_le():
            for y, cy in coeffs.items():
                if y in wprime and cy < 0:
                    act = sum(a * x.get(v, 0.0) for v, a in coeffs.items() if v not in wprime)
                    implied[y] = max(implied[y], (act - rhs) / -cy)
    fixes = {y: 1.0 if implied[y] > POSITIVE else 0.0 for y in wprime}

    cat = mop.base.catalog
    factory_of = {zid: cat.Y[i] for (g, m, i), zid in cat.Z.items()}
    for zids in mop.base.z_groups:
        # largest relaxed value wins, ties to the first technology
        best = max(zids, key=lambda z: (x.get(z, 0.0), -zids.index(z)))
        for z in zids:
            fixes[z] = 1.0 if z == best and x.get(z, 0.0) > POSITIVE else 0.0
        if fixes[best] == 1.0:
            fixes[factory_of[best]] = 1.0
    return fixes


def trip_floors(mop: MonoProblem, x: dict) -> tuple[dict[str, float], dict[str, float]]:
    """Lower bounds on truck trips Q and fleets K implied by the relaxed flows."""
    tr = mop.base.transport
    cat = mop.base.catalog
    load = defaultdict(float)
    for (m, a, i, j, t), vid in cat.X.items():
        if a in tr["trucks"]:
            load[(a, i, j, t)] += tr["pw"][m] * x.get(vid, 0.0)
    q_lb, per_origin = {}, defaultdict(float)
    for key, w in load.items():
        if w <= POSITIVE:
            continue
        a, i, j, t = key
        n = min(math.ceil(w / tr["vcap"][a] - 1e-9), cat.bigm_q[(a, i, j)])
        q_lb[cat.Q[key]] = float(n)
        per_origin[(a, i, t)] += n
    k_lb = {}
    for (a, i, t), trips in per_origin.items():
        need = min(math.ceil(trips / tr["ntrips"][a] - 1e-9), cat.bigm_k[(a, i)])
        kid = cat.K[(a, i)]
        k_lb[kid] = max(k_lb.get(kid, 0.0), float(need))
    return q_lb, k_lb


@dataclass
class FixSolver:
    rel_gap: float = DEFAULT_GAP
    time_limit: float = math.inf
    backend: str = "highs"
    name: str = "fix"
    levels: tuple = FIX_LEVELS
    stats: SolveStats = field(default_factory=SolveStats)

    def solve_mono(self, mop: MonoProblem) -> MonoOutcome:
        return solve(mop, self)


def solve(mop: MonoProblem, params: FixSolver | None = None) -> MonoOutcome:
    params = params or FixSolver()
    t0 = time.perf_counter()
    relax = build_relaxation(mop)
    model, obj = build_prl(mop, [0.0] * relax.p, relax)
    lp = solve_lp(model, obj, backend=params.backend, stats=params.stats)
    if not lp.ok:
        return MonoOutcome(False, calls=1)
    x = lp.assignment
    fixes = binary_fixes(mop, x)
    q_lb, k_lb = trip_floors(mop, x)
    calls, res, level = 1, None, None
    for level in params.levels:
        restricted = fix_variables(mop.model, restrict_fixes(fixes, mop.base.wprime, level))
        restricted = tighten_bounds(restricted, lower={**q_lb, **k_lb})
        res = solve_milp(restricted, mop.objective, rel_gap=params.rel_gap,
                         time_limit=params.time_limit, backend=params.backend,
                         stats=params.stats)
        calls += 1
        if res.ok:
            break
    if res is None or not res.ok:
        return MonoOutcome(False, bound=lp.objective, calls=calls)
    pt = _point(mop, res.assignment, params.name, time.perf_counter() - t0)
    pt.info["fix_level"] = level
    return MonoOutcome(True, pt, lp.objective, res.objective, mop.slacks(res.assignment), calls)

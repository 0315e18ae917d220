"""Solver front door: ``solve_lp`` / ``solve_milp`` over two backends.

``builtin`` is the self-contained dense simplex + branch-and-bound; it is
deterministic and fine up to a few hundred columns. ``highs`` hands the same
matrices to HiGHS through :func:`scipy.optimize.milp` and is what the supply
chain pipeline uses at benchmark size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .bnb import branch_and_bound
from .model import LinObjective, Model, relax_integrality
from .result import MILPResult, Status, relative_gap
from .simplex import simplex

BACKENDS = ("builtin", "highs")
DEFAULT_GAP = 0.01


@dataclass
class SolveStats:
    """Running tally shared by the solves of one algorithm run."""

    lp_calls: int = 0
    milp_calls: int = 0
    nodes: int = 0
    seconds: float = 0.0
    by_kind: dict = field(default_factory=dict)

    def record(self, kind: str, result: MILPResult, seconds: float) -> None:
        if kind == "lp":
            self.lp_calls += 1
        else:
            self.milp_calls += 1
        self.nodes += result.nodes
        self.seconds += seconds
        self.by_kind[kind] = self.by_kind.get(kind, 0) + 1

    @property
    def calls(self) -> int:
        return self.lp_calls + self.milp_calls


def _finish(model: Model, objective: LinObjective, status: Status, x, best_bound: float,
            nodes: int) -> MILPResult:
    if x is None:
        return MILPResult(status, best_bound=best_bound, nodes=nodes)
    lo, hi = model.bounds()
    x = np.clip(np.asarray(x, dtype=float), lo, hi)
    integral = model.integrality().astype(bool)
    x[integral] = np.round(x[integral])
    obj = float(model.objective_vector(objective) @ x) + objective.constant
    if not math.isfinite(best_bound):
        best_bound = obj
    return MILPResult(status, model.to_assignment(x), obj, best_bound,
                      relative_gap(obj, best_bound), nodes)


def _highs(model: Model, objective: LinObjective, integral: bool, rel_gap: float,
           time_limit: float) -> MILPResult:
    c = model.objective_vector(objective)
    lo, hi = model.bounds()
    kwargs = {"c": c, "bounds": Bounds(lo, hi)}
    if model.constraints:
        A, rlo, rhi = model.matrix()
        kwargs["constraints"] = LinearConstraint(A, rlo, rhi)
    opts = {"disp": False, "presolve": True}
    if math.isfinite(time_limit):
        opts["time_limit"] = float(time_limit)
    if integral:
        kwargs["integrality"] = model.integrality()
        opts["mip_rel_gap"] = float(rel_gap)
    res = milp(options=opts, **kwargs)
    if res.status in (2, 4):
        # presolve can misjudge badly scaled rows as infeasible; confirm without it,
        # through the relaxation first since an unpresolved MILP search can stall
        plain = {**opts, "presolve": False}
        if integral:
            relaxed = milp(options=plain, **{k: v for k, v in kwargs.items()
                                              if k != "integrality"})
            if relaxed.status == 0:
                res = milp(options=plain, **kwargs)
        else:
            res = milp(options=plain, **kwargs)
    nodes = int(getattr(res, "mip_node_count", 0) or 0) if integral else 1
    nodes = max(nodes, 1)
    if res.status == 0:
        bound = getattr(res, "mip_dual_bound", None) if integral else None
        bound = (bound + objective.constant) if bound is not None and math.isfinite(bound) else math.nan
        return _finish(model, objective, Status.OPTIMAL, res.x, bound, nodes)
    if res.status == 1:
        if res.x is not None:
            bound = getattr(res, "mip_dual_bound", None)
            bound = (bound + objective.constant) if bound is not None else math.nan
            return _finish(model, objective, Status.TIME_LIMIT, res.x, bound, nodes)
        return MILPResult(Status.TIME_LIMIT, nodes=nodes)
    if res.status == 2:
        return MILPResult(Status.INFEASIBLE, nodes=nodes)
    if res.status == 3:
        return MILPResult(Status.UNBOUNDED, objective=-math.inf, nodes=nodes)
    # "other": HiGHS reports infeasible-or-unbounded this way on some presolve paths
    return MILPResult(Status.INFEASIBLE, nodes=nodes)


def solve_lp(model: Model, objective: LinObjective, backend: str = "builtin",
             stats: SolveStats | None = None) -> MILPResult:
    """Solve the continuous relaxation of ``model`` (integrality ignored)."""
    t0 = time.perf_counter()
    lp = relax_integrality(model)
    if backend == "highs":
        res = _highs(lp, objective, False, 0.0, math.inf)
    elif backend == "builtin":
        A, rlo, rhi = lp.matrix()
        lo, hi = lp.bounds()
        sol = simplex(lp.objective_vector(objective), A.toarray(), rlo, rhi, lo, hi)
        if sol.status == "infeasible":
            res = MILPResult(Status.INFEASIBLE, nodes=1)
        elif sol.status == "unbounded":
            res = MILPResult(Status.UNBOUNDED, objective=-math.inf, nodes=1)
        else:
            res = _finish(lp, objective, Status.OPTIMAL, sol.x, math.nan, 1)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if stats is not None:
        stats.record("lp", res, time.perf_counter() - t0)
    return res


def solve_milp(model: Model, objective: LinObjective, rel_gap: float = DEFAULT_GAP,
               time_limit: float = math.inf, backend: str = "builtin",
               stats: SolveStats | None = None) -> MILPResult:
    """Branch-and-bound to within ``rel_gap`` of the global bound, or until ``time_limit``."""
    if not model.n_discrete:
        return solve_lp(model, objective, backend=backend, stats=stats)
    t0 = time.perf_counter()
    if backend == "highs":
        res = _highs(model, objective, True, rel_gap, time_limit)
    elif backend == "builtin":
        A, rlo, rhi = model.matrix()
        lo, hi = model.bounds()
        status, x, _, bound, nodes = branch_and_bound(
            model.objective_vector(objective), A, rlo, rhi, lo, hi,
            model.integrality().astype(bool), rel_gap=rel_gap, time_limit=time_limit)
        if status is Status.UNBOUNDED:
            res = MILPResult(status, objective=-math.inf, nodes=nodes)
        else:
            res = _finish(model, objective, status, x, bound + objective.constant, nodes)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if stats is not None:
        stats.record("milp", res, time.perf_counter() - t0)
    return res

"""Lagrangian matheuristic for one mono problem.

The relaxable (strategic) rows are dualised with multipliers λ ≥ 0. Their
installation binaries are replaced by whichever value loosens each row most,
which keeps a valid relaxation in the problem while the multiplier term
prices the original rows. Each iteration:

1. solve the LP relaxation of the penalised problem -> x_RL, L(x_RL, λ);
2. fix every flow that is zero in x_RL, solve the restricted mono problem
   with integrality -> feasible point and upper bound (coarser zero patterns
   are tried when the per-period one leaves nothing feasible);
3. take a projected subgradient step on λ.
"""

from __future__ import annotations

import json
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grid import MonoOutcome, MonoProblem, SolutionPoint, _point
from .milp import (Block, LinConstraint, LinObjective, Model, Sense, SolveStats, fix_variables,
                   solve_lp, solve_milp)
from .milp.solve import DEFAULT_GAP

ZERO_FLOW = 1e-6
STEP_BY_OBJECTIVE = {"eco": 1e-6, "env": 1e-10, "soc": 1e-2}


class DimensionError(ValueError):
    pass


@dataclass
class Relaxation:
    """Relaxable rows of a mono problem in ``A x <= b`` form plus their kept variant."""

    A: sp.csr_matrix
    b: np.ndarray
    labels: list[str]
    kept: Model          # mono problem with relaxable rows swapped for kept variants

    @property
    def p(self) -> int:
        return len(self.b)

    def g(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b


def kept_variant(coeffs: dict, rhs: float, wprime) -> tuple[dict, float] | None:
    """Drop the w' terms of ``coeffs.x <= rhs`` at their loosest value (1 where the
    coefficient is negative, 0 otherwise). None when nothing is left."""
    rest = {v: c for v, c in coeffs.items() if v not in wprime}
    shift = sum(min(0.0, c) for v, c in coeffs.items() if v in wprime)
    if not rest:
        return None
    return rest, rhs - shift


def build_relaxation(mop: MonoProblem) -> Relaxation:
    model = mop.model
    idx = model.index
    wprime = mop.base.wprime
    data, ri, ci, b, labels = [], [], [], [], []
    kept_rows = []
    for c in model.constraints:
        if c.block is not Block.RELAXABLE:
            kept_rows.append(c)
            continue
        for k, (coeffs, rhs) in enumerate(c.as_le()):
            r = len(b)
            for v, a in coeffs.items():
                ri.append(r)
                ci.append(idx[v])
                data.append(a)
            b.append(rhs)
            label = c.label if k == 0 else f"{c.label}#{k}"
            labels.append(label)
            kv = kept_variant(coeffs, rhs, wprime)
            if kv is not None:
                kept_rows.append(LinConstraint(kv[0], Sense.LE, kv[1], f"{label}~kept", Block.KEPT))
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(b), len(model.vars)))
    return Relaxation(A, np.array(b, dtype=float), labels, Model(model.vars, tuple(kept_rows)))


def build_prl(mop: MonoProblem, lam, relax: Relaxation | None = None
              ) -> tuple[Model, LinObjective]:
    """Penalised problem: mono objective + λ·(A x - b) over the kept variant."""
    relax = relax or build_relaxation(mop)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (relax.p,):
        raise DimensionError(f"expected {relax.p} multipliers, got {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("multipliers must be nonnegative")
    model = relax.kept
    c = model.objective_vector(mop.objective) + relax.A.T @ lam
    ids = [v.id for v in model.vars]
    coeffs = {ids[k]: float(c[k]) for k in np.flatnonzero(c)}
    return model, LinObjective(coeffs, mop.objective.constant - float(lam @ relax.b))


def lagrangian_value(mop: MonoProblem, relax: Relaxation, lam, assignment) -> float:
    x = mop.model.to_vector(assignment)
    return mop.objective.value(assignment) + float(np.asarray(lam) @ relax.g(x))


@dataclass
class LagrangeState:
    lam: np.ndarray
    st: float
    kMax: int = 10
    k: int = 0
    UB: float = math.inf
    LB: float = -math.inf
    x_best: SolutionPoint | None = None
    trace: list = field(default_factory=list)

    def converged(self) -> bool:
        return math.isfinite(self.UB) and self.UB - self.LB <= 1e-6 * max(1.0, abs(self.UB))


def update_multipliers(state: LagrangeState, g_vec, L_val: float, rule: str = "standard",
                       g_feasible=None) -> np.ndarray:
    """Projected subgradient step.

    ``standard``: θ = st (UB - L) / ||g||², λ' = max(0, λ + θ g).
    ``literal``: every component set to st (UB - L) / ||g_f||, g_f taken at
    the feasible point when given.
    """
    g = np.asarray(g_vec, dtype=float)
    if rule == "standard":
        norm2 = float(g @ g)
        if norm2 == 0.0 or not math.isfinite(state.UB):
            return state.lam.copy()
        theta = state.st * (state.UB - L_val) / norm2
        return np.maximum(0.0, state.lam + theta * g)
    if rule == "literal":
        gf = g if g_feasible is None else np.asarray(g_feasible, dtype=float)
        norm = float(np.linalg.norm(gf))
        if norm == 0.0 or not math.isfinite(state.UB):
            return state.lam.copy()
        return np.full_like(state.lam, max(0.0, state.st * (state.UB - L_val) / norm))
    raise ValueError(f"unknown update rule {rule!r}")


FIX_LEVELS = ("period", "arc", "entity")


def zero_pattern(mop: MonoProblem, x_relaxed: dict, level: str = "period") -> frozenset:
    """Flow ids fixed to 0 by the feasibility heuristic.

    ``period``: every flow that is zero in ``x_relaxed``; ``arc``: flows on arcs
    unused in every period; ``entity``: flows touching an entity with no
    throughput at all.
    """
    X = mop.base.catalog.X
    if level == "period":
        return frozenset(v for v in X.values() if x_relaxed.get(v, 0.0) <= ZERO_FLOW)
    used = defaultdict(float)
    if level == "arc":
        for (m, a, i, j, t), v in X.items():
            used[(m, a, i, j)] += x_relaxed.get(v, 0.0)
        return frozenset(v for (m, a, i, j, t), v in X.items() if used[(m, a, i, j)] <= ZERO_FLOW)
    if level == "entity":
        for (m, a, i, j, t), v in X.items():
            used[i] += x_relaxed.get(v, 0.0)
            used[j] += x_relaxed.get(v, 0.0)
        return frozenset(v for (m, a, i, j, t), v in X.items()
                         if used[i] <= ZERO_FLOW or used[j] <= ZERO_FLOW)
    raise ValueError(f"unknown fixing level {level!r}")


def feasibility_heuristic(mop: MonoProblem, x_relaxed: dict, rel_gap: float = DEFAULT_GAP,
                          time_limit: float = math.inf, backend: str = "highs",
                          stats: SolveStats | None = None, levels=FIX_LEVELS):
    """Solve the full mono problem with the zero flows of ``x_relaxed`` fixed to 0.

    The per-period pattern is tried first; when the restricted problem is
    infeasible the coarser patterns in ``levels`` follow. Returns
    ``(MILPResult, level, solves)``; level is None when every pattern fails.
    """
    res, tried = None, set()
    for n, level in enumerate(levels, 1):
        zero = zero_pattern(mop, x_relaxed, level)
        if zero in tried:
            continue
        tried.add(zero)
        pf = fix_variables(mop.model, {v: 0.0 for v in zero})
        res = solve_milp(pf, mop.objective, rel_gap=rel_gap, time_limit=time_limit,
                         backend=backend, stats=stats)
        if res.ok:
            return res, level, len(tried)
    return res, None, len(tried)


@dataclass
class LagrSolver:
    kMax: int = 10
    st: float | None = None          # None: per-objective default
    lam0: float = 0.0
    rule: str = "standard"
    rel_gap: float = DEFAULT_GAP
    time_limit: float = math.inf
    backend: str = "highs"
    name: str = "lagr"
    trace_path: str | None = None
    levels: tuple = FIX_LEVELS
    stats: SolveStats = field(default_factory=SolveStats)
    last_state: LagrangeState | None = None

    def solve_mono(self, mop: MonoProblem) -> MonoOutcome:
        return solve(mop, self)


def solve(mop: MonoProblem, params: LagrSolver | None = None) -> MonoOutcome:
    params = params or LagrSolver()
    t0 = time.perf_counter()
    relax = build_relaxation(mop)
    st = params.st if params.st is not None else STEP_BY_OBJECTIVE[mop.primary]
    state = LagrangeState(np.full(relax.p, float(params.lam0)), st, params.kMax)
    params.last_state = state
    calls = 0
    cache: dict[frozenset, object] = {}
    best_assign = None

    for k in range(params.kMax + 1):
        state.k = k
        model, obj = build_prl(mop, state.lam, relax)
        lp = solve_lp(model, obj, backend=params.backend, stats=params.stats)
        calls += 1
        if not lp.ok:
            # the penalised problem relaxes the mono problem: nothing feasible exists
            state.trace.append({"k": k, "LB": None, "UB": _num(state.UB), "gnorm": None,
                                "feasible": False, "status": lp.status.value})
            break
        L = lp.objective
        state.LB = max(state.LB, L)
        x = model.to_vector(lp.assignment)
        g = relax.g(x)

        zero = zero_pattern(mop, lp.assignment)
        if zero in cache:
            res, level = cache[zero]
        else:
            res, level, n = feasibility_heuristic(mop, lp.assignment, params.rel_gap,
                                                  params.time_limit, params.backend,
                                                  params.stats, params.levels)
            calls += n
            cache[zero] = (res, level)
        feasible = res.ok
        g_f = None
        if feasible:
            if res.objective < state.UB:
                state.UB = res.objective
                best_assign = res.assignment
            g_f = relax.g(mop.model.to_vector(res.assignment))
        state.trace.append({"k": k, "LB": _num(state.LB), "UB": _num(state.UB), "L": L,
                            "gnorm": float(np.linalg.norm(g)), "feasible": feasible,
                            "fix_level": level})
        if state.converged() or k == params.kMax:
            break
        new = update_multipliers(state, g, L, params.rule, g_f)
        if np.array_equal(new, state.lam):
            break  # every later iteration would repeat this one
        state.lam = new

    if params.trace_path:
        with open(params.trace_path, "a") as fh:
            for row in state.trace:
                fh.write(json.dumps({"cell": mop.cell, "primary": mop.primary, **row}) + "\n")
    if best_assign is None:
        return MonoOutcome(False, bound=state.LB, calls=calls)
    pt = _point(mop, best_assign, params.name, time.perf_counter() - t0)
    state.x_best = pt
    return MonoOutcome(True, pt, state.LB, state.UB, mop.slacks(best_assign), calls)


def _num(v: float):
    return v if math.isfinite(v) else None

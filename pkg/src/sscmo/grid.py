"""Augmented ε-constraint grid over a pluggable mono-objective solver.

The economic objective is optimised while environmental and social objectives
are bounded by ε thresholds turned into equalities with nonnegative slacks.
Inner-loop cells are skipped using the social slack (bypass), and the inner
loop stops at the first infeasible cell.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .milp import (Block, LinConstraint, LinObjective, Model, Sense, SolveStats, VarSpec,
                   solve_milp)
from .milp.solve import DEFAULT_GAP
from .ssc.builder import TriObjectiveModel

OBJ = ("eco", "env", "soc")
L_ENV, L_SOC = "l_env", "l_soc"
EPS_ROW_TOL = 1e-6


@dataclass(frozen=True)
class PayoffBounds:
    fL: dict
    fU: dict

    def r(self, k: str) -> float:
        return max(0.0, self.fU[k] - self.fL[k])

    def to_json(self) -> dict:
        return {"fL": self.fL, "fU": self.fU}


@dataclass
class MonoProblem:
    base: TriObjectiveModel
    model: Model
    objective: LinObjective
    primary: str = "eco"
    eps_env: float | None = None
    eps_soc: float | None = None
    eps: float = 1e-3
    cell: tuple | None = None

    @property
    def slack_ids(self) -> tuple[str, ...]:
        return tuple(v for v, e in ((L_ENV, self.eps_env), (L_SOC, self.eps_soc)) if e is not None)

    def slacks(self, assignment) -> dict[str, float]:
        """ε minus the achieved objective, recomputed from the original variables."""
        out = {}
        if self.eps_env is not None:
            out[L_ENV] = self.eps_env - self.base.f_env.value(assignment)
        if self.eps_soc is not None:
            out[L_SOC] = self.eps_soc - self.base.f_soc.value(assignment)
        return out

    def eps_violations(self, assignment, tol: float = EPS_ROW_TOL) -> list[str]:
        bad = []
        for name, slack in self.slacks(assignment).items():
            eps = self.eps_env if name == L_ENV else self.eps_soc
            if slack < -tol * max(1.0, abs(eps)):
                bad.append(name)
        return bad


@dataclass
class SolutionPoint:
    assignment: dict
    f: dict                      # minimisation sense
    method: str = ""
    eps_env: float | None = None
    eps_soc: float | None = None
    cell: tuple | None = None
    time_s: float = 0.0
    id: int = -1
    info: dict = field(default_factory=dict)

    @property
    def vector(self) -> tuple[float, float, float]:
        return tuple(self.f[k] for k in OBJ)

    @property
    def f_prime(self) -> dict:
        return {"eco": -self.f["eco"], "env": self.f["env"], "soc": -self.f["soc"]}


@dataclass
class MonoOutcome:
    feasible: bool
    point: SolutionPoint | None = None
    bound: float = -math.inf       # lower bound on the mono objective
    value: float = math.nan        # mono objective at the returned point
    slack: dict = field(default_factory=dict)
    calls: int = 0                 # LP/MILP solves spent


class MonoSolver(Protocol):
    name: str

    def solve_mono(self, mop: MonoProblem) -> MonoOutcome: ...


def _point(mop: MonoProblem, assignment: dict, method: str, seconds: float) -> SolutionPoint:
    keep = {v.id: assignment[v.id] for v in mop.base.vars}
    return SolutionPoint(keep, mop.base.evaluate(keep), method, mop.eps_env, mop.eps_soc,
                         mop.cell, seconds)


@dataclass
class ExactSolver:
    """Branch-and-bound on the full mono problem."""

    rel_gap: float = DEFAULT_GAP
    time_limit: float = math.inf
    backend: str = "highs"
    name: str = "exact"
    stats: SolveStats = field(default_factory=SolveStats)

    def solve_mono(self, mop: MonoProblem) -> MonoOutcome:
        t0 = time.perf_counter()
        res = solve_milp(mop.model, mop.objective, rel_gap=self.rel_gap,
                         time_limit=self.time_limit, backend=self.backend, stats=self.stats)
        if not res.ok:
            return MonoOutcome(False, bound=res.best_bound, calls=1)
        pt = _point(mop, res.assignment, self.name, time.perf_counter() - t0)
        return MonoOutcome(True, pt, res.best_bound, res.objective, mop.slacks(res.assignment), 1)


# -- problem assembly -----------------------------------------------------------

def _eps_row(obj: LinObjective, slack: str, eps: float, label: str) -> LinConstraint:
    coeffs = dict(obj.coeffs)
    coeffs[slack] = 1.0
    return LinConstraint(coeffs, Sense.EQ, eps - obj.constant, label, Block.KEPT)


def build_mop(model: TriObjectiveModel, bounds: PayoffBounds | None, eps_env: float | None,
              eps_soc: float | None, eps: float = 1e-3, cell: tuple | None = None) -> MonoProblem:
    """f_eco - eps (l_env/r_env + 0.1 l_soc/r_soc) subject to f_env + l_env = ε_env and
    f_soc + l_soc = ε_soc. A threshold of None omits that ε row; a zero range drops
    its slack term from the objective."""
    vars, rows = [], []
    coeffs = dict(model.f_eco.coeffs)
    for slack, e, k, w in ((L_ENV, eps_env, "env", 1.0), (L_SOC, eps_soc, "soc", 0.1)):
        if e is None:
            continue
        vars.append(VarSpec(slack))
        rows.append(_eps_row(model.objectives[k], slack, e, f"eps_{k}"))
        r = bounds.r(k) if bounds is not None else 0.0
        if eps and r > 0:
            coeffs[slack] = -eps * w / r
    obj = LinObjective(coeffs, model.f_eco.constant)
    return MonoProblem(model, model.model.extended(vars, rows), obj, "eco", eps_env, eps_soc,
                       eps, cell)


def build_single(model: TriObjectiveModel, k: str) -> MonoProblem:
    """Optimise one objective alone (payoff table row)."""
    return MonoProblem(model, model.model, model.objectives[k], k)


def estimate_bounds(model: TriObjectiveModel, subsolver: MonoSolver,
                    log: list | None = None) -> tuple[PayoffBounds, list[SolutionPoint]]:
    """Optimise each objective individually. fL is the best bound reported by the
    subsolver, fU the worst value across the three incumbents."""
    incumbents, lows = [], {}
    for k in OBJ:
        mop = build_single(model, k)
        out = subsolver.solve_mono(mop)
        if log is not None:
            log.append({"phase": "payoff", "objective": k, "feasible": out.feasible,
                        "calls": out.calls})
        if not out.feasible:
            raise InfeasibleModel(f"no feasible point when optimising {k}")
        incumbents.append(out.point)
        bound = out.bound if math.isfinite(out.bound) else out.point.f[k]
        lows[k] = min(bound, out.point.f[k])
    fU = {k: max(p.f[k] for p in incumbents) for k in OBJ}
    fL = {k: min(lows[k], min(p.f[k] for p in incumbents)) for k in OBJ}
    return PayoffBounds(fL, fU), incumbents


class InfeasibleModel(RuntimeError):
    pass


# -- dominance ----------------------------------------------------------------

def dominates(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    n = len(F)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        le = np.all(F <= F[i], axis=1)
        lt = np.any(F < F[i], axis=1)
        if np.any(le & lt):
            keep[i] = False
    return keep


def filter_dominated(points: list) -> list:
    """Drop every point that another point weakly improves in all objectives and
    strictly in one. Accepts SolutionPoints or plain objective vectors."""
    if not points:
        return []
    vecs = [p.vector if isinstance(p, SolutionPoint) else tuple(p) for p in points]
    mask = nondominated_mask(np.array(vecs))
    return [p for p, k in zip(points, mask) if k]


# -- the grid -----------------------------------------------------------------

@dataclass
class ParetoFront:
    points: list
    method: str = ""
    bounds: PayoffBounds | None = None
    log: list = field(default_factory=list)
    invocations: int = 0
    solver_calls: int = 0
    seconds: float = 0.0

    def vectors(self) -> np.ndarray:
        return np.array([p.vector for p in self.points], dtype=float).reshape(-1, 3)

    def to_json(self, with_assignments: bool = True) -> dict:
        pts = []
        for p in self.points:
            d = {"id": p.id, "f_eco_prime": p.f_prime["eco"], "f_env_prime": p.f_prime["env"],
                 "f_soc_prime": p.f_prime["soc"], "eps_env": p.eps_env, "eps_soc": p.eps_soc,
                 "cell": list(p.cell) if p.cell else None, "method": p.method}
            if with_assignments:
                d["assignment"] = p.assignment
            pts.append(d)
        return {"schema": "sscmo.front/1", "method": self.method,
                "bounds": self.bounds.to_json() if self.bounds else None,
                "invocations": self.invocations, "solver_calls": self.solver_calls,
                "points": pts,
                "timing": {"total_s": self.seconds, "per_point_s": [p.time_s for p in self.points]}}

    def save(self, path: str | Path) -> None:
        """Writes ``path`` (JSON with assignments) and a CSV twin next to it."""
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), sort_keys=True, indent=1))
        with open(path.with_suffix(".csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "f_eco_prime", "f_env_prime", "f_soc_prime", "eps_env", "eps_soc",
                        "method", "time_s"])
            for p in self.points:
                fp = p.f_prime
                w.writerow([p.id, repr(fp["eco"]), repr(fp["env"]), repr(fp["soc"]),
                            repr(p.eps_env), repr(p.eps_soc), p.method, f"{p.time_s:.6f}"])

    @classmethod
    def load(cls, path: str | Path) -> ParetoFront:
        doc = json.loads(Path(path).read_text())
        pts = []
        for d in doc["points"]:
            f = {"eco": -d["f_eco_prime"], "env": d["f_env_prime"], "soc": -d["f_soc_prime"]}
            pts.append(SolutionPoint(d.get("assignment", {}), f, d.get("method", ""),
                                     d.get("eps_env"), d.get("eps_soc"),
                                     tuple(d["cell"]) if d.get("cell") else None, 0.0, d["id"]))
        b = doc.get("bounds")
        return cls(pts, doc.get("method", ""), PayoffBounds(b["fL"], b["fU"]) if b else None,
                   invocations=doc.get("invocations", 0))


def bypass_jump(slack: float, step: float) -> int:
    """Cells advanced after a feasible solve: 1 + floor(slack / step)."""
    if step <= 0:
        return 1
    return 1 + int(math.floor(max(0.0, slack) / step + 1e-9))


def run(model: TriObjectiveModel, subsolver: MonoSolver, dg: int = 10, eps: float = 1e-3,
        bounds: PayoffBounds | None = None, bypass: bool = True) -> ParetoFront:
    if dg < 1:
        raise ValueError("dg must be at least 1")
    t0 = time.perf_counter()
    log: list[dict] = []
    invocations = 0
    calls = 0
    if bounds is None:
        bounds, payoff = estimate_bounds(model, subsolver, log)
        invocations += 3
        calls += sum(e["calls"] for e in log)

    r_env, r_soc = bounds.r("env"), bounds.r("soc")
    n_env = dg if r_env > 0 else 1
    n_soc = dg if r_soc > 0 else 1
    step_env = r_env / dg
    step_soc = r_soc / dg

    found: list[SolutionPoint] = []
    gr_env, eps_env = 0, bounds.fU["env"]
    while gr_env < n_env:
        gr_soc, eps_soc = 0, bounds.fU["soc"]
        while gr_soc < n_soc:
            cell = (gr_env, gr_soc)
            mop = build_mop(model, bounds, eps_env, eps_soc, eps, cell)
            out = subsolver.solve_mono(mop)
            invocations += 1
            calls += out.calls
            entry = {"phase": "grid", "cell": list(cell), "eps_env": eps_env, "eps_soc": eps_soc,
                     "feasible": out.feasible, "calls": out.calls, "step_soc": step_soc}
            if out.feasible:
                l_soc = out.slack.get(L_SOC, 0.0)
                jump = bypass_jump(l_soc, step_soc) if bypass and n_soc > 1 else 1
                entry.update(l_soc=l_soc, l_env=out.slack.get(L_ENV, 0.0), jump=jump)
                found.append(out.point)
                gr_soc += jump
                eps_soc -= step_soc * jump
            else:
                gr_soc = n_soc
            log.append(entry)
        gr_env += 1
        eps_env -= step_env

    # identical objective vectors from different cells collapse to the first
    uniq, seen = [], set()
    for p in found:
        key = tuple(round(v, 9) for v in p.vector)
        if key not in seen:
            seen.add(key)
            uniq.append(p)
    front = filter_dominated(uniq)
    for k, p in enumerate(front):
        p.id = k
    return ParetoFront(front, subsolver.name, bounds, log, invocations, calls,
                       time.perf_counter() - t0)

"""Dense two-phase primal simplex (Dantzig pricing, Bland's rule against cycling).

Meant for desk-scale models (a few hundred rows/columns). Bounds are handled
by shifting to ``x' = x - lower`` and adding explicit rows for finite upper
bounds; no presolve, no warm starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError

PIVOT_TOL = 1e-7
FEAS_TOL = 1e-9
COST_TOL = 1e-9


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float = math.nan
    pivots: int = 0


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    nz = np.nonzero(col)[0]
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])


def _refresh(T: np.ndarray, basis: list[int], A0: np.ndarray, cost: np.ndarray) -> bool:
    """Rebuild the tableau from the original rows and the current basis."""
    m = len(basis)
    try:
        T[:m] = np.linalg.solve(A0[:, basis], A0)
    except np.linalg.LinAlgError:
        return False
    T[-1] = cost - cost[basis] @ T[:m]
    return True


def _run(T: np.ndarray, basis: list[int], ncols: int, max_pivots: int,
         A0: np.ndarray, cost: np.ndarray, every: int = 50) -> tuple[str, int]:
    """Minimise ``cost`` over columns ``< ncols``; ``A0`` holds the original rows.

    The last row of ``T`` stores reduced costs; its last entry is ``-z``. Dantzig
    pricing, switching for good to Bland's rule after a run of (near-)degenerate
    pivots so it cannot cycle. The tableau is rebuilt from ``A0`` every ``every``
    pivots and before optimality is declared, so roundoff cannot accumulate.
    """
    m = T.shape[0] - 1
    pivots = 0
    stalled = 0
    since = 0
    bland = False
    while True:
        if since >= every:
            _refresh(T, basis, A0, cost)
            since = 0
        costs = T[-1, :ncols]
        entering = np.flatnonzero(costs < -COST_TOL)
        if entering.size == 0:
            if since and _refresh(T, basis, A0, cost):
                since = 0
                continue
            return "optimal", pivots
        bland = bland or stalled > 50
        c = int(entering[0]) if bland else int(entering[np.argmin(costs[entering])])
        col = T[:m, c]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if pos.size == 0:
            return "unbounded", pivots
        # two-pass (Harris) ratio test: among rows within a small feasibility
        # tolerance of the minimum ratio take the largest pivot element, which keeps
        # roundoff from growing; basic values nudged below zero count as zero
        rhs = np.maximum(T[pos, -1], 0.0)
        ratios = rhs / col[pos]
        best = ratios.min()
        if bland:
            # Bland needs the exact minimum-ratio ties
            tied = pos[ratios <= best + 1e-12 * max(1.0, best)]
            r = int(min(tied, key=lambda i: basis[i]))
        else:
            cut = ((rhs + FEAS_TOL) / col[pos]).min()
            tied = pos[ratios <= cut]
            r = int(tied[np.argmax(col[tied])])
        stalled = stalled + 1 if best <= 1e-9 else 0
        _pivot(T, r, c)
        basis[r] = c
        pivots += 1
        since += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")


def simplex(c: np.ndarray, A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray,
            lower: np.ndarray, upper: np.ndarray, max_pivots: int = 200_000) -> LPSolution:
    """Minimise ``c.x`` s.t. ``row_lo <= A x <= row_hi``, ``lower <= x <= upper``."""
    n = len(c)
    if np.any(~np.isfinite(lower)):
        raise DomainError("builtin simplex needs finite lower bounds")
    if np.any(lower > upper):
        return LPSolution("infeasible")
    A = np.asarray(A, dtype=float)
    shift = A @ lower if n else np.zeros(A.shape[0])

    # rows as (coeff row, sense, rhs), sense in {"<=", ">=", "="}
    rows: list[tuple[np.ndarray, str, float]] = []
    for r in range(A.shape[0]):
        lo, hi = row_lo[r], row_hi[r]
        if lo == hi:
            rows.append((A[r], "=", hi - shift[r]))
            continue
        if math.isfinite(hi):
            rows.append((A[r], "<=", hi - shift[r]))
        if math.isfinite(lo):
            rows.append((A[r], ">=", lo - shift[r]))
    for j in range(n):
        if math.isfinite(upper[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append((e, "<=", upper[j] - lower[j]))

    # equilibrate rows so pivot and cost tolerances mean the same thing everywhere
    rows = [(a / sc, sense, b / sc) if (sc := np.abs(a).max(initial=0.0)) > 0 else (a, sense, b)
            for a, sense, b in rows]

    m = len(rows)
    n_slack = sum(1 for _, s, _ in rows if s != "=")
    # columns: structural | slack | artificial | rhs
    n_art_max = m
    width = n + n_slack + n_art_max + 1
    T = np.zeros((m + 1, width))
    basis = [-1] * m
    s_col = n
    a_col = n + n_slack
    arts = []
    for i, (a, sense, b) in enumerate(rows):
        T[i, :n] = a
        if sense == "<=":
            T[i, s_col] = 1.0
        elif sense == ">=":
            T[i, s_col] = -1.0
        slack = s_col if sense != "=" else None
        if sense != "=":
            s_col += 1
        T[i, -1] = b
        if b < 0:
            T[i, :-1] *= -1
            T[i, -1] *= -1
        if slack is not None and T[i, slack] > 0:
            basis[i] = slack
        else:
            T[i, a_col] = 1.0
            basis[i] = a_col
            arts.append(a_col)
            a_col += 1
    n_cols = a_col
    T = np.delete(T, np.s_[n_cols:width - 1], axis=1)
    A0 = T[:m].copy()

    pivots = 0
    if arts:
        # phase I: minimise sum of artificials
        T[-1, :] = 0.0
        for i, b in enumerate(basis):
            if b >= n + n_slack:
                T[-1, :] -= T[i, :]
        for col in arts:
            T[-1, col] += 1.0
        cost = np.zeros(T.shape[1])
        cost[arts] = 1.0
        status, p = _run(T, basis, n_cols, max_pivots, A0, cost)
        pivots += p
        if -T[-1, -1] > 1e-7 * max(1.0, np.abs(T[:m, -1]).max(initial=0.0)):
            return LPSolution("infeasible", pivots=pivots)
        # drive remaining artificials out of the basis
        keep = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                row = np.abs(T[i, :n + n_slack])
                j = int(np.argmax(row)) if row.size else 0
                if row.size and row[j] > PIVOT_TOL:
                    _pivot(T, i, j)
                    basis[i] = j
                    keep.append(i)
                # else: redundant row, dropped below
            else:
                keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[n + n_slack:n_cols], axis=1)
        A0 = np.delete(A0[keep], np.s_[n + n_slack:n_cols], axis=1)
        m = len(basis)
    n_cols = n + n_slack

    # phase II
    cost = np.zeros(T.shape[1])
    # unit-scaled costs, so COST_TOL is relative to the largest coefficient
    cost[:n] = c / max(np.abs(c).max(initial=0.0), 1e-300) if n else c
    if not _refresh(T, basis, A0, cost):
        T[-1] = cost - cost[basis] @ T[:m]
    status, p = _run(T, basis, n_cols, max_pivots, A0, cost)
    pivots += p
    if status == "unbounded":
        return LPSolution("unbounded", pivots=pivots)
    xs = np.zeros(n_cols)
    for i, b in enumerate(basis):
        xs[b] = T[i, -1]
    x = xs[:n] + lower
    return LPSolution("optimal", x=x, objective=float(c @ x), pivots=pivots)

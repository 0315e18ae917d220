"""Best-bound branch-and-bound over the builtin simplex."""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from .model import TOL_INT
from .result import MILPResult, Status, relative_gap
from .simplex import simplex


def branch_and_bound(c, A, row_lo, row_hi, lower, upper, integral: np.ndarray,
                     rel_gap: float = 0.01, time_limit: float = math.inf,
                     ) -> tuple[Status, np.ndarray | None, float, float, int]:
    """Returns ``(status, x, objective, best_bound, nodes)``.

    Node selection is best-bound (ties by creation order); branching picks the
    most fractional integer variable, ties broken by lowest column index.
    """
    t0 = time.perf_counter()
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)
    integral = np.asarray(integral, dtype=bool)
    lower = lower.copy()
    upper = upper.copy()
    lower[integral] = np.ceil(lower[integral] - TOL_INT)
    upper[integral] = np.floor(upper[integral] + TOL_INT)

    nodes = 0
    root = simplex(c, A, row_lo, row_hi, lower, upper)
    nodes += 1
    if root.status == "infeasible":
        return Status.INFEASIBLE, None, math.nan, math.nan, nodes
    if root.status == "unbounded":
        return Status.UNBOUNDED, None, -math.inf, -math.inf, nodes

    inc_x, inc_val = None, math.inf
    seq = 0
    heap = [(root.objective, seq, lower, upper, root.x)]
    timed_out = False
    while heap:
        bound = heap[0][0]
        if inc_x is not None and relative_gap(inc_val, bound) <= rel_gap:
            break
        if time.perf_counter() - t0 > time_limit:
            timed_out = True
            break
        val, _, lo, hi, x = heapq.heappop(heap)
        if val >= inc_val:
            continue
        frac = np.abs(x - np.round(x))
        frac[~integral] = 0.0
        if frac.max(initial=0.0) <= TOL_INT:
            inc_x, inc_val = x, val
            continue
        # most fractional: distance to .5 smallest; argmin takes the lowest index on ties
        dist = np.where(frac > TOL_INT, np.abs((x - np.floor(x)) - 0.5), np.inf)
        j = int(np.argmin(dist))
        for side in ("down", "up"):
            nlo, nhi = lo.copy(), hi.copy()
            if side == "down":
                nhi[j] = math.floor(x[j])
            else:
                nlo[j] = math.ceil(x[j])
            if nlo[j] > nhi[j]:
                continue
            sol = simplex(c, A, row_lo, row_hi, nlo, nhi)
            nodes += 1
            if sol.status != "optimal" or sol.objective >= inc_val:
                continue
            seq += 1
            heapq.heappush(heap, (sol.objective, seq, nlo, nhi, sol.x))

    best_bound = min([inc_val] + [h[0] for h in heap])
    if inc_x is None:
        if timed_out:
            return Status.TIME_LIMIT, None, math.nan, best_bound, nodes
        return Status.INFEASIBLE, None, math.nan, math.nan, nodes
    if timed_out:
        return Status.TIME_LIMIT, inc_x, inc_val, best_bound, nodes
    x = inc_x.copy()
    x[integral] = np.round(x[integral])
    return Status.OPTIMAL, x, float(c @ x), best_bound, nodes

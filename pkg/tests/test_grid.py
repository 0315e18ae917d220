import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import dominance_oracle
from sscmo.grid import (L_ENV, L_SOC, ExactSolver, MonoOutcome, ParetoFront, PayoffBounds,
                        SolutionPoint, build_mop, build_single, bypass_jump, dominates,
                        estimate_bounds, filter_dominated, run)
from sscmo.instgen import generate, tiny_config
from sscmo.mathlagr import LagrSolver
from sscmo.milp import solve_milp
from sscmo.ssc.builder import build_model, validate_solution


@pytest.fixture(scope="module")
def tiny():
    inst = generate(tiny_config())
    return inst, build_model(inst)


@pytest.fixture(scope="module")
def exact_front(tiny):
    return run(tiny[1], ExactSolver(rel_gap=0.0), dg=4)


class Scripted:
    """Feasible at every cell, reporting a fixed social slack; logs the cells."""

    name = "scripted"

    def __init__(self, l_soc, feasible=lambda cell: True):
        self.l_soc, self.feasible, self.cells = l_soc, feasible, []

    def solve_mono(self, mop):
        self.cells.append((mop.eps_env, mop.eps_soc))
        if mop.cell is not None and not self.feasible(mop.cell):
            return MonoOutcome(False, calls=1)
        f = {"eco": -float(len(self.cells)), "env": 0.0, "soc": 0.0}
        pt = SolutionPoint({}, f, self.name, mop.eps_env, mop.eps_soc, mop.cell)
        return MonoOutcome(True, pt, f["eco"], f["eco"], {L_SOC: self.l_soc, L_ENV: 0.0}, 1)


BOUNDS = PayoffBounds({"eco": -10.0, "env": 0.0, "soc": 0.0},
                      {"eco": 0.0, "env": 40.0, "soc": 100.0})


# -- bypass ---------------------------------------------------------------------

def test_bypass_jump_example():
    assert bypass_jump(25.0, 10.0) == 3
    assert bypass_jump(0.0, 10.0) == 1
    assert bypass_jump(-1e-12, 10.0) == 1


def test_bypass_moves_eps_down_by_jump_times_step(tiny):
    s = Scripted(l_soc=25.0)
    front = run(tiny[1], s, dg=10, bounds=BOUNDS)
    inner = [e for e in front.log if e["cell"][0] == 0]
    assert [e["cell"][1] for e in inner] == [0, 3, 6, 9]
    assert [e["eps_soc"] for e in inner] == pytest.approx([100.0, 70.0, 40.0, 10.0])


def test_one_cell_per_env_value_when_dg_is_one(tiny):
    s = Scripted(l_soc=0.0)
    front = run(tiny[1], s, dg=1, bounds=BOUNDS)
    assert front.invocations == 1 and len(s.cells) == 1


def test_infeasible_first_cell_gives_empty_front(tiny):
    s = Scripted(l_soc=0.0, feasible=lambda cell: False)
    front = run(tiny[1], s, dg=3, bounds=BOUNDS)
    assert front.points == []
    # every env value tries its first soc cell once then leaves the inner loop
    assert front.invocations == 3


def test_infeasible_cell_ends_inner_loop(tiny):
    s = Scripted(l_soc=0.0, feasible=lambda cell: cell[1] < 2)
    front = run(tiny[1], s, dg=4, bounds=BOUNDS)
    assert front.invocations == 4 * 3


def test_degenerate_range_collapses_axis(tiny):
    flat = PayoffBounds(BOUNDS.fL, {**BOUNDS.fU, "env": 0.0})
    s = Scripted(l_soc=0.0)
    run(tiny[1], s, dg=5, bounds=flat)
    assert len(s.cells) == 5
    mop = build_mop(tiny[1], flat, 0.0, 100.0)
    assert L_ENV not in mop.objective.coeffs and L_SOC in mop.objective.coeffs


def test_bypass_never_adds_subproblems(tiny):
    a = run(tiny[1], ExactSolver(), dg=4)
    b = run(tiny[1], ExactSolver(), dg=4, bypass=False)
    assert a.invocations <= b.invocations
    assert a.invocations - 3 <= 16


# -- MOP assembly ---------------------------------------------------------------

def test_eps_zero_is_plain_economic_objective(tiny):
    _, tm = tiny
    mop = build_mop(tm, BOUNDS, 10.0, 5.0, eps=0.0)
    assert mop.objective.coeffs == tm.f_eco.coeffs


def test_objective_weights(tiny):
    _, tm = tiny
    mop = build_mop(tm, BOUNDS, 10.0, 5.0, eps=1e-3)
    assert mop.objective.coeffs[L_ENV] == pytest.approx(-1e-3 / 40.0)
    assert mop.objective.coeffs[L_SOC] == pytest.approx(-1e-3 * 0.1 / 100.0)


def test_env_slack_is_full_headroom(tiny):
    _, tm = tiny
    single = solve_milp(tm.model, tm.f_env, rel_gap=0.0, backend="highs")
    top = tm.f_env.value(single.assignment) + 50.0
    mop = build_mop(tm, BOUNDS, top, None)
    r = solve_milp(mop.model, mop.objective, rel_gap=0.0, backend="highs")
    assert r.assignment[L_ENV] == pytest.approx(top - tm.f_env.value(r.assignment), abs=1e-6)
    assert mop.slacks(r.assignment)[L_ENV] == pytest.approx(r.assignment[L_ENV], abs=1e-6)


def test_estimate_bounds_single_point_region(tiny):
    class Same:
        name = "same"

        def solve_mono(self, mop):
            pt = SolutionPoint({}, {"eco": 1.0, "env": 2.0, "soc": 3.0})
            return MonoOutcome(True, pt, pt.f[mop.primary], pt.f[mop.primary], {}, 1)

    b, _ = estimate_bounds(tiny[1], Same())
    assert all(b.r(k) == 0.0 for k in ("eco", "env", "soc"))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_heuristic_bounds_bracket_exact_optimum(seed):
    tm = build_model(generate(tiny_config(seed=seed)))
    b, _ = estimate_bounds(tm, LagrSolver())
    for k in ("eco", "env", "soc"):
        opt = solve_milp(tm.model, tm.objectives[k], rel_gap=0.0, backend="highs").objective
        tol = 1e-6 * max(1.0, abs(opt))
        assert b.fL[k] - tol <= opt <= b.fU[k] + tol


# -- runs -------------------------------------------------------------------------

def test_exact_run_points_feasible_and_within_eps(tiny, exact_front):
    inst, tm = tiny
    assert exact_front.points
    for p in exact_front.points:
        assert validate_solution(inst, tm, p.assignment) == []
        mop = build_mop(tm, exact_front.bounds, p.eps_env, p.eps_soc)
        assert mop.eps_violations(p.assignment, 1e-6) == []


def test_no_cell_solved_twice(exact_front):
    pairs = [(e["eps_env"], e["eps_soc"]) for e in exact_front.log if e["phase"] == "grid"]
    assert len(pairs) == len(set(pairs))
    assert len(pairs) <= 16


def test_front_is_antichain(exact_front):
    F = exact_front.vectors()
    for a in F:
        assert not any(dominates(b, a) for b in F)


def test_front_save_load(tmp_path, exact_front):
    path = tmp_path / "front.json"
    exact_front.save(path)
    back = ParetoFront.load(path)
    assert np.array_equal(back.vectors(), exact_front.vectors())
    assert back.points[0].assignment == exact_front.points[0].assignment
    with open(path.with_suffix(".csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "f_eco_prime", "f_env_prime", "f_soc_prime", "eps_env", "eps_soc",
                       "method", "time_s"]
    assert len(rows) == len(exact_front.points) + 1
    assert float(rows[1][1]) == -exact_front.points[0].f["eco"]


def test_bad_dg():
    with pytest.raises(ValueError):
        run(None, ExactSolver(), dg=0)


# -- dominance --------------------------------------------------------------------

def test_filter_examples():
    assert filter_dominated([(1, 1, 1), (2, 2, 2)]) == [(1, 1, 1)]
    assert filter_dominated([(1, 2, 3), (3, 2, 1)]) == [(1, 2, 3), (3, 2, 1)]
    assert filter_dominated([]) == []
    # equal vectors do not dominate each other
    assert filter_dominated([(1, 1, 1), (1, 1, 1)]) == [(1, 1, 1), (1, 1, 1)]


@given(st.integers(0, 2**31), st.integers(1, 50))
def test_filter_matches_pairwise_oracle(seed, n):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 6, size=(n, 3)).astype(float)
    got = filter_dominated([tuple(r) for r in F])
    want = [tuple(F[i]) for i in dominance_oracle(F)]
    assert got == want

import numpy as np
import pytest

from sscmo.grid import ExactSolver, build_mop, build_single, estimate_bounds
from sscmo.instgen import generate, illustrative_config, tiny_config
from sscmo.mathfix import FIX_LEVELS, FixSolver, binary_fixes, restrict_fixes, solve, trip_floors
from sscmo.mathlagr import build_prl, build_relaxation
from sscmo.milp import solve_lp
from sscmo.ssc.builder import build_model, validate_solution


@pytest.fixture(scope="module")
def tiny():
    inst = generate(tiny_config())
    return inst, build_model(inst)


def test_trip_floor_ceiling():
    inst = generate(tiny_config())
    fp = inst.of_kind("fp")[0]
    inst.arrays["pw"] = inst.pw.copy()
    inst.arrays["pw"][fp] = 2.0
    inst.arrays["vcap"] = np.full_like(inst.vcap, 20.0)
    tm = build_model(inst)
    cat = tm.catalog
    key, xid = next((k, v) for k, v in cat.X.items()
                    if k[0] == fp and k[1] in inst.of_kind("truck"))
    m, a, i, j, t = key
    # 22.5 units of 2 kg on a 20 kg truck
    q_lb, k_lb = trip_floors(build_single(tm, "eco"), {xid: 22.5})
    assert q_lb == {cat.Q[(a, i, j, t)]: 3.0}
    assert k_lb == {cat.K[(a, i)]: float(np.ceil(3 / inst.ntrips[a]))}


def test_floors_never_exceed_big_m(tiny):
    _, tm = tiny
    cat = tm.catalog
    x = {v: 1e9 for v in tm.flow_ids}
    q_lb, k_lb = trip_floors(build_single(tm, "eco"), x)
    assert q_lb
    rev = cat.reverse()
    for qid, lb in q_lb.items():
        a, i, j, t = rev[qid][1]
        assert lb == cat.bigm_q[(a, i, j)]
    for kid, lb in k_lb.items():
        assert lb <= cat.bigm_k[rev[kid][1]]


def test_binary_fixes_pick_one_technology_per_group(tiny):
    _, tm = tiny
    mop = build_single(tm, "eco")
    relax = build_relaxation(mop)
    model, obj = build_prl(mop, np.zeros(relax.p), relax)
    x = solve_lp(model, obj, backend="highs").assignment
    fixes = binary_fixes(mop, x)
    assert set(tm.wprime) <= set(fixes)
    for group in tm.z_groups:
        assert sum(fixes[z] for z in group) <= 1.0
    assert all(v in (0.0, 1.0) for v in fixes.values())


def test_restrict_levels():
    fixes = {"Y(a)": 1.0, "Y(b)": 0.0, "Z(g,m,a)": 1.0, "Z(h,m,a)": 0.0}
    wprime = {"Y(a)", "Y(b)"}
    assert restrict_fixes(fixes, wprime, "all") == fixes
    assert restrict_fixes(fixes, wprime, "ones") == {"Y(a)": 1.0, "Z(g,m,a)": 1.0}
    assert restrict_fixes(fixes, wprime, "y-ones") == {"Y(a)": 1.0}
    with pytest.raises(ValueError):
        restrict_fixes(fixes, wprime, "none")


@pytest.mark.parametrize("k", ["eco", "env", "soc"])
def test_points_are_feasible(tiny, k):
    inst, tm = tiny
    out = solve(build_single(tm, k))
    assert out.feasible
    assert out.point.info["fix_level"] in FIX_LEVELS
    assert validate_solution(inst, tm, out.point.assignment) == []
    # the relaxation value bounds the restricted optimum
    assert out.bound <= out.value + 1e-6 * max(1.0, abs(out.value))
    assert out.calls >= 2


def test_grid_cell_point_within_eps(tiny):
    inst, tm = tiny
    bounds, _ = estimate_bounds(tm, ExactSolver())
    mop = build_mop(tm, bounds, bounds.fU["env"], bounds.fU["soc"])
    out = FixSolver().solve_mono(mop)
    assert out.feasible
    assert mop.eps_violations(out.point.assignment) == []
    assert validate_solution(inst, tm, out.point.assignment) == []


def test_illustrative_points_feasible():
    inst = generate(illustrative_config())
    tm = build_model(inst)
    out = solve(build_single(tm, "soc"))
    assert out.feasible
    assert validate_solution(inst, tm, out.point.assignment) == []

"""Compile an SSCInstance into a tri-objective MILP.

Strategic rows (the ones linking flows, stocks, areas, trips and fleets to the
installation binaries Y and technology binaries Z) go in the relaxable block.
The tactical core is a minimal flow/inventory model; every such row carries a
``reconstructed:`` label prefix so it can be told apart and swapped.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from ..milp import Block, LinConstraint, LinObjective, Model, Sense, VarSpec
from .catalog import VariableCatalog, build_catalog
from .instance import SSCInstance

REC = "reconstructed:"


@dataclass(frozen=True)
class TriObjectiveModel:
    vars: tuple[VarSpec, ...]
    constraints: tuple[LinConstraint, ...]
    f_eco: LinObjective
    f_env: LinObjective
    f_soc: LinObjective
    catalog: VariableCatalog | None = None
    # installation binaries (w'); the remaining binaries are w''
    wprime: frozenset = field(default_factory=frozenset)
    flow_ids: tuple[str, ...] = ()
    # technology binaries competing in one (product, factory) selection row
    z_groups: tuple[tuple[str, ...], ...] = ()
    # truck data used to derive trip floors: trucks, pw, vcap, ntrips
    transport: dict = field(default_factory=dict)

    @cached_property
    def model(self) -> Model:
        return Model(tuple(self.vars), tuple(self.constraints))

    @property
    def objectives(self) -> dict[str, LinObjective]:
        return {"eco": self.f_eco, "env": self.f_env, "soc": self.f_soc}

    def evaluate(self, assignment) -> dict[str, float]:
        """Minimisation-sense objective values."""
        return {k: o.value(assignment) for k, o in self.objectives.items()}


def _row(coeffs: dict, sense: Sense, rhs: float, label: str, block: Block,
         keep=frozenset()) -> LinConstraint | None:
    # ids in ``keep`` stay even at a zero coefficient, so a strategic row
    # still names its binary when the lower window is 0
    coeffs = {v: float(c) for v, c in coeffs.items() if c != 0.0 or v in keep}
    if not coeffs:
        return None
    return LinConstraint(coeffs, sense, float(rhs), label, block)


def _acc(d: dict, vid: str, c: float) -> None:
    d[vid] = d.get(vid, 0.0) + c


def _names(inst: SSCInstance):
    return ([e.name for e in inst.entities], [m.name for m in inst.items],
            [a.name for a in inst.modes], [g.name for g in inst.techs])


def _flow_index(cat: VariableCatalog):
    """(i, t) -> [(m, vid)] for outgoing and incoming X."""
    out, inc = defaultdict(list), defaultdict(list)
    for (m, a, i, j, t), vid in cat.X.items():
        out[(i, t)].append((m, vid))
        inc[(j, t)].append((m, vid))
    return out, inc


def build_strategic_constraints(inst: SSCInstance, cat: VariableCatalog) -> list[LinConstraint]:
    E, M, A, G = _names(inst)
    rows: list[LinConstraint | None] = []
    out, inc = _flow_index(cat)
    RB = Block.RELAXABLE
    BIN = frozenset(cat.Y.values()) | frozenset(cat.Z.values())
    Y = cat.Y
    T = list(inst.T)
    fw = sorted(inst.of_kind("f") + inst.of_kind("w"))

    # supplier windows
    for i in inst.of_kind("sup"):
        for m in inst.of_kind("rm"):
            for t in T:
                flows = {vid: 1.0 for mm, vid in out[(i, t)] if mm == m}
                if not flows:
                    continue
                rows.append(_row({**flows, Y[i]: -float(inst.sc_max[m, i])}, Sense.LE, 0.0,
                                 f"supmax({E[i]},{M[m]},t{t})", RB, BIN))
                rows.append(_row({**flows, Y[i]: -float(inst.sc_min[m, i])}, Sense.GE, 0.0,
                                 f"supmin({E[i]},{M[m]},t{t})", RB, BIN))

    # entity throughput, only where the entity has arcs in that direction
    for i in range(len(E)):
        for t in T:
            if out[(i, t)]:
                coeffs = {vid: 1.0 for _, vid in out[(i, t)]}
                coeffs[Y[i]] = -float(inst.ec_max[i])
                rows.append(_row(coeffs, Sense.LE, 0.0, f"outcap({E[i]},t{t})", RB, BIN))
            if inc[(i, t)]:
                coeffs = {vid: 1.0 for _, vid in inc[(i, t)]}
                coeffs[Y[i]] = -float(inst.ec_max[i])
                rows.append(_row(coeffs, Sense.LE, 0.0, f"incap({E[i]},t{t})", RB, BIN))

    # stock windows
    for (m, i, t), vid in cat.S.items():
        rows.append(_row({vid: 1.0, Y[i]: -float(inst.ic_max[m, i])}, Sense.LE, 0.0,
                         f"stockmax({M[m]},{E[i]},t{t})", RB, BIN))
        rows.append(_row({vid: 1.0, Y[i]: -float(inst.ic_min[m, i])}, Sense.GE, 0.0,
                         f"stockmin({M[m]},{E[i]},t{t})", RB, BIN))

    # installation area
    for i in fw:
        rows.append(_row({cat.YC[i]: 1.0, Y[i]: -float(inst.ea_max[i])}, Sense.LE, 0.0,
                         f"areamax({E[i]})", RB, BIN))
        rows.append(_row({cat.YC[i]: 1.0, Y[i]: -float(inst.ea_min[i])}, Sense.GE, 0.0,
                         f"areamin({E[i]})", RB, BIN))

    # installed entities move at least one unit over the horizon;
    # suppliers receive nothing and customers ship only returns, so those rows are skipped
    for j in range(len(E)):
        kind = inst.entities[j].kind
        if kind != "sup":
            coeffs = {vid: 1.0 for t in T for _, vid in inc[(j, t)]}
            if coeffs:
                coeffs[Y[j]] = -1.0
                rows.append(_row(coeffs, Sense.GE, 0.0, f"inuse({E[j]})", RB, BIN))
        if kind != "c":
            coeffs = {vid: 1.0 for t in T for _, vid in out[(j, t)]}
            if coeffs:
                coeffs[Y[j]] = -1.0
                rows.append(_row(coeffs, Sense.GE, 0.0, f"outuse({E[j]})", RB, BIN))

    # trips only between installed entities
    for (a, i, j, t), vid in cat.Q.items():
        big = cat.bigm_q[(a, i, j)]
        rows.append(_row({vid: 1.0, Y[i]: -big}, Sense.LE, 0.0,
                         f"tripfrom({A[a]},{E[i]},{E[j]},t{t})", RB, BIN))
        rows.append(_row({vid: 1.0, Y[j]: -big}, Sense.LE, 0.0,
                         f"tripto({A[a]},{E[i]},{E[j]},t{t})", RB, BIN))

    # trucks only at installed entities
    for (a, i), vid in cat.K.items():
        rows.append(_row({vid: 1.0, Y[i]: -cat.bigm_k[(a, i)]}, Sense.LE, 0.0,
                         f"trucks({A[a]},{E[i]})", RB, BIN))

    # technology windows
    for (m, g, i, t), vid in cat.P.items():
        z = cat.Z[(g, m, i)]
        rows.append(_row({vid: 1.0, z: -float(inst.pc_min[g])}, Sense.GE, 0.0,
                         f"prodmin({M[m]},{G[g]},{E[i]},t{t})", RB, BIN))
        rows.append(_row({vid: 1.0, z: -float(inst.pc_max[g])}, Sense.LE, 0.0,
                         f"prodmax({M[m]},{G[g]},{E[i]},t{t})", RB, BIN))
    for (m, g, i, t), vid in cat.R.items():
        z = cat.Z[(g, m, i)]
        rows.append(_row({vid: 1.0, z: -float(inst.pc_min[g])}, Sense.GE, 0.0,
                         f"remmin({M[m]},{G[g]},{E[i]},t{t})", RB, BIN))
        rows.append(_row({vid: 1.0, z: -float(inst.pc_max[g])}, Sense.LE, 0.0,
                         f"remmax({M[m]},{G[g]},{E[i]},t{t})", RB, BIN))

    # technologies only in installed factories
    for i in inst.of_kind("f"):
        for m in inst.of_kind("fp"):
            for fam, pairs in (("prodtech", inst.h_prod), ("remtech", inst.h_rem)):
                coeffs = {cat.Z[(g, mm, i)]: 1.0 for mm, g in pairs if mm == m}
                if coeffs:
                    coeffs[Y[i]] = -1.0
                    rows.append(_row(coeffs, Sense.LE, 0.0, f"{fam}({M[m]},{E[i]})", RB, BIN))
    return [r for r in rows if r is not None]


def build_tactical_constraints(inst: SSCInstance, cat: VariableCatalog) -> list[LinConstraint]:
    E, M, A, G = _names(inst)
    rows: list[LinConstraint | None] = []
    out, inc = _flow_index(cat)
    KB = Block.KEPT
    T = list(inst.T)
    fps, rps, rms = inst.of_kind("fp"), inst.of_kind("rp"), inst.of_kind("rm")

    def flows(side, i, t, m):
        return {vid: 1.0 for mm, vid in side[(i, t)] if mm == m}

    for i in inst.of_kind("f"):
        for t in T:
            # raw materials received are consumed by production
            for m in rms:
                coeffs = flows(inc, i, t, m)
                for (n, g, ii, tt), vid in cat.P.items():
                    if ii == i and tt == t and inst.bom_prod[m, n, g]:
                        _acc(coeffs, vid, -float(inst.bom_prod[m, n, g]))
                rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}rmbal({E[i]},{M[m]},t{t})", KB))
            # remanufacturing draws on received returns; surplus returns are scrapped
            for r in rps:
                coeffs = flows(inc, i, t, r)
                n = inst.items[r].recovers
                for (nn, g, ii, tt), vid in cat.R.items():
                    if ii == i and tt == t and nn == n:
                        _acc(coeffs, vid, -float(inst.bom_rem[r, n]))
                rows.append(_row(coeffs, Sense.GE, 0.0, f"{REC}rpuse({E[i]},{M[r]},t{t})", KB))

    # final product balance at factories and warehouses: S_{t-1} + made + in - S_t = out
    for i in sorted(inst.of_kind("f") + inst.of_kind("w")):
        for m in fps:
            for t in T:
                coeffs: dict[str, float] = {}
                for vid in flows(inc, i, t, m):
                    _acc(coeffs, vid, 1.0)
                for vid in flows(out, i, t, m):
                    _acc(coeffs, vid, -1.0)
                for fam in (cat.P, cat.R):
                    for (mm, g, ii, tt), vid in fam.items():
                        if mm == m and ii == i and tt == t:
                            _acc(coeffs, vid, 1.0)
                if t > 1:
                    _acc(coeffs, cat.S[(m, i, t - 1)], 1.0)
                _acc(coeffs, cat.S[(m, i, t)], -1.0)
                rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}fpbal({E[i]},{M[m]},t{t})", KB))

    # returns pass straight through warehouses
    for i in inst.of_kind("w"):
        for r in rps:
            for t in T:
                coeffs = flows(inc, i, t, r)
                for vid in flows(out, i, t, r):
                    _acc(coeffs, vid, -1.0)
                rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}rpbal({E[i]},{M[r]},t{t})", KB))

    for i in inst.of_kind("c"):
        for t in T:
            for m in fps:
                coeffs = flows(inc, i, t, m)
                dmd = float(inst.dmd[m, i, t - 1])
                row = _row(coeffs, Sense.EQ, dmd, f"{REC}demand({E[i]},{M[m]},t{t})", KB)
                if row is None and dmd > 0:
                    raise ValueError(f"customer {E[i]} has demand but no inbound arc")
                rows.append(row)
            # returns at t are a fixed share of what was delivered at t-1
            for r in rps:
                coeffs = flows(out, i, t, r)
                if t > 1:
                    n = inst.items[r].recovers
                    for vid in flows(inc, i, t - 1, n):
                        _acc(coeffs, vid, -float(inst.ret_frac[r]))
                rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}returns({E[i]},{M[r]},t{t})", KB))

    # hubs store nothing
    for i in inst.of_kind("air") + inst.of_kind("port"):
        for m in fps + rps:
            for t in T:
                coeffs = flows(inc, i, t, m)
                for vid in flows(out, i, t, m):
                    _acc(coeffs, vid, -1.0)
                rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}hub({E[i]},{M[m]},t{t})", KB))

    # area in use and its cap
    for (i, t), vid in cat.YCT.items():
        coeffs = {cat.S[(m, i, t)]: float(inst.apu[m]) for m in fps if inst.apu[m]}
        coeffs[vid] = -1.0
        rows.append(_row(coeffs, Sense.EQ, 0.0, f"{REC}area({E[i]},t{t})", KB))
        rows.append(_row({vid: 1.0, cat.YC[i]: -1.0}, Sense.LE, 0.0,
                         f"{REC}areacap({E[i]},t{t})", KB))

    # weight carried per trip
    arc_flows = defaultdict(dict)
    for (m, a, i, j, t), vid in cat.X.items():
        arc_flows[(a, i, j, t)][vid] = float(inst.pw[m])
    for key, qid in cat.Q.items():
        a, i, j, t = key
        coeffs = dict(arc_flows[key])
        coeffs[qid] = -float(inst.vcap[a])
        rows.append(_row(coeffs, Sense.LE, 0.0, f"{REC}load({A[a]},{E[i]},{E[j]},t{t})", KB))

    # truck fleet: trips per period limited by vehicles in use, which are owned vehicles
    trips = defaultdict(list)
    for (a, i, j, t), qid in cat.Q.items():
        trips[(a, i, t)].append(qid)
    for (a, i, t), kid in cat.Kt.items():
        coeffs = {q: 1.0 for q in trips[(a, i, t)]}
        coeffs[kid] = -float(inst.ntrips[a])
        rows.append(_row(coeffs, Sense.LE, 0.0, f"{REC}fleet({A[a]},{E[i]},t{t})", KB))
        rows.append(_row({kid: 1.0, cat.K[(a, i)]: -1.0}, Sense.LE, 0.0,
                         f"{REC}owned({A[a]},{E[i]},t{t})", KB))
    return [r for r in rows if r is not None]


def build_objectives(inst: SSCInstance, cat: VariableCatalog
                     ) -> tuple[LinObjective, LinObjective, LinObjective]:
    """Returns (f_eco, f_env, f_soc) in minimisation sense."""
    eco: dict[str, float] = {}
    env: dict[str, float] = {}
    soc: dict[str, float] = {}
    rho = inst.discount_rate
    disc = {t: (1.0 + rho) ** (-t) for t in inst.T}
    kinds = [e.kind for e in inst.entities]
    ncat = inst.n_categories
    ei_inst = float(inst.ei_inst.sum())
    ei_trans = inst.ei_trans.sum(axis=1)
    ei_prod = inst.ei_prod.sum(axis=2)

    for (m, a, i, j, t), vid in cat.X.items():
        item = inst.items[m].kind
        d = disc[t]
        c = 0.0
        if item == "fp" and kinds[j] == "c":
            c += float(inst.psu[m])
        if item == "rm" and kinds[i] == "sup":
            c -= float(inst.rmc[m, i])
        if item == "rp" and kinds[i] == "c":
            c -= float(inst.rpc[m])
        if inst.modes[a].kind != "truck":
            c -= float(inst.tariff[a]) * float(inst.dist[i, j]) * float(inst.pw[m])
        if c:
            _acc(eco, vid, d * c)
        if ncat and ei_trans[a]:
            _acc(env, vid, float(ei_trans[a]) * float(inst.pw[m]))
    for (a, i, j, t), vid in cat.Q.items():
        if inst.modes[a].kind == "truck":
            cost = float(inst.avc[a]) / 100.0 * float(inst.dist[i, j]) * inst.fuel_price
            _acc(eco, vid, -disc[t] * cost)
    for fam in (cat.P, cat.R):
        for (m, g, i, t), vid in fam.items():
            _acc(eco, vid, -disc[t] * float(inst.opc[g]))
            if ei_prod[m, g]:
                _acc(env, vid, float(ei_prod[m, g]))
    for (m, i, t), vid in cat.S.items():
        _acc(eco, vid, -disc[t] * float(inst.inv_cost[m]))
    for i, vid in cat.YC.items():
        _acc(eco, vid, -float(inst.sqmc[i]))
        if ei_inst:
            _acc(env, vid, ei_inst)
        social = float(inst.unemp[i]) / 100.0 / float(inst.gdp[i])
        _acc(soc, vid, float(inst.wpsq[i]) * social)
        _acc(soc, cat.Y[i], float(inst.workers[i]) * social)
    for (g, m, i), vid in cat.Z.items():
        _acc(eco, vid, -float(inst.tec[g]))
        _acc(soc, vid, float(inst.w_tech[g]) / float(inst.gdp[i]))

    clean = lambda d, s: {v: s * c for v, c in d.items() if c != 0.0}
    return (LinObjective(clean(eco, -1.0)), LinObjective(clean(env, 1.0)),
            LinObjective(clean(soc, -1.0)))


def build_model(inst: SSCInstance) -> TriObjectiveModel:
    cat = build_catalog(inst)
    rows = build_strategic_constraints(inst, cat) + build_tactical_constraints(inst, cat)
    f_eco, f_env, f_soc = build_objectives(inst, cat)
    groups = []
    for i in inst.of_kind("f"):
        for m in inst.of_kind("fp"):
            for pairs in (inst.h_prod, inst.h_rem):
                zs = tuple(cat.Z[(g, mm, i)] for mm, g in pairs if mm == m)
                if zs:
                    groups.append(zs)
    transport = {"trucks": frozenset(inst.of_kind("truck")), "pw": inst.pw.tolist(),
                 "vcap": inst.vcap.tolist(), "ntrips": inst.ntrips.tolist()}
    return TriObjectiveModel(
        vars=tuple(cat.specs), constraints=tuple(rows), f_eco=f_eco, f_env=f_env,
        f_soc=f_soc, catalog=cat, wprime=frozenset(cat.Y.values()),
        flow_ids=tuple(cat.X.values()), z_groups=tuple(groups), transport=transport)


def validate_solution(inst: SSCInstance, model: TriObjectiveModel, assignment,
                      tol: float = 1e-6) -> list[tuple[str, float]]:
    """Every violated row (and bound/integrality breach) with its violation amount."""
    return model.model.violations(assignment, tol)

"""Network topology and the index -> variable-id catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..milp import Domain, VarSpec
from .instance import SSCInstance

HUBS = ("air", "port")

# (origin kind, destination kind) -> item kinds carried by truck on a land arc
_LAND = {
    ("sup", "f"): ("rm",),
    ("f", "w"): ("fp",),
    ("f", "c"): ("fp",),
    ("w", "c"): ("fp",),
    ("f", "air"): ("fp",), ("f", "port"): ("fp",),
    ("w", "air"): ("fp", "rp"), ("w", "port"): ("fp", "rp"),
    ("air", "c"): ("fp",), ("port", "c"): ("fp",),
    ("air", "w"): ("fp", "rp"), ("port", "w"): ("fp", "rp"),
    ("air", "f"): ("rp",), ("port", "f"): ("rp",),
    ("c", "f"): ("rp",),
    ("c", "w"): ("rp",),
    ("w", "f"): ("rp",),
    ("c", "air"): ("rp",), ("c", "port"): ("rp",),
}
_LONG_HAUL = {"plane": "air", "boat": "port"}


@dataclass(frozen=True)
class Arc:
    mode: int
    i: int
    j: int
    items: tuple[int, ...]


def build_arcs(inst: SSCInstance) -> list[Arc]:
    """Mode-compatible arcs: trucks between same-continent entities,
    planes between airports and boats between seaports."""
    arcs = []
    ents = inst.entities
    for a, mode in enumerate(inst.modes):
        for i, ei in enumerate(ents):
            for j, ej in enumerate(ents):
                if i == j:
                    continue
                if mode.kind == "truck":
                    if ei.continent != ej.continent:
                        continue
                    kinds = _LAND.get((ei.kind, ej.kind))
                else:
                    hub = _LONG_HAUL[mode.kind]
                    kinds = ("fp", "rp") if ei.kind == hub and ej.kind == hub else None
                if not kinds:
                    continue
                items = tuple(m for m, it in enumerate(inst.items) if it.kind in kinds)
                if items:
                    arcs.append(Arc(a, i, j, items))
    return arcs


@dataclass
class VariableCatalog:
    """Maps model indices to variable ids. Periods are 1-based."""

    S: dict = field(default_factory=dict)    # (m, i, t)
    X: dict = field(default_factory=dict)    # (m, a, i, j, t)
    P: dict = field(default_factory=dict)    # (m, g, i, t)
    R: dict = field(default_factory=dict)    # (m, g, i, t)
    YC: dict = field(default_factory=dict)   # i
    Y: dict = field(default_factory=dict)    # i
    YCT: dict = field(default_factory=dict)  # (i, t)
    Kt: dict = field(default_factory=dict)   # (a, i, t)
    K: dict = field(default_factory=dict)    # (a, i)
    Q: dict = field(default_factory=dict)    # (a, i, j, t)
    Z: dict = field(default_factory=dict)    # (g, m, i)
    arcs: list = field(default_factory=list)
    bigm_q: dict = field(default_factory=dict)   # (a, i, j) -> trip cap per period
    bigm_k: dict = field(default_factory=dict)   # (a, i) -> fleet cap
    specs: list = field(default_factory=list)

    FAMILIES = ("S", "X", "P", "R", "YC", "Y", "YCT", "Kt", "K", "Q", "Z")

    def all_ids(self) -> list[str]:
        return [v.id for v in self.specs]

    def reverse(self) -> dict[str, tuple[str, object]]:
        """var id -> (family, index)."""
        out = {}
        for fam in self.FAMILIES:
            for key, vid in getattr(self, fam).items():
                out[vid] = (fam, key)
        return out

    def out_arcs(self, i: int) -> list[Arc]:
        return [arc for arc in self.arcs if arc.i == i]

    def in_arcs(self, j: int) -> list[Arc]:
        return [arc for arc in self.arcs if arc.j == j]


def build_catalog(inst: SSCInstance) -> VariableCatalog:
    cat = VariableCatalog()
    E = [e.name for e in inst.entities]
    M = [m.name for m in inst.items]
    A = [a.name for a in inst.modes]
    G = [g.name for g in inst.techs]
    fw = inst.of_kind("f") + inst.of_kind("w")
    factories = inst.of_kind("f")
    trucks = set(inst.of_kind("truck"))
    specs = []

    def add(fam, key, vid, domain=Domain.CONTINUOUS, upper=math.inf):
        getattr(cat, fam)[key] = vid
        specs.append(VarSpec(vid, domain, 0.0, upper))

    for i in sorted(fw):
        for m in inst.of_kind("fp"):
            for t in inst.T:
                add("S", (m, i, t), f"S({M[m]},{E[i]},t{t})", upper=float(inst.ic_max[m, i]))

    cat.arcs = build_arcs(inst)
    ec = inst.ec_max
    for arc in cat.arcs:
        a, i, j = arc.mode, arc.i, arc.j
        heavy = max(float(inst.pw[m]) for m in arc.items)
        cap = min(ec[i], ec[j]) * heavy / float(inst.vcap[a])
        cat.bigm_q[(a, i, j)] = max(1.0, float(math.ceil(cap - 1e-9)))
        for t in inst.T:
            for m in arc.items:
                add("X", (m, a, i, j, t), f"X({M[m]},{A[a]},{E[i]},{E[j]},t{t})")
            add("Q", (a, i, j, t), f"Q({A[a]},{E[i]},{E[j]},t{t})", Domain.INTEGER,
                cat.bigm_q[(a, i, j)])

    for i in factories:
        for m, g in inst.h_prod:
            for t in inst.T:
                add("P", (m, g, i, t), f"P({M[m]},{G[g]},{E[i]},t{t})")
        for m, g in inst.h_rem:
            for t in inst.T:
                add("R", (m, g, i, t), f"R({M[m]},{G[g]},{E[i]},t{t})")

    for i in range(len(E)):
        add("Y", i, f"Y({E[i]})", Domain.BINARY, 1.0)
    for i in sorted(fw):
        add("YC", i, f"YC({E[i]})", upper=float(inst.ea_max[i]))
        for t in inst.T:
            add("YCT", (i, t), f"YCT({E[i]},t{t})")

    for a in sorted(trucks):
        for i in range(len(E)):
            dests = [arc.j for arc in cat.arcs if arc.mode == a and arc.i == i]
            if not dests:
                continue
            total = sum(cat.bigm_q[(a, i, j)] for j in dests)
            cat.bigm_k[(a, i)] = max(1.0, float(math.ceil(total / float(inst.ntrips[a]) - 1e-9)))
            add("K", (a, i), f"K({A[a]},{E[i]})", Domain.INTEGER, cat.bigm_k[(a, i)])
            for t in inst.T:
                add("Kt", (a, i, t), f"Kt({A[a]},{E[i]},t{t})")

    for i in factories:
        for m, g in list(inst.h_prod) + list(inst.h_rem):
            add("Z", (g, m, i), f"Z({G[g]},{M[m]},{E[i]})", Domain.BINARY, 1.0)

    cat.specs = specs
    return cat

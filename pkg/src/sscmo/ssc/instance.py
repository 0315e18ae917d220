"""Supply chain instance data and its versioned JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

SCHEMA = "sscmo.instance/1"

ENTITY_KINDS = ("sup", "f", "w", "c", "air", "port")
ITEM_KINDS = ("rm", "fp", "rp")
MODE_KINDS = ("truck", "plane", "boat")
TECH_KINDS = ("prod", "rem")


@dataclass(frozen=True)
class Entity:
    name: str
    kind: str
    continent: int = 0


@dataclass(frozen=True)
class Item:
    name: str
    kind: str
    # for recovered products: index of the final product it remanufactures into
    recovers: int = -1


@dataclass(frozen=True)
class Mode:
    name: str
    kind: str


@dataclass(frozen=True)
class Tech:
    name: str
    kind: str


# array-valued parameters, in serialisation order; shapes use
# M = items, I = entities, T = periods, G = techs, A = modes, C = categories
ARRAY_FIELDS = {
    "dmd": "M,I,T",        # demand of customer i for final product m (units/period)
    "bom_prod": "M,M,G",   # raw material m per unit of final product n with tech g
    "bom_rem": "M,M",      # recovered product m per unit of final product n
    "pw": "M",             # weight per unit (kg)
    "apu": "M",            # area per unit (m2)
    "ret_frac": "M",       # return rate of recovered products
    "w_tech": "G",         # workers required by technology
    "ic_max": "M,I",
    "ic_min": "M,I",
    "pc_max": "G",
    "pc_min": "G",
    "ea_max": "I",
    "ea_min": "I",
    "sc_max": "M,I",
    "sc_min": "M,I",
    "ec_max": "I",
    "dist": "I,I",
    "tec": "G",
    "opc": "G",
    "psu": "M",
    "inv_cost": "M",       # inventory price per unit stored
    "rpc": "M",            # recovery cost per returned unit
    "rmc": "M,I",          # raw material price per supplier
    "avc": "A",            # truck consumption (l/100km)
    "vcap": "A",           # kg per trip
    "ntrips": "A",         # trips per vehicle per period
    "tariff": "A",         # air/sea price per kg.km
    "sqmc": "I",
    "lc": "I",
    "gdp": "I",
    "unemp": "I",
    "workers": "I",
    "wpsq": "I",
    "ei_inst": "C",        # per m2 of installed capacity
    "ei_prod": "M,G,C",    # per unit produced or remanufactured
    "ei_trans": "A,C",     # per kg carried
}


@dataclass
class SSCInstance:
    entities: list[Entity]
    items: list[Item]
    modes: list[Mode]
    techs: list[Tech]
    h_prod: list[tuple[int, int]]   # (final product, production tech)
    h_rem: list[tuple[int, int]]    # (final product, remanufacturing tech)
    periods: int
    n_categories: int
    fuel_price: float
    discount_rate: float
    arrays: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __getattr__(self, name):
        # parameter arrays read as attributes: inst.dmd, inst.pw, ...
        arrays = self.__dict__.get("arrays")
        if arrays is not None and name in arrays:
            return arrays[name]
        raise AttributeError(name)

    # -- index helpers -----------------------------------------------------

    def of_kind(self, kind: str) -> list[int]:
        if kind in ENTITY_KINDS:
            return [k for k, e in enumerate(self.entities) if e.kind == kind]
        if kind in ITEM_KINDS:
            return [k for k, m in enumerate(self.items) if m.kind == kind]
        if kind in MODE_KINDS:
            return [k for k, a in enumerate(self.modes) if a.kind == kind]
        if kind in TECH_KINDS:
            return [k for k, g in enumerate(self.techs) if g.kind == kind]
        raise KeyError(kind)

    @property
    def T(self) -> range:
        return range(1, self.periods + 1)

    def dims(self) -> dict[str, int]:
        return {"M": len(self.items), "I": len(self.entities), "T": self.periods,
                "G": len(self.techs), "A": len(self.modes), "C": self.n_categories}

    def rp_of(self, fp: int) -> list[int]:
        return [k for k, m in enumerate(self.items) if m.kind == "rp" and m.recovers == fp]

    def total_demand(self, m: int, t: int) -> float:
        return float(self.dmd[m, :, t - 1].sum())

    # -- serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "entities": [[e.name, e.kind, e.continent] for e in self.entities],
            "items": [[m.name, m.kind, m.recovers] for m in self.items],
            "modes": [[a.name, a.kind] for a in self.modes],
            "techs": [[g.name, g.kind] for g in self.techs],
            "h_prod": [list(p) for p in self.h_prod],
            "h_rem": [list(p) for p in self.h_rem],
            "periods": self.periods,
            "n_categories": self.n_categories,
            "fuel_price": self.fuel_price,
            "discount_rate": self.discount_rate,
            "params": {k: np.asarray(self.arrays[k], dtype=float).tolist() for k in ARRAY_FIELDS},
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, doc: dict) -> SSCInstance:
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported instance schema {doc.get('schema')!r}")
        inst = cls(
            entities=[Entity(n, k, int(c)) for n, k, c in doc["entities"]],
            items=[Item(n, k, int(r)) for n, k, r in doc["items"]],
            modes=[Mode(n, k) for n, k in doc["modes"]],
            techs=[Tech(n, k) for n, k in doc["techs"]],
            h_prod=[tuple(p) for p in doc["h_prod"]],
            h_rem=[tuple(p) for p in doc["h_rem"]],
            periods=int(doc["periods"]),
            n_categories=int(doc["n_categories"]),
            fuel_price=float(doc["fuel_price"]),
            discount_rate=float(doc["discount_rate"]),
            meta=doc.get("meta", {}),
        )
        inst.arrays = {k: np.asarray(doc["params"][k], dtype=float) for k in ARRAY_FIELDS}
        problems = validate_instance(inst)
        if problems:
            raise ValueError("invalid instance: " + "; ".join(problems[:5]))
        return inst

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> SSCInstance:
        return cls.from_json(json.loads(Path(path).read_text()))

    def copy(self) -> SSCInstance:
        return SSCInstance.from_json(json.loads(self.dumps()))


def validate_instance(inst: SSCInstance) -> list[str]:
    """Structural and range checks; returns a list of problems (empty when valid)."""
    out = []
    dims = inst.dims()
    for name, spec in ARRAY_FIELDS.items():
        arr = inst.arrays.get(name)
        if arr is None:
            out.append(f"missing parameter {name}")
            continue
        want = tuple(dims[d] for d in spec.split(","))
        if arr.shape != want:
            out.append(f"{name} has shape {arr.shape}, expected {want}")
        elif not np.all(np.isfinite(arr)):
            out.append(f"{name} has non-finite values")
    if out:
        return out
    for lo, hi in [("ic_min", "ic_max"), ("pc_min", "pc_max"), ("ea_min", "ea_max"),
                   ("sc_min", "sc_max")]:
        if np.any(inst.arrays[lo] > inst.arrays[hi] + 1e-9):
            out.append(f"{lo} exceeds {hi}")
    rf = inst.ret_frac
    if np.any(rf < 0) or np.any(rf > 1):
        out.append("ret_frac outside [0, 1]")
    fps, prods, rems = inst.of_kind("fp"), inst.of_kind("prod"), inst.of_kind("rem")
    for m, g in inst.h_prod:
        if m not in fps or g not in prods:
            out.append(f"bad production pair ({m}, {g})")
    for m, g in inst.h_rem:
        if m not in fps or g not in rems:
            out.append(f"bad remanufacturing pair ({m}, {g})")
    d = inst.dist
    if np.any(d < 0) or not np.allclose(d, d.T):
        out.append("dist must be symmetric and nonnegative")
    for k in inst.of_kind("rp"):
        if inst.items[k].recovers not in fps:
            out.append(f"recovered product {inst.items[k].name} maps to no final product")
    for k, e in enumerate(inst.entities):
        if e.kind not in ENTITY_KINDS:
            out.append(f"entity {e.name} has unknown kind {e.kind}")
    for name in ("dmd", "pw", "apu", "vcap", "ntrips"):
        if np.any(inst.arrays[name] < 0):
            out.append(f"{name} has negative entries")
    return out

"""Seeded random instance generator.

Each section (demand, items, capacities, costs, social, env) draws from its
own sub-stream of the seed, so the sections never shift each other's draws.
Default hyperparameters live in ``instgen_defaults.cfg`` next to this file.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .rng import Xoshiro256, substream
from .ssc.instance import Entity, Item, Mode, SSCInstance, Tech, validate_instance

PROFILES = ("STD", "TECHC", "RAWC", "SUP", "CAP")
DEFAULTS_FILE = Path(__file__).with_name("instgen_defaults.cfg")
CONFIG_VERSION = "1"

# intervals fixed by the generator tables rather than by configuration
AVC = (14.0, 18.0)
LC = (3.5, 30.4)
GDP = (0.355, 1.24)
UNEMP = (4.8, 24.5)
EI_INST = (0.0, 83200.0)
EI_PROD = (0.0000049, 457000.0)
EI_TRANS = (0.0, 0.00314)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int = 1
    profile: str = "STD"
    # counts
    n_sup: int = 3
    n_f: int = 3
    n_w: int = 3
    n_c: int = 4
    n_air: int = 2
    n_port: int = 2
    n_rm: int = 2
    n_fp: int = 1
    n_prod: int = 3
    n_rem: int = 3
    n_trucks: int = 2
    periods: int = 3
    n_categories: int = 2
    # how many of the last warehouses/customers/airports/seaports sit overseas
    overseas_w: int = 1
    overseas_c: int = 1
    overseas_air: int = 1
    overseas_port: int = 1
    # demand and items
    lbdc: float = 100.0
    ubdc: float = 300.0
    vart: float = 0.05
    lbbom_prod: float = 1.0
    ubbom_prod: float = 3.0
    lbbom_rem: float = 1.0
    ubbom_rem: float = 2.0
    lbpw: float = 0.5
    ubpw: float = 2.0
    lbapu: float = 0.001
    ubapu: float = 0.005
    ubret: float = 0.15
    fracwg: float = 0.1
    # capacities
    icfrac_max: float = 0.5
    icfrac_min: float = 0.05
    lbpc_min: float = 0.1
    lbeaf_max: float = 30.0
    ubeaf_max: float = 40.0
    lbeaw_max: float = 15.0
    ubeaw_max: float = 25.0
    lbeaf_min: float = 5.0
    ubeaf_min: float = 10.0
    lbeaw_min: float = 3.0
    ubeaw_min: float = 6.0
    lbsc: float = 0.01
    ubsc: float = 0.05
    lbdist: float = 50.0
    ubdist: float = 500.0
    # costs
    lbtec: float = 1.0
    ubtech: float = 3.0
    lbopc: float = 5.0
    ubopc: float = 15.0
    lbpsu: float = 80.0
    ubpsu: float = 120.0
    scfrac: float = 1.0
    lbrpc: float = 0.1
    ubrpc: float = 0.3
    lbrmc: float = 5.0
    ubrmc: float = 10.0
    ubsqmc: float = 100.0
    sqmcfac: float = 1.0
    # social
    lbwf: float = 20.0
    ubwf: float = 50.0
    lbww: float = 5.0
    ubww: float = 15.0
    lbwpsqf: float = 0.05
    ubwpsqf: float = 0.1
    lbwpsqw: float = 0.02
    ubwpsqw: float = 0.05
    # transport (not in the generator tables)
    lbvcap: float = 0.25      # truck capacity as a share of peak period demand weight
    ubvcap: float = 0.5
    hub_vcap_factor: float = 10.0
    ntrips: float = 30.0
    fuel_price: float = 1.5
    discount_rate: float = 0.035
    air_tariff: float = 0.002
    sea_tariff: float = 0.0005

    def validate(self) -> None:
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        names = {f.name for f in fields(self)}
        for f in fields(self):
            if f.name.startswith("lb"):
                rest = f.name[2:]
                hi = "ub" + ("tech" if rest == "tec" else rest)
                if hi in names and getattr(self, f.name) > getattr(self, hi):
                    raise ConfigError(f"{f.name} > {hi}")
        if not 0.0 <= self.vart <= 1.0:
            raise ConfigError("vart must lie in [0, 1]")
        if self.ubrpc > 0.5:
            raise ConfigError("ubrpc must be at most 0.5")
        for name in ("n_sup", "n_f", "n_c", "n_rm", "n_fp", "n_prod", "periods"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for kind in ("w", "c", "air", "port"):
            if getattr(self, f"overseas_{kind}") > getattr(self, f"n_{kind}"):
                raise ConfigError(f"overseas_{kind} exceeds n_{kind}")
        if self.overseas_c and (self.n_port < 2 and self.n_air < 2):
            raise ConfigError("overseas customers need a hub on each continent")


def load_config(path: str | Path | None = None, **overrides) -> GenConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    text = Path(path or DEFAULTS_FILE).read_text()
    types = {f.name: f.type for f in fields(GenConfig)}
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "version":
            if val != CONFIG_VERSION:
                raise ConfigError(f"config version {val} unsupported")
            continue
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        kind = types[key]
        values[key] = int(val) if kind == "int" else val if kind == "str" else float(val)
    cfg = replace(GenConfig(**values), **overrides)
    cfg.validate()
    return cfg


def dump_config(cfg: GenConfig) -> str:
    lines = [f"version = {CONFIG_VERSION}"]
    lines += [f"{k} = {v}" for k, v in asdict(cfg).items()]
    return "\n".join(lines) + "\n"


# -- layout -------------------------------------------------------------------

@dataclass(frozen=True)
class _Layout:
    entities: tuple[Entity, ...]
    items: tuple[Item, ...]
    modes: tuple[Mode, ...]
    techs: tuple[Tech, ...]

    def idx(self, seq: str, kind: str) -> list[int]:
        return [k for k, e in enumerate(getattr(self, seq)) if e.kind == kind]


def _layout(cfg: GenConfig) -> _Layout:
    ents = []
    for kind, n, over in (("sup", cfg.n_sup, 0), ("f", cfg.n_f, 0), ("w", cfg.n_w, cfg.overseas_w),
                          ("c", cfg.n_c, cfg.overseas_c), ("air", cfg.n_air, cfg.overseas_air),
                          ("port", cfg.n_port, cfg.overseas_port)):
        for k in range(n):
            ents.append(Entity(f"{kind}{k}", kind, 1 if k >= n - over else 0))
    items = [Item(f"rm{k}", "rm") for k in range(cfg.n_rm)]
    items += [Item(f"fp{k}", "fp") for k in range(cfg.n_fp)]
    items += [Item(f"rp{k}", "rp", cfg.n_rm + k) for k in range(cfg.n_fp)]
    modes = [Mode(f"truck{k}", "truck") for k in range(cfg.n_trucks)]
    modes += [Mode("plane0", "plane"), Mode("boat0", "boat")]
    techs = [Tech(f"g{k}", "prod") for k in range(cfg.n_prod)]
    techs += [Tech(f"g{cfg.n_prod + k}", "rem") for k in range(cfg.n_rem)]
    return _Layout(tuple(ents), tuple(items), tuple(modes), tuple(techs))


# -- sections -----------------------------------------------------------------

def sample_demand(cfg: GenConfig, rng: Xoshiro256) -> np.ndarray:
    """Demand per (final product, customer, period): first period uniform, then compounded growth."""
    dmd = np.zeros((cfg.n_fp, cfg.n_c, cfg.periods))
    for m in range(cfg.n_fp):
        for c in range(cfg.n_c):
            dmd[m, c, 0] = rng.uniform(cfg.lbdc, cfg.ubdc)
            for t in range(1, cfg.periods):
                dmd[m, c, t] = dmd[m, c, t - 1] * (1.0 + cfg.vart)
    return dmd


def sample_opc(cfg: GenConfig, rng: Xoshiro256) -> np.ndarray:
    return np.array([rng.uniform(cfg.lbopc, cfg.ubopc) for _ in range(cfg.n_prod + cfg.n_rem)])


def sample_items(cfg: GenConfig, rng: Xoshiro256, opc: np.ndarray) -> dict[str, np.ndarray]:
    """Bills of materials, unit weights/areas, return rates and technology workforce.

    Arrays use compact indices: bom_prod[rm, fp, prod tech], bom_rem[fp]
    (recovered product k remanufactures final product k), pw/apu over
    rm + fp + rp in that order.
    """
    nrm, nfp, npr = cfg.n_rm, cfg.n_fp, cfg.n_prod
    bom_prod = np.array([[[rng.uniform(cfg.lbbom_prod, cfg.ubbom_prod) for _ in range(npr)]
                          for _ in range(nfp)] for _ in range(nrm)])
    bom_rem = np.array([rng.uniform(cfg.lbbom_rem, cfg.ubbom_rem) for _ in range(nfp)])
    pw_rm = np.array([rng.uniform(cfg.lbpw, cfg.ubpw) for _ in range(nrm)])
    apu_rm = np.array([rng.uniform(cfg.lbapu, cfg.ubapu) for _ in range(nrm)])
    # final products: BOM-weighted raw-material totals averaged over the production techs
    pw_fp = np.einsum("mng,m->n", bom_prod, pw_rm) / npr
    apu_fp = np.einsum("mng,m->n", bom_prod, apu_rm) / npr
    pw_rp = bom_rem * pw_fp
    apu_rp = bom_rem * apu_fp
    ret = np.array([rng.uniform(0.0, cfg.ubret) for _ in range(nfp)])
    w_g = cfg.fracwg * np.ceil(opc)
    return {"bom_prod": bom_prod, "bom_rem": bom_rem,
            "pw": np.concatenate([pw_rm, pw_fp, pw_rp]),
            "apu": np.concatenate([apu_rm, apu_fp, apu_rp]),
            "ret_frac": ret, "w_tech": w_g}


def _pc_max(cfg: GenConfig, rng: Xoshiro256, dmd: np.ndarray) -> np.ndarray:
    tot = dmd.sum(axis=1)  # (fp, t)
    base = np.ceil(tot / cfg.n_f) - 0.1 * tot
    out = np.zeros(cfg.n_prod + cfg.n_rem)
    for g in range(len(out)):
        best = 0.0
        for m in range(cfg.n_fp):
            for t in range(cfg.periods):
                best = max(best, rng.uniform(1.0, 2.0) * base[m, t])
        out[g] = best
    return out


def sample_capacities(cfg: GenConfig, rng: Xoshiro256, dmd: np.ndarray,
                      items: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Storage, technology, area, supply and distance data (compact indices).

    Technology capacities are redrawn up to ten times until the factories can
    cover peak demand plus their minimum stock; ``guard_ok`` records the outcome.
    """
    nfw = cfg.n_f + cfg.n_w
    tot = dmd.sum(axis=1)  # (fp, t)
    ic_max = np.zeros((cfg.n_fp, nfw))
    for m in range(cfg.n_fp):
        for i in range(nfw):
            ic_max[m, i] = max(math.ceil(cfg.icfrac_max * tot[m, t] + rng.uniform(0.0, tot[m, t]))
                               for t in range(cfg.periods))
    ic_min = cfg.icfrac_min * ic_max

    guard_ok = False
    for _ in range(10):
        pc_max = _pc_max(cfg, rng, dmd)
        need = tot.max(axis=1) + ic_min[:, :cfg.n_f].sum(axis=1)
        if np.all(cfg.n_f * pc_max[:cfg.n_prod].max() >= need):
            guard_ok = True
            break
    pc_min = cfg.lbpc_min * pc_max

    ea_max = np.array([rng.uniform(cfg.lbeaf_max, cfg.ubeaf_max) for _ in range(cfg.n_f)]
                      + [rng.uniform(cfg.lbeaw_max, cfg.ubeaw_max) for _ in range(cfg.n_w)])
    ea_min = np.array([rng.uniform(cfg.lbeaf_min, cfg.ubeaf_min) for _ in range(cfg.n_f)]
                      + [rng.uniform(cfg.lbeaw_min, cfg.ubeaw_min) for _ in range(cfg.n_w)])
    ea_min = np.minimum(ea_min, ea_max)

    bom = items["bom_prod"]
    sc_max = np.zeros((cfg.n_rm, cfg.n_sup))
    sc_min = np.zeros((cfg.n_rm, cfg.n_sup))
    for m in range(cfg.n_rm):
        need_m = sum(pc_max[g] * bom[m, n, g] for n in range(cfg.n_fp) for g in range(cfg.n_prod))
        cap = 2.0 * math.ceil(need_m / cfg.n_sup)
        for i in range(cfg.n_sup):
            sc_max[m, i] = cap
            sc_min[m, i] = rng.uniform(cfg.lbsc * cap, cfg.ubsc * cap)

    n = cfg.n_sup + cfg.n_f + cfg.n_w + cfg.n_c + cfg.n_air + cfg.n_port
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = rng.uniform(cfg.lbdist, cfg.ubdist)

    # per-period throughput cap: total horizon demand scaled by the heaviest bill
    max_bom = bom.sum(axis=0).max() if bom.size else 0.0
    ec = float(dmd.sum()) * (1.0 + max_bom)
    return {"ic_max": ic_max, "ic_min": ic_min, "pc_max": pc_max, "pc_min": pc_min,
            "ea_max": ea_max, "ea_min": ea_min, "sc_max": sc_max, "sc_min": sc_min,
            "dist": dist, "ec": ec, "guard_ok": guard_ok}


def sample_costs(cfg: GenConfig, rng: Xoshiro256, items: dict, caps: dict) -> dict:
    pc_max = caps["pc_max"]
    tec = np.array([rng.uniform(cfg.lbtec * p, cfg.ubtech * p) for p in pc_max])
    psu = np.array([rng.uniform(cfg.lbpsu, cfg.ubpsu) for _ in range(cfg.n_fp)])
    pw_fp = items["pw"][cfg.n_rm:cfg.n_rm + cfg.n_fp]
    inv_cost = cfg.scfrac + pw_fp
    rpc = np.array([items["bom_rem"][k] * psu[k] * rng.uniform(cfg.lbrpc, cfg.ubrpc)
                    for k in range(cfg.n_fp)])
    rmc = np.array([[rng.uniform(cfg.lbrmc, cfg.ubrmc) for _ in range(cfg.n_sup)]
                    for _ in range(cfg.n_rm)])
    avc = np.array([rng.uniform(*AVC) for _ in range(cfg.n_trucks)])
    return {"tec": tec, "psu": psu, "inv_cost": inv_cost, "rpc": rpc, "rmc": rmc, "avc": avc}


def sample_social(cfg: GenConfig, rng: Xoshiro256, caps: dict) -> dict:
    n = cfg.n_sup + cfg.n_f + cfg.n_w + cfg.n_c + cfg.n_air + cfg.n_port
    lc = np.array([rng.uniform(*LC) for _ in range(n)])
    gdp = np.array([rng.uniform(*GDP) for _ in range(n)])
    unemp = np.array([rng.uniform(*UNEMP) for _ in range(n)])
    off = cfg.n_sup
    nfw = cfg.n_f + cfg.n_w
    sqmc = np.zeros(nfw)
    workers = np.zeros(nfw)
    wpsq = np.zeros(nfw)
    for k in range(nfw):
        base = lc[off + k] * caps["ea_max"][k]
        sqmc[k] = rng.uniform(0.5 * base, cfg.ubsqmc + cfg.sqmcfac * base)
    for k in range(nfw):
        fac = k < cfg.n_f
        workers[k] = rng.uniform(cfg.lbwf, cfg.ubwf) if fac else rng.uniform(cfg.lbww, cfg.ubww)
        wpsq[k] = (rng.uniform(cfg.lbwpsqf, cfg.ubwpsqf) if fac
                   else rng.uniform(cfg.lbwpsqw, cfg.ubwpsqw))
    return {"lc": lc, "gdp": gdp, "unemp": unemp, "sqmc": sqmc, "workers": workers, "wpsq": wpsq}


def sample_env(cfg: GenConfig, rng: Xoshiro256) -> dict:
    C = cfg.n_categories
    ei_inst = np.array([rng.uniform(*EI_INST) for _ in range(C)])
    ei_prod = np.array([[[rng.uniform(*EI_PROD) for _ in range(C)]
                         for _ in range(cfg.n_prod + cfg.n_rem)] for _ in range(cfg.n_fp)])
    ei_trans = np.array([[rng.uniform(*EI_TRANS) for _ in range(C)] for _ in range(cfg.n_trucks + 2)])
    return {"ei_inst": ei_inst, "ei_prod": ei_prod, "ei_trans": ei_trans}


def sample_costs_social_env(cfg: GenConfig, items: dict, caps: dict) -> dict:
    out = sample_costs(cfg, substream(cfg.seed, "costs"), items, caps)
    out.update(sample_social(cfg, substream(cfg.seed, "social"), caps))
    out.update(sample_env(cfg, substream(cfg.seed, "env")))
    return out


# -- assembly -----------------------------------------------------------------

def generate(cfg: GenConfig) -> SSCInstance:
    cfg.validate()
    lay = _layout(cfg)
    opc = sample_opc(cfg, substream(cfg.seed, "opc"))
    dmd_c = sample_demand(cfg, substream(cfg.seed, "demand"))
    items = sample_items(cfg, substream(cfg.seed, "items"), opc)
    caps = sample_capacities(cfg, substream(cfg.seed, "capacities"), dmd_c, items)
    rest = sample_costs_social_env(cfg, items, caps)

    E, M, A, G = len(lay.entities), len(lay.items), len(lay.modes), len(lay.techs)
    T, C = cfg.periods, cfg.n_categories
    sup, fac = lay.idx("entities", "sup"), lay.idx("entities", "f")
    fw = fac + lay.idx("entities", "w")
    cust = lay.idx("entities", "c")
    rm, fp, rp = (lay.idx("items", k) for k in ("rm", "fp", "rp"))
    prod = lay.idx("techs", "prod")
    trucks = lay.idx("modes", "truck")

    a = {}
    a["dmd"] = np.zeros((M, E, T))
    a["dmd"][np.ix_(fp, cust, range(T))] = dmd_c
    a["bom_prod"] = np.zeros((M, M, G))
    a["bom_prod"][np.ix_(rm, fp, prod)] = items["bom_prod"]
    a["bom_rem"] = np.zeros((M, M))
    a["bom_rem"][rp, fp] = items["bom_rem"]
    a["pw"], a["apu"] = items["pw"], items["apu"]
    a["ret_frac"] = np.zeros(M)
    a["ret_frac"][rp] = items["ret_frac"]
    a["w_tech"] = items["w_tech"]
    for key in ("ic_max", "ic_min"):
        a[key] = np.zeros((M, E))
        a[key][np.ix_(fp, fw)] = caps[key]
    a["pc_max"], a["pc_min"] = caps["pc_max"], caps["pc_min"]
    for key in ("ea_max", "ea_min"):
        a[key] = np.zeros(E)
        a[key][fw] = caps[key]
    for key in ("sc_max", "sc_min"):
        a[key] = np.zeros((M, E))
        a[key][np.ix_(rm, sup)] = caps[key]
    a["ec_max"] = np.full(E, caps["ec"])
    a["dist"] = caps["dist"]
    a["tec"], a["opc"] = rest["tec"], opc
    a["psu"] = np.zeros(M)
    a["psu"][fp] = rest["psu"]
    a["inv_cost"] = np.zeros(M)
    a["inv_cost"][fp] = rest["inv_cost"]
    a["rpc"] = np.zeros(M)
    a["rpc"][rp] = rest["rpc"]
    a["rmc"] = np.zeros((M, E))
    a["rmc"][np.ix_(rm, sup)] = rest["rmc"]
    a["avc"] = np.zeros(A)
    a["avc"][trucks] = rest["avc"]

    # transport capacities scale with the heaviest period's demand weight
    peak = max(sum(items["pw"][cfg.n_rm + m] * dmd_c[m, :, t].sum() for m in range(cfg.n_fp))
               for t in range(T))
    vrng = substream(cfg.seed, "transport")
    truck_cap = [math.ceil(vrng.uniform(cfg.lbvcap, cfg.ubvcap) * peak) for _ in trucks]
    a["vcap"] = np.array(truck_cap + [math.ceil(cfg.hub_vcap_factor * peak)] * 2, dtype=float)
    a["ntrips"] = np.full(A, cfg.ntrips)
    a["tariff"] = np.array([0.0] * len(trucks) + [cfg.air_tariff, cfg.sea_tariff])

    for key in ("sqmc", "workers", "wpsq"):
        a[key] = np.zeros(E)
        a[key][fw] = rest[key]
    a["lc"], a["gdp"], a["unemp"] = rest["lc"], rest["gdp"], rest["unemp"]
    a["ei_inst"] = rest["ei_inst"]
    a["ei_prod"] = np.zeros((M, G, C))
    a["ei_prod"][fp] = rest["ei_prod"]
    a["ei_trans"] = rest["ei_trans"]

    inst = SSCInstance(
        entities=list(lay.entities), items=list(lay.items), modes=list(lay.modes),
        techs=list(lay.techs),
        h_prod=[(m, g) for m in fp for g in prod],
        h_rem=[(m, g) for m in fp for g in lay.idx("techs", "rem")],
        periods=T, n_categories=C, fuel_price=cfg.fuel_price, discount_rate=cfg.discount_rate,
        arrays={k: np.asarray(v, dtype=float) for k, v in a.items()},
        meta={"generator": "sscmo.instgen", "config_version": CONFIG_VERSION, "seed": cfg.seed,
              "profile": cfg.profile, "capacity_guard": "ok" if caps["guard_ok"] else "failed"},
    )
    inst = apply_profile(inst, cfg.profile)
    problems = validate_instance(inst)
    if problems:
        raise ConfigError("generated instance invalid: " + "; ".join(problems))
    return inst


def apply_profile(inst: SSCInstance, profile: str) -> SSCInstance:
    """Profile variants of a standard instance; returns a new instance."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    out = SSCInstance(**{f.name: getattr(inst, f.name) for f in fields(SSCInstance)})
    out.arrays = {k: v.copy() for k, v in inst.arrays.items()}
    out.meta = dict(inst.meta, profile=profile)
    arr = out.arrays
    if profile == "TECHC":
        arr["tec"][:] = arr["tec"].mean()
    elif profile == "RAWC":
        sup = inst.of_kind("sup")
        for m in inst.of_kind("rm"):
            arr["rmc"][m, sup] = arr["rmc"][m, sup].mean()
    elif profile == "SUP":
        arr["sc_min"][:] = 0.0
    elif profile == "CAP":
        arr["pc_min"][:] = 0.0
    return out


def illustrative_config(seed: int = 1, periods: int = 3, **overrides) -> GenConfig:
    """One supplier, one factory, two of each other entity; second warehouse,
    customer, airport and seaport overseas."""
    base = dict(seed=seed, periods=periods, n_sup=1, n_f=1, n_w=2, n_c=2, n_air=2, n_port=2,
                n_rm=2, n_fp=1, n_prod=3, n_rem=3)
    base.update(overrides)
    return replace(GenConfig(), **base)


def tiny_config(seed: int = 1, periods: int = 2, **overrides) -> GenConfig:
    """One supplier, factory, warehouse and customer; no hubs."""
    base = dict(seed=seed, periods=periods, n_sup=1, n_f=1, n_w=1, n_c=1, n_air=0, n_port=0,
                n_rm=1, n_fp=1, n_prod=1, n_rem=1, n_trucks=1, overseas_w=0, overseas_c=0,
                overseas_air=0, overseas_port=0)
    base.update(overrides)
    return replace(GenConfig(), **base)

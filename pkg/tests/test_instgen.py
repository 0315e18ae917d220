import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sscmo import instgen
from sscmo.instgen import (AVC, EI_INST, EI_PROD, EI_TRANS, GDP, LC, UNEMP, ConfigError, GenConfig,
                           apply_profile, dump_config, generate, illustrative_config, load_config,
                           sample_capacities, sample_demand, sample_items, sample_opc, tiny_config)
from sscmo.rng import Xoshiro256, splitmix64, substream
from sscmo.ssc.instance import SSCInstance, validate_instance


# -- rng ----------------------------------------------------------------------

def test_xoshiro_reference_vector():
    rng = Xoshiro256.from_state([1, 2, 3, 4])
    assert [rng.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_splitmix_reference():
    # first output of splitmix64 from state 0
    assert splitmix64(0)[1] == 0xE220A8397B1DCDAF


def test_substreams_differ_and_repeat():
    a = [substream(7, "demand").next_u64() for _ in range(2)]
    assert a[0] == a[1]
    assert substream(7, "demand").next_u64() != substream(7, "items").next_u64()


@given(st.integers(0, 2**64 - 1), st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_uniform_support(seed, lo, width):
    rng = Xoshiro256(seed)
    for _ in range(5):
        u = rng.random()
        assert 0.0 <= u < 1.0
        x = rng.uniform(lo, lo + width)
        assert lo <= x <= lo + width


# -- config -------------------------------------------------------------------

def test_shipped_config_equals_defaults():
    assert load_config() == GenConfig()


def test_config_round_trip(tmp_path):
    cfg = replace(GenConfig(), seed=11, profile="CAP", vart=0.1)
    p = tmp_path / "c.cfg"
    p.write_text(dump_config(cfg))
    assert load_config(p) == cfg


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        replace(GenConfig(), lbdc=400.0).validate()
    with pytest.raises(ConfigError):
        replace(GenConfig(), ubrpc=0.6).validate()
    with pytest.raises(ConfigError):
        replace(GenConfig(), vart=1.5).validate()
    with pytest.raises(ConfigError):
        replace(GenConfig(), profile="XYZ").validate()
    p = tmp_path / "bad.cfg"
    p.write_text("version = 1\nnot_a_key = 3\n")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("version = 9\n")
    with pytest.raises(ConfigError):
        load_config(p)


# -- sections -----------------------------------------------------------------

def test_demand_recurrence():
    cfg = replace(GenConfig(), n_fp=1, n_c=1, vart=0.1, lbdc=100.0, ubdc=100.0)
    d = sample_demand(cfg, Xoshiro256(1))
    assert d[0, 0] == pytest.approx([100.0, 110.0, 121.0])


def test_demand_constant_without_growth():
    cfg = replace(GenConfig(), vart=0.0)
    d = sample_demand(cfg, Xoshiro256(3))
    assert np.all(d == d[:, :, :1])
    assert np.all((d[:, :, 0] >= cfg.lbdc) & (d[:, :, 0] <= cfg.ubdc))


def test_final_product_weight_formula():
    # one raw material of weight 2, bill 3 for the single technology: 3*2/1
    cfg = replace(GenConfig(), n_rm=1, n_fp=1, n_prod=1, lbpw=2.0, ubpw=2.0, lbbom_prod=3.0,
                  ubbom_prod=3.0, lbbom_rem=2.0, ubbom_rem=2.0)
    items = sample_items(cfg, Xoshiro256(1), np.array([5.0, 5.0, 5.0, 5.0]))
    pw = items["pw"]
    assert pw[1] == pytest.approx(6.0)
    assert pw[2] == pytest.approx(12.0)


def test_no_returns_when_ubret_zero():
    inst = generate(replace(illustrative_config(2), ubret=0.0))
    assert np.all(inst.ret_frac == 0.0)


def test_workforce_per_technology():
    cfg = GenConfig()
    opc = sample_opc(cfg, Xoshiro256(4))
    items = sample_items(cfg, Xoshiro256(4), opc)
    assert items["w_tech"] == pytest.approx(cfg.fracwg * np.ceil(opc))


def test_capacity_identities():
    cfg = GenConfig(seed=5)
    d = sample_demand(cfg, Xoshiro256(5))
    items = sample_items(cfg, Xoshiro256(6), sample_opc(cfg, Xoshiro256(7)))
    caps = sample_capacities(cfg, Xoshiro256(8), d, items)
    assert caps["pc_min"] == pytest.approx(cfg.lbpc_min * caps["pc_max"])
    assert np.all(caps["sc_min"] >= cfg.lbsc * caps["sc_max"] - 1e-9)
    assert np.all(caps["sc_min"] <= cfg.ubsc * caps["sc_max"] + 1e-9)
    tot = d.sum(axis=1)
    lo = np.ceil(cfg.icfrac_max * tot.max(axis=1))
    hi = np.ceil((cfg.icfrac_max + 1) * tot.max(axis=1))
    assert np.all(caps["ic_max"] >= lo[:, None]) and np.all(caps["ic_max"] <= hi[:, None])


def test_ic_max_at_lower_edge_of_draw():
    # icfrac 0.5, total demand 100 and a zero draw give 50
    cfg = replace(GenConfig(), n_fp=1, n_c=1, periods=1, lbdc=100.0, ubdc=100.0)

    class Zero(Xoshiro256):
        def random(self):
            return 0.0

    d = sample_demand(cfg, Xoshiro256(1))
    items = sample_items(cfg, Xoshiro256(1), sample_opc(cfg, Xoshiro256(1)))
    caps = sample_capacities(cfg, Zero(1), d, items)
    assert np.all(caps["ic_max"] == 50.0)


# -- generate -----------------------------------------------------------------

def test_standard_shape():
    inst = generate(GenConfig())
    counts = {k: len(inst.of_kind(k)) for k in ("sup", "f", "w", "c", "air", "port")}
    assert counts == {"sup": 3, "f": 3, "w": 3, "c": 4, "air": 2, "port": 2}
    assert len(inst.of_kind("rm")) == 2 and len(inst.of_kind("fp")) == 1
    assert len(inst.techs) == 6


@pytest.mark.parametrize("make", [GenConfig, illustrative_config, tiny_config])
def test_generated_instances_validate(make):
    inst = generate(make(seed=3) if make is not GenConfig else GenConfig(seed=3))
    assert validate_instance(inst) == []
    assert inst.meta["capacity_guard"] == "ok"


def test_determinism_bytes(tmp_path):
    a = generate(GenConfig(seed=7)).dumps()
    b = generate(GenConfig(seed=7)).dumps()
    assert a == b
    assert generate(GenConfig(seed=8)).dumps() != a


def test_json_round_trip(tmp_path):
    inst = generate(illustrative_config(4))
    inst.save(tmp_path / "i.json")
    back = SSCInstance.load(tmp_path / "i.json")
    assert back.dumps() == inst.dumps()


def test_sections_do_not_shift_each_other():
    # changing an env-only knob leaves demand and capacities untouched
    a = generate(GenConfig(seed=2))
    b = generate(replace(GenConfig(seed=2), n_categories=3))
    assert np.array_equal(a.dmd, b.dmd) and np.array_equal(a.ic_max, b.ic_max)


@given(st.integers(0, 2**32))
def test_feasibility_bias(seed):
    inst = generate(GenConfig(seed=seed))
    fp = inst.of_kind("fp")
    prod = [g for g, t in enumerate(inst.techs) if t.kind == "prod"]
    n_f = len(inst.of_kind("f"))
    assert inst.meta["capacity_guard"] == "ok"
    per_t = inst.dmd[fp].sum(axis=1)
    assert np.all(n_f * inst.pc_max[prod].max() >= per_t.max(axis=1))


# -- profiles -----------------------------------------------------------------

def test_profiles():
    base = generate(GenConfig(seed=4))
    assert apply_profile(base, "STD").dumps() == base.dumps()
    assert np.all(apply_profile(base, "SUP").sc_min == 0.0)
    assert np.all(apply_profile(base, "CAP").pc_min == 0.0)
    techc = apply_profile(base, "TECHC").tec
    assert np.allclose(techc, techc[0])
    rawc = apply_profile(base, "RAWC")
    sup = base.of_kind("sup")
    for m in base.of_kind("rm"):
        assert np.allclose(rawc.rmc[m, sup], rawc.rmc[m, sup][0])
    # the source instance is not modified
    assert not np.all(base.sc_min == 0.0)
    with pytest.raises(ConfigError):
        apply_profile(base, "NOPE")


def test_profile_via_config():
    inst = generate(GenConfig(seed=4, profile="SUP"))
    assert np.all(inst.sc_min == 0.0) and inst.meta["profile"] == "SUP"


# -- supports -----------------------------------------------------------------

def supports(cfg: GenConfig, inst: SSCInstance) -> dict:
    """Support interval of every sampled array (entries that are sampled)."""
    fw = inst.of_kind("f") + inst.of_kind("w")
    f, w = inst.of_kind("f"), inst.of_kind("w")
    trucks = [k for k, m in enumerate(inst.modes) if m.kind == "truck"]
    fp, rp = inst.of_kind("fp"), inst.of_kind("rp")
    rm = inst.of_kind("rm")
    prod = [g for g, t in enumerate(inst.techs) if t.kind == "prod"]
    return {
        "avc": (inst.avc[trucks], AVC),
        "lc": (inst.lc, LC),
        "gdp": (inst.gdp, GDP),
        "unemp": (inst.unemp, UNEMP),
        "ei_inst": (inst.ei_inst, EI_INST),
        "ei_prod": (inst.ei_prod[fp], EI_PROD),
        "ei_trans": (inst.ei_trans, EI_TRANS),
        "dmd_t1": (inst.dmd[np.ix_(fp, inst.of_kind("c"), [0])], (cfg.lbdc, cfg.ubdc)),
        "pw_rm": (inst.pw[rm], (cfg.lbpw, cfg.ubpw)),
        "apu_rm": (inst.apu[rm], (cfg.lbapu, cfg.ubapu)),
        "ret": (inst.ret_frac[rp], (0.0, cfg.ubret)),
        "bom_prod": (inst.bom_prod[np.ix_(rm, fp, prod)], (cfg.lbbom_prod, cfg.ubbom_prod)),
        "opc": (inst.opc, (cfg.lbopc, cfg.ubopc)),
        "psu": (inst.psu[fp], (cfg.lbpsu, cfg.ubpsu)),
        "rmc": (inst.rmc[np.ix_(rm, inst.of_kind("sup"))], (cfg.lbrmc, cfg.ubrmc)),
        "ea_max_f": (inst.ea_max[f], (cfg.lbeaf_max, cfg.ubeaf_max)),
        "ea_max_w": (inst.ea_max[w], (cfg.lbeaw_max, cfg.ubeaw_max)),
        "workers_f": (inst.workers[f], (cfg.lbwf, cfg.ubwf)),
        "workers_w": (inst.workers[w], (cfg.lbww, cfg.ubww)),
        "wpsq_f": (inst.wpsq[f], (cfg.lbwpsqf, cfg.ubwpsqf)),
        "wpsq_w": (inst.wpsq[w], (cfg.lbwpsqw, cfg.ubwpsqw)),
        "dist": (inst.dist[np.triu_indices(len(inst.entities), 1)], (cfg.lbdist, cfg.ubdist)),
        "tec": (inst.tec / inst.pc_max, (cfg.lbtec, cfg.ubtech)),
        "sqmc_lo": (inst.sqmc[fw] - 0.5 * inst.lc[fw] * inst.ea_max[fw], (0.0, math.inf)),
        "rpc_frac": (inst.rpc[rp] / (inst.bom_rem[rp][:, fp].sum(axis=1) * inst.psu[fp]),
                     (cfg.lbrpc, cfg.ubrpc)),
    }


def sampled_values_in_support(seeds) -> int:
    n = 0
    for seed in seeds:
        cfg = GenConfig(seed=seed)
        inst = generate(cfg)
        for name, (vals, (lo, hi)) in supports(cfg, inst).items():
            vals = np.asarray(vals, dtype=float).ravel()
            assert np.all(vals >= lo - 1e-9 * max(1, abs(lo))), name
            assert np.all(vals <= hi + 1e-9 * max(1, abs(hi))), name
            n += vals.size
    return n


def test_supports_small():
    assert sampled_values_in_support(range(1, 4)) > 300


def test_layout_helpers_exist():
    assert instgen.PROFILES == ("STD", "TECHC", "RAWC", "SUP", "CAP")

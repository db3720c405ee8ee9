import math

import pytest

import uavqa


def small_scenario(**extra):
    cfg = {"num_uavs": 3, "num_gus": 12, "seed": 5, "power_levels_dbm": [20, 30]}
    cfg.update(extra)
    return uavqa.generate_scenario(cfg)


def test_scenario_shape():
    s = small_scenario()
    assert len(s["uav_positions"]) == 3
    assert len(s["gu_positions"]) == 12
    g = uavqa.gain_matrix(s)
    assert len(g) == 3 and len(g[0]) == 12
    assert all(0 < v < 1 for row in g for v in row)


def test_cluster_matches_nearest():
    s = small_scenario()
    c = uavqa.cluster(s, solver="sa", seed=1)
    assert c["poor_matching_pct"] == 0.0
    assert len(c["serving_uav"]) == 12
    assert all(0 <= m < 3 for m in c["serving_uav"])


def test_pipeline_and_allocation():
    s = small_scenario(num_gus=6)
    r = uavqa.pipeline(s, solver="exhaustive")
    assert r["sum_rate"] > 0
    plan = uavqa.allocate(s, r["clustering"], solver="exhaustive")
    assert math.isclose(plan["sum_rate"], r["sum_rate"], rel_tol=1e-12)
    sd = uavqa.pipeline(s, solver="sd", seed=3)
    assert r["sum_rate"] >= sd["sum_rate"] - 1e-9


def test_qubo_roundtrip():
    s = small_scenario(num_gus=4)
    q = uavqa.clustering_qubo(s)
    bits, energy = uavqa.solve_qubo(q, solver="exhaustive")
    assert len(bits) == q["num_vars"] == 12
    bits_sa, energy_sa = uavqa.solve_qubo(q, solver="sa", seed=2)
    assert energy_sa == pytest.approx(energy)


def test_sweep_is_deterministic():
    cfg = {
        "scenario": {"num_gus": 10, "power_levels_dbm": [20, 30]},
        "num_uavs": [2, 3],
        "roster": ["sa", "sd"],
        "seeds": [0, 1],
        "threads": 1,
        "solver": {"sa_sweeps": 100, "sa_restarts": 2},
    }
    a, b = uavqa.sweep(cfg), uavqa.sweep(cfg)
    strip = lambda rs: [{k: v for k, v in r.items() if "time_s" not in k} for r in rs]
    assert strip(a) == strip(b)
    assert len(a) == 8 and all(r["status"] == "ok" for r in a)


def test_errors():
    with pytest.raises(uavqa.ConfigError):
        uavqa.generate_scenario({"bogus": 1})
    with pytest.raises(ValueError):
        uavqa.pipeline(small_scenario(), solver="nope")

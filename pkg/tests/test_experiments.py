import json
import math

import numpy as np
import pytest

from emptytri.bodies import normalize_body, unit_square_body
from emptytri.engine import brute_force_empty_triangles, degree_report
from emptytri.geom import GeometryError, PointSet
from emptytri.ordertypes import convex_position_label
from emptytri import experiments as ex


def small_cfg(name, **kw):
    return ex.default_config(name, **kw)


def test_config_validation():
    with pytest.raises(GeometryError):
        small_cfg("valtr", n_grid=[100, 100]).validate()
    with pytest.raises(GeometryError):
        small_cfg("valtr", trials=0).validate()
    with pytest.raises(GeometryError):
        small_cfg("valtr", n_grid=[10, 20], trials=[5]).validate()
    with pytest.raises(GeometryError):
        ex.run_experiment("nope", small_cfg("valtr"))


def test_deg_growth_degenerate_n3():
    res = ex.exp_deg_growth(small_cfg("deg-growth", n_grid=[3], trials=25, seed=1))
    row = res.row(3, "deg_max")
    assert row.mean == 1.0 and row.stderr == 0.0
    assert res.extras["eq1_violations"] == 0


def test_deg_growth_small_run():
    res = ex.exp_deg_growth(
        small_cfg("deg-growth", n_grid=[40, 80], trials=20, seed=2)
    )
    r40 = res.row(40, "deg_max")
    r80 = res.row(80, "deg_max")
    assert r40.trials == 20 and r40.ci_lo < r40.mean < r40.ci_hi
    assert r80.mean > r40.mean
    assert res.extras["c_hat"] > 0
    assert res.extras["eq1_violations"] == 0


def test_valtr_n4_two_cases():
    res = ex.exp_valtr(small_cfg("valtr", n_grid=[4], trials=60, seed=3))
    row = res.row(4, "f_over_n2")
    # per draw f is 3 or 4, so the mean lies in [3/16, 4/16]
    assert 3 / 16 <= row.mean <= 4 / 16
    assert 3 <= row.mean * 16 <= 4


def test_ntpairs_tiny_alpha_is_zero():
    res = ex.exp_ntpairs(
        small_cfg("ntpairs", n_grid=[200], trials=30, seed=4, t_alpha=0.01)
    )
    row = res.row(200, "n_t")
    assert row.mean <= row.ci_hi <= 0.05


def test_ntpairs_matches_prediction_loosely():
    res = ex.exp_ntpairs(small_cfg("ntpairs", n_grid=[500], trials=150, seed=5))
    row = res.row(500, "n_t")
    predicted = res.extras["predicted"]
    assert predicted == pytest.approx(2 * math.pi)
    assert 0.7 * predicted <= row.mean <= 1.3 * predicted


def test_tail_zero_and_note():
    res = ex.exp_tail(small_cfg("tail", n_grid=[200], trials=300, seed=6))
    row = res.row(200, "tail_freq")
    assert row.mean == 0.0
    assert row.ci_hi > 0.0  # Wilson interval keeps a positive upper limit
    assert "one-sided" in res.extras["note"]
    assert res.extras["threshold_144_ln_n"]["200"] == pytest.approx(144 * math.log(200))
    assert res.extras["k_overlay"]["200"] == pytest.approx(435 * math.log(200))


def test_lemma_ad_degenerate_exact():
    cfg = small_cfg("lemma-ad", n_grid=[3], trials=40, seed=7,
                    x=(0.5, 0.5), y=(0.503, 0.5))
    res = ex.exp_lemma_ad(cfg)
    assert res.row(3, "pair_degree_mc").mean == 1.0
    assert res.row(3, "pair_degree_quadrature").mean == 1.0
    assert res.extras["z_score"] == 0.0


def test_lemma_ad_agreement_small():
    cfg = small_cfg("lemma-ad", trials=250, seed=8)
    res = ex.exp_lemma_ad(cfg)
    assert abs(res.extras["z_score"]) <= 4.0
    assert res.extras["pair_in_rho_disk"]
    assert res.extras["mc_ge_bound"] and res.extras["quad_ge_bound"]


def test_lemma_ad_rejects_distant_pair():
    cfg = small_cfg("lemma-ad", trials=10, seed=9, x=(0.2, 0.2), y=(0.8, 0.8))
    with pytest.raises(GeometryError):
        ex.exp_lemma_ad(cfg)


def test_transfer_always_true_ratio_one():
    res = ex.exp_transfer(
        small_cfg("transfer", n_grid=[50], trials=40, seed=10, event="always-true")
    )
    row = res.row(50, "ratio")
    assert row.mean == 1.0
    assert row.ci_lo == 1.0 and row.ci_hi == 1.0


def test_transfer_impossible_event_indeterminate():
    res = ex.exp_transfer(
        small_cfg("transfer", n_grid=[50], trials=25, seed=11,
                  event="max-count-ge:50")
    )
    assert res.extras["indeterminate"] == [50]
    with pytest.raises(KeyError):
        res.row(50, "ratio")


def test_transfer_single_coordinate_event():
    res = ex.exp_transfer(
        small_cfg("transfer", n_grid=[100, 400], trials=600, seed=12, event="n1-eq:0")
    )
    for n in (100, 400):
        row = res.row(n, "ratio")
        assert 0.8 <= row.mean <= 1.25  # single squares decouple
    assert res.extras["event"] == "n1-eq:0"


def test_transfer_unknown_event():
    with pytest.raises(GeometryError):
        ex.exp_transfer(small_cfg("transfer", event="bogus:1"))


def test_bl_requires_l_ge_3():
    with pytest.raises(GeometryError):
        ex.exp_bl(small_cfg("bl", L=2))


def test_bl_l3_reduces_to_occupancy():
    # with L=3 the event is exactly "some square holds exactly 3 points"
    from emptytri.bodies import build_grid, occupancy_from_sample, sample_uniform

    cfg = small_cfg("bl", n_grid=[60], trials=40, seed=13, L=3)
    res = ex.exp_bl(cfg)
    body, _ = normalize_body(unit_square_body())
    grid = build_grid(body, 60)
    hits = 0
    for t in range(40):
        ps = sample_uniform(body, 60, cfg.seed, trial=t)
        occ = occupancy_from_sample(ps, grid)
        if any(int(c) == 3 for c in occ.counts):
            hits += 1
    assert res.row(60, "bl_freq").mean == pytest.approx(hits / 40)


def test_every_four_point_set_has_degree_two(rng):
    # the two 4-point order types both give deg = 2
    for pts in ([(0, 0), (10, 0), (11, 9), (1, 10)], [(0, 0), (6, 0), (3, 5), (3, 2)]):
        assert brute_force_empty_triangles(PointSet(pts)).deg_max == 2
    from conftest import random_gp_set

    for _ in range(40):
        ps = random_gp_set(rng, 4, box=100)
        assert degree_report(ps).deg_max == 2


def test_ordertype_triangle_matches_occupancy():
    from emptytri.bodies import build_grid, occupancy_from_sample, sample_uniform

    cfg = small_cfg("ordertype-search", n_grid=[60], trials=30, seed=14)
    res = ex.exp_ordertype_search(cfg, label=convex_position_label(3))
    body, _ = normalize_body(unit_square_body())
    grid = build_grid(body, 60)
    hits = 0
    for t in range(30):
        ps = sample_uniform(body, 60, cfg.seed, trial=t)
        occ = occupancy_from_sample(ps, grid)
        if any(int(c) == 3 for c in occ.counts):
            hits += 1
    assert res.row(60, "hit_freq").mean == pytest.approx(hits / 30)
    assert res.extras["rate_positive"]


def test_minimize_f_monotone_and_deterministic():
    best, trace = ex.minimize_f(8, 1500, seed=15)
    assert trace[0][1] >= trace[-1][1]
    fs = [f for _, f in trace]
    assert fs == sorted(fs, reverse=True)
    rep = degree_report(best)
    assert rep.f == trace[-1][1]
    assert rep.f >= 8 * 8 - 5 * 8
    best2, trace2 = ex.minimize_f(8, 1500, seed=15)
    assert np.array_equal(best.points, best2.points) and trace == trace2


def test_minimize_f_requires_n5():
    with pytest.raises(GeometryError):
        ex.minimize_f(4, 10, seed=1)


def test_minimize_f_beats_random_baseline():
    baseline = ex.exp_valtr(
        ex.default_config("valtr", n_grid=[10], trials=150, seed=42)
    ).row(10, "f_over_n2").mean
    _, trace = ex.minimize_f(10, 30000, seed=8613)
    assert trace[-1][1] / 100.0 < baseline


def test_exp_minimize_f_result():
    cfg = small_cfg("minimize-f", n_grid=[8], iterations=800, seed=16)
    res = ex.exp_minimize_f(cfg)
    f0 = res.row(8, "f_initial").mean
    f1 = res.row(8, "f_final").mean
    assert f1 <= f0
    assert res.extras["f_floor_n2_minus_5n"] == 24
    pts = PointSet(res.extras["best_points"])
    assert degree_report(pts).f == f1


def test_reproducibility_and_workers():
    cfg = small_cfg("valtr", n_grid=[30], trials=12, seed=17)
    a = ex.exp_valtr(cfg)
    b = ex.exp_valtr(small_cfg("valtr", n_grid=[30], trials=12, seed=17))
    assert a.to_csv_text() == b.to_csv_text()
    assert a.to_json_text() == b.to_json_text()
    c = ex.exp_valtr(small_cfg("valtr", n_grid=[30], trials=12, seed=17, workers=2))
    assert a.to_csv_text() == c.to_csv_text()


def test_rows_always_carry_ci():
    res = ex.exp_valtr(small_cfg("valtr", n_grid=[20], trials=8, seed=18))
    for row in res.rows:
        assert row.trials >= 1
        assert row.ci_lo <= row.mean <= row.ci_hi


def test_frozen_check():
    cfg = small_cfg("deg-growth", n_grid=[3], trials=5, seed=19)
    res = ex.exp_deg_growth(cfg)
    ok = {"rows": [{"n": 3, "statistic": "deg_max", "expected": 1.0, "abs_tol": 0.0}]}
    assert ex.check_frozen(res, ok) == []
    bad = {"rows": [{"n": 3, "statistic": "deg_max", "expected": 2.0, "abs_tol": 0.5}]}
    assert len(ex.check_frozen(res, bad)) == 1
    missing = {"rows": [{"n": 5, "statistic": "deg_max", "expected": 1.0, "abs_tol": 1.0}]}
    assert "missing row" in ex.check_frozen(res, missing)[0]


def test_csv_layout():
    res = ex.exp_valtr(small_cfg("valtr", n_grid=[20], trials=5, seed=20))
    lines = res.to_csv_text().splitlines()
    assert lines[0].startswith("# emptytri")
    assert lines[1].startswith("# experiment=valtr seed=20")
    assert lines[2].startswith("# config=")
    assert lines[3] == "n,statistic,mean,stderr,ci_lo,ci_hi,trials"
    assert len(lines) == 5
    doc = json.loads(res.to_json_text())
    assert doc["meta"]["seed"] == 20
    assert doc["rows"][0]["statistic"] == "f_over_n2"

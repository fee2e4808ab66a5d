import numpy as np
import pytest

from stablemaps import harness as H
from stablemaps import looptree as L


def test_config_validation():
    with pytest.raises(ValueError):
        H.CampaignConfig(experiment="nope")
    with pytest.raises(ValueError):
        H.CampaignConfig(experiment="verify", samples=0)
    with pytest.raises(ValueError):
        H.CampaignConfig(experiment="verify", n_list=(1,))


def test_campaign_determinism():
    cfg = H.CampaignConfig(experiment="two_point", n_list=(200,), samples=6, seed=11)
    a = H.records_to_jsonl(H.run_campaign(cfg))
    b = H.records_to_jsonl(H.run_campaign(cfg))
    assert a == b
    assert a.count("\n") == 6


def test_campaign_threads_match_serial(monkeypatch):
    cfg = H.CampaignConfig(experiment="two_point", n_list=(150,), samples=8, seed=12)
    serial = H.records_to_jsonl(H.run_campaign(cfg))
    monkeypatch.setenv("STABLEMAPS_THREADS", "4")
    threaded = H.records_to_jsonl(H.run_campaign(cfg))
    assert serial == threaded


def test_verify_campaign_clean():
    cfg = H.CampaignConfig(experiment="verify", n_list=(250,), samples=8, seed=13)
    recs = H.run_campaign(cfg)
    assert sum(r["stats"]["violations"] for r in recs) == 0


def test_coupling_campaign_exact():
    cfg = H.CampaignConfig(experiment="coupling", n_list=(300,), samples=6,
                           seed=14, grid=20)
    recs = H.run_campaign(cfg)
    assert sum(r["stats"]["violations"] for r in recs) == 0


def test_ball_volume_estimator():
    cfg = H.CampaignConfig(experiment="ball_volume", n_list=(3000,), samples=30,
                           seed=15, grid=24)
    est = H.ball_volume_exponent(H.run_campaign(cfg))
    assert 3000 in est
    assert abs(est[3000]["slope"] - 3.0) < 0.5  # loose: small n, module test
    assert est[3000]["stderr"] > 0


def test_ball_volume_degenerate_grid():
    cfg = H.CampaignConfig(experiment="ball_volume", n_list=(500,), samples=3,
                           seed=16, grid=2)
    with pytest.raises(ValueError):
        H.ball_volume_exponent(H.run_campaign(cfg), window=(0.5, 0.500001))


def test_two_point_estimator_monotone_quantiles():
    cfg = H.CampaignConfig(experiment="two_point", n_list=(400,), samples=40, seed=17)
    tp = H.two_point_scaling(H.run_campaign(cfg))
    row = tp[400]
    assert 0 <= row["q25"] <= row["median"] <= row["q75"]
    assert row["mean_delay_weight"] >= 0


# ---------------------------------------------------------------------------
# laminations


def test_lamination_empty():
    svg = H.render_lamination(np.zeros(0), "X")
    assert svg.count("<line") == 0 and "<circle" in svg


def test_lamination_pair_chords_match_detection():
    ex = L.JumpExcursion(t=np.linspace(0, 1, 8),
                         x=np.array([0., 2, 1, 2, 1, 1, 1, 0]))
    pairs = H.lamination_chords(ex.x, "X", ex)
    svg = H.render_lamination(ex.x, "X", excursion=ex)
    assert svg.count('class="pair"') == len(pairs)


def test_lamination_single_jump_polygon():
    ex = L.JumpExcursion(t=np.linspace(0, 1, 6), x=np.array([0., 4, 3, 2, 1, 0]))
    svg = H.render_lamination(ex.x, "X", excursion=ex)
    # boundary of the unique face: 4 consecutive edges plus the closure
    assert svg.count('class="face"') == 5


def test_lamination_z_kind():
    lab = np.array([0., 1, 0, 1, 1, 0])
    pairs = H.lamination_chords(lab, "Z")
    for a, b in pairs:
        assert L.z_metric(lab, int(a), int(b)) == 0.0
    svg = H.render_lamination(lab, "Z")
    assert svg.count('class="pair"') == len(pairs)
    with pytest.raises(ValueError):
        H.lamination_chords(lab, "W")

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from embedblend import (
    BlendConfig,
    GenerationRecord,
    classify_presence,
    count_blend_cases,
    fit_boundary,
    nonword_neighbors,
    ratio_table,
)
from embedblend.blend import decision_threshold, read_scores_csv, snap_ratio


def recount_oracle(scores, n, th):
    """Independent scalar recount of the blend-case definitions."""
    a = sum(1 for sa, _ in scores if sa >= th)
    b = sum(1 for _, sb in scores if sb >= th)
    joint = sum(1 for sa, sb in scores if sa >= th and sb >= th)
    a_det, b_det = a >= n, b >= n
    return a_det, b_det, joint >= n, a_det and b_det


def logdensity_gap(x, mu0, s0, mu1, s1):
    return (-math.log(s1) - (x - mu1) ** 2 / (2 * s1 ** 2)
            + math.log(s0) + (x - mu0) ** 2 / (2 * s0 ** 2))


def make_record(scores, ratio=0.5, pair_id="p0"):
    return GenerationRecord(pair_id=pair_id, concept_a="calf",
                            concept_b="cave", ratio=ratio, scores=scores)


def test_classify_presence_rules():
    assert classify_presence(0.20, 0.15)
    assert classify_presence(0.15, 0.15)  # boundary inclusive
    assert not classify_presence(0.10, 0.15)


def test_equal_variance_threshold_is_midpoint():
    rng = np.random.default_rng(0)
    noise = rng.normal(scale=0.5, size=20000)
    model = fit_boundary(2.0 + noise, 0.0 + noise)
    assert model.threshold == pytest.approx(1.0, abs=0.02)
    assert not model.flagged


def test_injected_parameters_match_numeric_root():
    # mismatch N(0,1) vs match N(3,2): root of x^2/2 - (x-3)^2/8 = ln 2
    expected = brentq(logdensity_gap, 0.0, 3.0, args=(0.0, 1.0, 3.0, 2.0),
                      xtol=1e-12)
    got = decision_threshold(3.0, 2.0, 0.0, 1.0)
    assert got == pytest.approx(expected, abs=1e-9)


def test_fit_boundary_degenerate_classes():
    with pytest.raises(ValueError):
        fit_boundary([1.0, 1.0, 1.0], [0.0, 0.1])
    with pytest.raises(ValueError):
        fit_boundary([0.5], [0.0, 0.1])


def test_fit_boundary_identical_means():
    with pytest.raises(ValueError):
        fit_boundary([1.0, 3.0], [0.0, 4.0])  # both means exactly 2


def test_count_blend_hand_case():
    rec = make_record([(0.2, 0.2), (0.2, 0.1), (0.1, 0.2)])
    counts = count_blend_cases(rec, BlendConfig(n=2, threshold=0.15))
    assert counts.concept_a_detected and counts.concept_b_detected
    assert counts.mcd and not counts.bcd


def test_count_blend_saturation():
    rec = make_record([(0.3, 0.3)] * 4)
    for n in range(1, 5):
        counts = count_blend_cases(rec, BlendConfig(n=n, threshold=0.15))
        assert counts.bcd and counts.mcd


def test_count_blend_matches_recount_oracle():
    rng = np.random.default_rng(2)
    for _ in range(200):
        scores = [tuple(rng.uniform(0, 0.3, size=2)) for _ in range(10)]
        rec = make_record(scores)
        for n in (1, 2, 5):
            counts = count_blend_cases(rec, BlendConfig(n=n, threshold=0.15))
            expected = recount_oracle(scores, n, 0.15)
            assert (counts.concept_a_detected, counts.concept_b_detected,
                    counts.bcd, counts.mcd) == expected
            assert not counts.bcd or counts.mcd  # bcd implies mcd


def test_detection_monotone_in_n():
    rng = np.random.default_rng(3)
    records = [make_record([tuple(rng.uniform(0, 0.3, 2)) for _ in range(10)],
                           pair_id=f"p{i}")
               for i in range(50)]
    prev = None
    for n in range(1, 11):
        rows = ratio_table(records, BlendConfig(n=n, threshold=0.15))
        overall = rows[-1]
        if prev is not None:
            assert overall.bcd <= prev.bcd + 1e-12
            assert overall.mcd <= prev.mcd + 1e-12
        prev = overall


def test_count_blend_n_exceeds_images():
    rec = make_record([(0.2, 0.2)])
    with pytest.raises(ValueError):
        count_blend_cases(rec, BlendConfig(n=2, threshold=0.15))


def test_ratio_table_singleton():
    rec = make_record([(0.2, 0.2), (0.2, 0.2)], ratio=0.5)
    rows = ratio_table([rec], BlendConfig(n=2, threshold=0.15))
    by_ratio = {r.ratio: r for r in rows}
    assert by_ratio[0.5].support == 1
    assert by_ratio[0.5].bcd == 1.0
    assert by_ratio[0.1].support == 0
    assert by_ratio[0.1].bcd is None
    assert rows[-1].ratio is None and rows[-1].support == 1


def test_ratio_table_matches_hand_tally():
    always = [(0.3, 0.3)] * 3
    never = [(0.0, 0.0)] * 3
    a_only = [(0.3, 0.0)] * 3
    records = [
        make_record(always, ratio=0.5, pair_id="a"),
        make_record(never, ratio=0.5, pair_id="b"),
        make_record(a_only, ratio=0.5, pair_id="c"),
        make_record(always, ratio=0.32, pair_id="d"),  # snaps to 0.3
    ]
    rows = ratio_table(records, BlendConfig(n=2, threshold=0.15))
    by_ratio = {r.ratio: r for r in rows}
    assert by_ratio[0.5].support == 3
    assert by_ratio[0.5].concept_a == pytest.approx(2 / 3)
    assert by_ratio[0.5].concept_b == pytest.approx(1 / 3)
    assert by_ratio[0.5].bcd == pytest.approx(1 / 3)
    assert by_ratio[0.5].mcd == pytest.approx(1 / 3)
    assert by_ratio[0.3].support == 1
    overall = rows[-1]
    assert overall.support == 4
    assert overall.bcd == pytest.approx(2 / 4)


def test_bcd_le_mcd_per_bucket():
    rng = np.random.default_rng(4)
    records = [
        make_record([tuple(rng.uniform(0, 0.3, 2)) for _ in range(6)],
                    ratio=float(rng.choice(np.arange(1, 10) / 10)),
                    pair_id=f"p{i}")
        for i in range(80)
    ]
    rows = ratio_table(records, BlendConfig(n=2, threshold=0.15))
    for row in rows:
        if row.support:
            assert row.bcd <= row.mcd + 1e-12


def test_snap_ratio_grid():
    assert snap_ratio(0.32) == 0.3
    assert snap_ratio(0.05) == 0.1
    assert snap_ratio(0.97) == 0.9


def test_read_scores_csv_round_trip(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text(
        "pair_id,concept_a,concept_b,ratio,image_index,score_a,score_b\n"
        "p0,calf,cave,0.5,0,0.2,0.2\n"
        "p0,calf,cave,0.5,1,0.1,0.25\n"
        "p1,jar,money,0.4,0,0.0,0.3\n"
        "p1,jar,money,0.4,1,0.16,0.3\n"
    )
    records = read_scores_csv(path)
    assert [r.pair_id for r in records] == ["p0", "p1"]
    assert records[0].scores == [(0.2, 0.2), (0.1, 0.25)]
    assert records[1].ratio == 0.4


def test_read_scores_csv_ragged(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text(
        "pair_id,concept_a,concept_b,ratio,image_index,score_a,score_b\n"
        "p0,calf,cave,0.5,0,0.2,0.2\n"
        "p1,jar,money,0.4,0,0.0,0.3\n"
        "p1,jar,money,0.4,1,0.16,0.3\n"
    )
    with pytest.raises(ValueError, match="ragged"):
        read_scores_csv(path)
    assert len(read_scores_csv(path, allow_ragged=True)) == 2


def test_nonword_at_anchor_excluded():
    vocab = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    words = ["alpha", "beta", "gamma"]
    recs = nonword_neighbors(vocab[:1], ["nw0"], words, vocab)
    assert recs[0].first_nn == "alpha"
    assert recs[0].d1 == 0.0
    assert recs[0].pseudo_ratio == 0.0
    assert not recs[0].kept


def test_equidistant_nonword_kept():
    # the close far1/far2 pair pins the 1st-percentile threshold near 1,
    # well under the alpha-beta separation
    vocab = np.array([[0.0, 0.0], [20.0, 0.0], [100.0, 100.0], [100.0, 101.0]])
    words = ["alpha", "beta", "far1", "far2"]
    recs = nonword_neighbors(np.array([[10.0, 0.0]]), ["nw0"], words, vocab)
    rec = recs[0]
    assert {rec.first_nn, rec.second_nn} == {"alpha", "beta"}
    assert rec.pseudo_ratio == pytest.approx(0.5)
    assert rec.kept


def test_closeness_filter_zero_percentile_is_plain_top2():
    rng = np.random.default_rng(5)
    vocab = rng.normal(size=(12, 3))
    words = [f"w{i}" for i in range(12)]
    query = rng.normal(size=(1, 3))
    recs = nonword_neighbors(query, ["nw0"], words, vocab,
                             closeness_percentile=0.0)
    order = np.argsort(np.linalg.norm(vocab - query[0], axis=1))
    assert recs[0].first_nn == words[order[0]]
    assert recs[0].second_nn == words[order[1]]
    assert recs[0].d1 <= recs[0].d2


def test_closeness_filter_skips_near_synonym():
    # beta sits right next to alpha; a high percentile threshold must
    # push the second neighbor out to gamma
    vocab = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [9.0, 0.0]])
    words = ["alpha", "beta", "gamma", "delta"]
    recs = nonword_neighbors(np.array([[0.2, 0.0]]), ["nw0"], words, vocab,
                             closeness_percentile=50.0)
    assert recs[0].first_nn == "beta"
    assert recs[0].second_nn in ("gamma", "delta")
    assert recs[0].d1 <= recs[0].d2


def test_no_eligible_second_neighbor_flagged():
    # threshold = max pairwise distance (10.1); no word is that far from
    # beta, the first neighbor
    vocab = np.array([[0.0], [10.0], [10.1]])
    words = ["alpha", "beta", "gamma"]
    recs = nonword_neighbors(np.array([[10.01]]), ["nw0"], words, vocab,
                             closeness_percentile=100.0)
    rec = recs[0]
    assert rec.no_eligible_second and not rec.kept
    assert rec.second_nn is None

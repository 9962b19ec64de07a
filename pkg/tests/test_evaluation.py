"""Evaluation measures, fold protocol and sweep tests.

Agreement measures are checked against a brute-force oracle that
materializes both keyphrase sets and intersects them with Python set
operations; the t statistic is checked against scipy.
"""
import json
import math
import random

import pytest
import scipy.stats

from kpindex.evaluation import (
    CSV_COLUMNS,
    DEFAULT_CV_PAIRINGS,
    DEFAULT_SWEEP_THRESHOLDS,
    PAIRING_NAMES,
    T_CRITICAL_02,
    T_CRITICAL_05,
    MatchResult,
    agreement_scores,
    count_test_instances,
    cross_validate,
    error_rate,
    make_folds,
    match_keyphrases,
    paired_t_test,
    precision_recall_f,
    report_csv_lines,
    report_summary,
    sweep_csv_lines,
    sweep_summary,
    threshold_sweep,
    write_json,
    write_lines,
)
from kpindex.candidates import generate_candidates
from kpindex.textkit import document_from_text


# ---------------------------------------------------------------------------
# Matching


def test_match_set_arithmetic():
    result = match_keyphrases(["a1", "b1", "c1", "d1"], ["c1", "d1", "e1", "f1"])
    assert (result.M, result.N, result.O) == (4, 4, 2)
    assert (result.FP, result.FN) == (2, 2)


def test_match_stems_and_case_folds():
    result = match_keyphrases(["Food Security"], ["food securities"])
    assert result.O == 1
    assert result.FP == result.FN == 0


def test_match_empty_extracted():
    result = match_keyphrases([], ["g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8"])
    assert (result.M, result.N, result.O, result.FP, result.FN) == (0, 8, 0, 0, 8)


def test_match_deduplicates():
    result = match_keyphrases(["rice", "Rice", "RICE"], ["rice", "rice"])
    assert (result.M, result.N, result.O) == (1, 1, 1)


def test_match_inverted_word_order():
    result = match_keyphrases(["security food"], ["food security"])
    assert result.O == 1


# ---------------------------------------------------------------------------
# P/R/F and agreement


def test_prf_half():
    p, r, f = precision_recall_f(MatchResult(8, 8, 4, 4, 4))
    assert (p, r, f) == (50.0, 50.0, 50.0)


def test_prf_identity():
    p, r, f = precision_recall_f(MatchResult(5, 5, 5, 0, 0))
    assert (p, r, f) == (100.0, 100.0, 100.0)


def test_prf_mixed():
    p, r, f = precision_recall_f(MatchResult(10, 5, 5, 5, 0))
    assert (p, r) == (50.0, 100.0)
    assert f == pytest.approx(200.0 / 3.0, abs=1e-12)


def test_prf_zero_denominators():
    assert precision_recall_f(MatchResult(0, 0, 0, 0, 0)) == (0.0, 0.0, 0.0)
    assert precision_recall_f(MatchResult(0, 4, 0, 0, 4)) == (0.0, 0.0, 0.0)


def test_agreement_identical_sets():
    assert agreement_scores(MatchResult(5, 5, 5, 0, 0)) == (1.0, 1.0, 1.0)


def test_agreement_half_overlap():
    h, r, c = agreement_scores(MatchResult(8, 8, 4, 4, 4))
    assert h == pytest.approx(4 / 12, abs=1e-15)
    assert r == 0.5
    assert c == 0.5


def test_agreement_unequal_sizes():
    h, r, c = agreement_scores(MatchResult(10, 6, 4, 6, 2))
    assert h == pytest.approx(4 / 12, abs=1e-15)
    assert r == 0.5
    assert c == pytest.approx(4 / math.sqrt(60), abs=1e-15)
    assert c > r


def test_agreement_zero_denominators():
    assert agreement_scores(MatchResult(0, 0, 0, 0, 0)) == (0.0, 0.0, 0.0)
    assert agreement_scores(MatchResult(3, 0, 0, 3, 0)) == (0.0, 0.0, 0.0)


def test_agreement_ordering_property():
    rng = random.Random(20240818)
    for _ in range(1000):
        m = rng.randint(0, 40)
        n = rng.randint(0, 40)
        o = rng.randint(0, min(m, n))
        h, r, c = agreement_scores(MatchResult(m, n, o, m - o, n - o))
        assert h <= r + 1e-15
        assert r <= c + 1e-15
        if o > 0 and m != n:
            assert c > r


def test_agreement_brute_force_set_oracle():
    rng = random.Random(20240819)
    universe = [f"kp{i:04d}" for i in range(60)]
    for _ in range(1000):
        extracted = rng.sample(universe, k=rng.randint(0, 25))
        gold = rng.sample(universe, k=rng.randint(0, 25))
        got = agreement_scores(match_keyphrases(extracted, gold))
        a, b = set(extracted), set(gold)
        o = len(a & b)
        want_h = o / len(a | b) if a | b else 0.0
        want_r = 2 * o / (len(a) + len(b)) if a or b else 0.0
        want_c = o / math.sqrt(len(a) * len(b)) if a and b else 0.0
        assert got == (want_h, want_r, want_c)


# ---------------------------------------------------------------------------
# Error rate


def test_error_rate_arithmetic():
    assert error_rate(MatchResult(5, 4, 2, 3, 2, instance_count=10)) == 0.5


def test_error_rate_perfect():
    assert error_rate(MatchResult(5, 5, 5, 0, 0, instance_count=40)) == 0.0


def test_error_rate_zero_instances():
    with pytest.raises(ValueError, match="instance count is zero"):
        error_rate(MatchResult(1, 1, 1, 0, 0, instance_count=0))


def test_count_test_instances_recount():
    docs = [
        document_from_text("a", "Rice grows fast. Rice feeds many."),
        document_from_text("b", "Soil erosion accelerates."),
    ]
    total = count_test_instances(docs, 1, 3)
    by_hand = sum(len(generate_candidates(d, 1, 3).candidates) for d in docs)
    assert total == by_hand
    assert total > 0


# ---------------------------------------------------------------------------
# Paired t-test


def test_t_identical_vectors():
    a = [0.1 * i for i in range(10)]
    res = paired_t_test(a, a)
    assert res.t == 0.0
    assert not res.significant_05
    assert not res.significant_02
    assert res.degenerate


def test_t_requires_ten_folds():
    with pytest.raises(ValueError, match="paired t-test requires exactly 10 folds"):
        paired_t_test([1.0] * 9, [1.0] * 9)
    with pytest.raises(ValueError, match="paired t-test requires exactly 10 folds"):
        paired_t_test([1.0] * 10, [1.0] * 11)


def test_t_antisymmetric():
    rng = random.Random(23)
    for _ in range(50):
        a = [rng.uniform(0, 1) for _ in range(10)]
        b = [rng.uniform(0, 1) for _ in range(10)]
        ab = paired_t_test(a, b)
        ba = paired_t_test(b, a)
        assert ab.t == pytest.approx(-ba.t, abs=1e-12)
        assert ab.significant_05 == ba.significant_05


def test_t_value_276_is_significant_at_both_levels():
    # alternating differences m +/- a give t = 3m/a exactly; m=0.92, a=1
    diffs = [0.92 + (1 if i % 2 == 0 else -1) for i in range(10)]
    res = paired_t_test(diffs, [0.0] * 10)
    assert res.t == pytest.approx(2.76, abs=1e-12)
    assert res.significant_05
    assert res.significant_02
    assert not res.degenerate


def test_t_constant_nonzero_difference_degenerate():
    res = paired_t_test([1.0] * 10, [0.0] * 10)
    assert res.t == math.inf
    assert res.significant_05 and res.significant_02
    assert res.degenerate
    res = paired_t_test([0.0] * 10, [1.0] * 10)
    assert res.t == -math.inf


def test_t_sign_convention():
    # first argument larger on average -> positive t
    a = [0.5 + 0.01 * ((-1) ** i) for i in range(10)]
    b = [x - 0.2 for x in a[::-1]]
    res = paired_t_test(a, b)
    assert res.t > 0


def test_t_matches_scipy():
    rng = random.Random(20240820)
    for _ in range(100):
        a = [rng.uniform(0, 1) for _ in range(10)]
        b = [a[i] + rng.gauss(0, 0.1) for i in range(10)]
        res = paired_t_test(a, b)
        if res.degenerate:
            continue
        want = scipy.stats.ttest_rel(a, b).statistic
        assert res.t == pytest.approx(want, abs=1e-9)


def test_critical_values():
    assert T_CRITICAL_05 == 2.262
    assert T_CRITICAL_02 == 2.398


# ---------------------------------------------------------------------------
# Folds


def docs_n(n):
    return [
        document_from_text(f"d{i:02d}", "Rice grows. Rice feeds.", gold_keyphrases=["rice"])
        for i in range(n)
    ]


def test_make_folds_singletons():
    folds = make_folds(docs_n(10), 10, seed=1)
    assert len(folds) == 10
    assert all(len(f) == 1 for f in folds)


def test_make_folds_partition_properties():
    for n in (10, 13, 23, 40):
        for seed in (0, 1, 7):
            docs = docs_n(n)
            folds = make_folds(docs, 10, seed=seed)
            sizes = [len(f) for f in folds]
            assert max(sizes) - min(sizes) <= 1
            assert sum(sizes) == n
            flat = [i for f in folds for i in f]
            assert sorted(flat) == sorted(d.id for d in docs)


def test_make_folds_seeded_determinism():
    docs = docs_n(20)
    assert make_folds(docs, 10, seed=5) == make_folds(docs, 10, seed=5)
    assert make_folds(docs, 10, seed=5) != make_folds(docs, 10, seed=6)


def test_make_folds_too_few_documents():
    with pytest.raises(ValueError, match="need at least 10 documents for 10 folds"):
        make_folds(docs_n(9), 10)


def test_make_folds_duplicate_ids():
    docs = docs_n(10) + [document_from_text("d00", "X.", gold_keyphrases=["x"])]
    with pytest.raises(ValueError, match="duplicate document id in corpus"):
        make_folds(docs, 10)


# ---------------------------------------------------------------------------
# Cross-validation


PHRASES = [
    "food security", "soil erosion", "water management", "crop rotation",
    "pest control", "grain storage",
]


def cv_corpus(n_docs=12, seed=1):
    # every document mentions its gold phrase in two separate sentences so
    # denoising at any threshold keeps at least one positive occurrence
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        phrase = PHRASES[i % len(PHRASES)]
        extra = PHRASES[(i + 1) % len(PHRASES)]
        text = (
            f"Comprehensive investigations of {phrase} dominated the agenda. "
            f"Unprecedented difficulties with {phrase} remained. "
            f"Also {extra} was discussed. "
            + rng.choice(["The rest was routine.", "Весна shortly followed.", "Nothing else happened."])
        )
        docs.append(document_from_text(f"cv{i:02d}", text, gold_keyphrases=[phrase]))
    return docs


def test_cv_single_pairing_structure():
    report = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=3)
    assert report.pairings == ("Full-Full",)
    assert len(report.fold_results) == 10
    assert all(fr.pairing == "Full-Full" for fr in report.fold_results)
    assert [fr.fold_index for fr in report.fold_results] == list(range(10))
    assert len(report.error_vectors["Full-Full"]) == 10
    assert set(report.means["Full-Full"]) == {
        "precision", "recall", "fscore", "hooper", "rolling", "cosine", "error_rate",
    }


def test_cv_benchmark_t_is_degenerate_zero():
    report = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=3)
    t = report.t_tests["Full-Full"]
    assert t.t == 0.0
    assert t.degenerate
    assert not t.significant_05


def test_cv_means_match_fold_results():
    report = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=3)
    folds = report.fold_results
    for name in ("precision", "fscore", "error_rate"):
        want = math.fsum(fr.measure(name) for fr in folds) / 10
        assert report.means["Full-Full"][name] == pytest.approx(want, abs=1e-12)


def test_cv_deterministic():
    a = cross_validate(cv_corpus(), pairings=DEFAULT_CV_PAIRINGS, k_extract=3, seed=9)
    b = cross_validate(cv_corpus(), pairings=DEFAULT_CV_PAIRINGS, k_extract=3, seed=9)
    assert a == b
    assert report_csv_lines(a) == report_csv_lines(b)
    assert json.dumps(report_summary(a), sort_keys=True) == json.dumps(
        report_summary(b), sort_keys=True
    )


def test_cv_seed_changes_folds():
    a = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=0)
    b = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=1)
    assert a != b


def test_cv_pairings_canonical_order():
    report = cross_validate(
        cv_corpus(), pairings=["Full-Noise", "Full-Full", "Denoised-Full"],
        k_extract=3, seed=3,
    )
    assert report.pairings == ("Full-Full", "Denoised-Full", "Full-Noise")


def test_cv_unknown_pairing():
    with pytest.raises(ValueError, match="unknown pairing: Sideways-Full"):
        cross_validate(cv_corpus(), pairings=["Sideways-Full"])


def test_cv_requires_gold():
    docs = cv_corpus()
    docs[3] = document_from_text(docs[3].id, docs[3].text)
    with pytest.raises(ValueError, match=f"document without gold list: {docs[3].id}"):
        cross_validate(docs, pairings=["Full-Full"])


def test_cv_error_rate_recount():
    # pooled (FP+FN)/instances over each fold, recounted from scratch
    docs = cv_corpus()
    report = cross_validate(docs, pairings=["Full-Full"], k_extract=3, seed=4)
    folds = make_folds(docs, 10, seed=4)
    by_id = {d.id: d for d in docs}
    for fr in report.fold_results:
        test_docs = [by_id[i] for i in sorted(folds[fr.fold_index])]
        instances = sum(
            len(generate_candidates(d, 1, 5, None, False).candidates) for d in test_docs
        )
        fp_fn = fr.error_rate * instances
        assert fp_fn == pytest.approx(round(fp_fn), abs=1e-9)


def test_cv_all_pairings_present():
    report = cross_validate(
        cv_corpus(), pairings=PAIRING_NAMES, threshold=0.5, k_extract=3, seed=2
    )
    assert report.pairings == PAIRING_NAMES
    assert {fr.pairing for fr in report.fold_results} == set(PAIRING_NAMES)
    for name in PAIRING_NAMES:
        assert len(report.error_vectors[name]) == 10
        assert name in report.t_tests


# ---------------------------------------------------------------------------
# Threshold sweep


def test_sweep_defaults():
    assert DEFAULT_SWEEP_THRESHOLDS == (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    assert DEFAULT_CV_PAIRINGS == PAIRING_NAMES[:4]


def test_sweep_single_threshold_reduces_to_cv():
    docs = cv_corpus()
    sweep = threshold_sweep(
        docs, thresholds=[0.7], pairings=["Full-Full", "Denoised-Full"],
        k_extract=3, seed=5,
    )
    direct = cross_validate(
        docs, threshold=0.7, pairings=["Full-Full", "Denoised-Full"],
        k_extract=3, seed=5,
    )
    assert sweep.thresholds == (0.7,)
    assert sweep.reports[0.7] == direct
    assert sweep.mean_error["Denoised-Full"][0.7] == direct.means["Denoised-Full"]["error_rate"]
    assert sweep.argmin_threshold["Denoised-Full"] == 0.7


def test_sweep_rejects_bad_thresholds():
    docs = cv_corpus()
    with pytest.raises(ValueError, match="invalid threshold"):
        threshold_sweep(docs, thresholds=[0.5, 0.0])
    with pytest.raises(ValueError, match="no thresholds given"):
        threshold_sweep(docs, thresholds=[])


def test_sweep_argmin_tie_takes_smallest():
    # single-sentence documents make every denoised variant identical to the
    # full text, so the error curves are flat and the tie-break is exposed
    docs = [
        document_from_text(
            f"s{i:02d}",
            f"Extensive studies of {PHRASES[i % len(PHRASES)]} continued without pause.",
            gold_keyphrases=[PHRASES[i % len(PHRASES)]],
        )
        for i in range(10)
    ]
    sweep = threshold_sweep(
        docs,
        thresholds=[0.4, 0.6, 0.8],
        pairings=["Full-Full", "Denoised-Denoised", "Denoised-Full", "Full-Denoised"],
        k_extract=2,
        seed=0,
    )
    for pairing in sweep.pairings:
        curve = sweep.mean_error[pairing]
        assert len(set(curve.values())) == 1
        assert sweep.argmin_threshold[pairing] == 0.4


def test_sweep_sorts_and_deduplicates_thresholds():
    docs = cv_corpus()
    sweep = threshold_sweep(
        docs, thresholds=[0.7, 0.3, 0.7], pairings=["Full-Full"], k_extract=2, seed=1
    )
    assert sweep.thresholds == (0.3, 0.7)


# ---------------------------------------------------------------------------
# Emission


def test_report_csv_shape():
    report = cross_validate(
        cv_corpus(), pairings=["Full-Full", "Denoised-Full"], k_extract=3, seed=7
    )
    lines = report_csv_lines(report)
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 20
    row = lines[1].split(",")
    assert len(row) == len(CSV_COLUMNS)
    assert row[1] == "Full-Full"
    # repr floats survive a round trip exactly
    fr = report.fold_results[0]
    assert float(row[3]) == fr.precision
    assert float(row[9]) == fr.error_rate


def test_sweep_csv_covers_all_thresholds():
    docs = cv_corpus()
    sweep = threshold_sweep(
        docs, thresholds=[0.4, 0.8], pairings=["Full-Full"], k_extract=2, seed=1
    )
    lines = sweep_csv_lines(sweep)
    assert len(lines) == 1 + 2 * 10
    assert {line.split(",")[0] for line in lines[1:]} == {"0.4", "0.8"}


def test_report_summary_structure():
    report = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=3)
    summary = report_summary(report)
    assert summary["threshold"] == 0.7
    assert summary["seed"] == 3
    assert summary["k_extract"] == 3
    block = summary["pairings"]["Full-Full"]
    assert len(block["error_rates"]) == 10
    assert block["t_value"] == 0.0
    assert block["degenerate_t"] is True
    json.dumps(summary)  # must be serializable as-is


def test_infinite_t_serializes_as_null():
    docs = cv_corpus()
    report = cross_validate(docs, pairings=["Full-Full", "Full-Denoised"], k_extract=3, seed=3)
    # force an unbounded t value through the public summary path
    forced = report.t_tests["Full-Denoised"]
    summary = report_summary(report)
    t_json = summary["pairings"]["Full-Denoised"]["t_value"]
    if math.isfinite(forced.t):
        assert t_json == forced.t
    else:
        assert t_json is None
    text = json.dumps(summary)
    assert "Infinity" not in text


def test_sweep_summary_structure():
    docs = cv_corpus()
    sweep = threshold_sweep(
        docs, thresholds=[0.5, 0.7], pairings=["Full-Full"], k_extract=2, seed=1
    )
    summary = sweep_summary(sweep)
    assert summary["thresholds"] == [0.5, 0.7]
    assert set(summary["mean_error"]["Full-Full"]) == {"0.5", "0.7"}
    assert summary["argmin_threshold"]["Full-Full"] in (0.5, 0.7)
    json.dumps(summary)


def test_write_lines_and_json_deterministic(tmp_path):
    report = cross_validate(cv_corpus(), pairings=["Full-Full"], k_extract=3, seed=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_lines(report_csv_lines(report), str(p1))
    write_lines(report_csv_lines(report), str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    j1, j2 = tmp_path / "a.json", tmp_path / "b.json"
    write_json(report_summary(report), str(j1))
    write_json(report_summary(report), str(j2))
    assert j1.read_bytes() == j2.read_bytes()
    assert j1.read_bytes().endswith(b"\n")

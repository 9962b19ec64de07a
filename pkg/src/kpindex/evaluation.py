"""Matching, agreement statistics, 10-fold protocol and threshold sweep."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .denoiser import denoise
from .candidates import generate_candidates
from .model import ModelConfig, TrainedModel, extract_top_k, train
from .textkit import Document, document_from_sentences, normalize_phrase_text
from .vocab import Vocabulary

PAIRING_NAMES = (
    "Full-Full",
    "Denoised-Denoised",
    "Denoised-Full",
    "Full-Denoised",
    "Full-Noise",
    "Denoised-Noise",
)

DEFAULT_CV_PAIRINGS = PAIRING_NAMES[:4]

DEFAULT_SWEEP_THRESHOLDS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# Two-sided df=9 critical value at alpha 0.05, one-sided at alpha 0.02.
T_CRITICAL_05 = 2.262
T_CRITICAL_02 = 2.398

CSV_COLUMNS = (
    "threshold",
    "pairing",
    "fold",
    "precision",
    "recall",
    "fscore",
    "hooper",
    "rolling",
    "cosine",
    "error_rate",
)

MEASURE_NAMES = ("precision", "recall", "fscore", "hooper", "rolling", "cosine", "error_rate")


@dataclass(frozen=True)
class MatchResult:
    M: int
    N: int
    O: int
    FP: int
    FN: int
    instance_count: int = 0


@dataclass(frozen=True)
class FoldResult:
    fold_index: int
    pairing: str
    precision: float
    recall: float
    fscore: float
    hooper: float
    rolling: float
    cosine: float
    error_rate: float

    def measure(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass(frozen=True)
class TTestResult:
    t: float
    significant_05: bool
    significant_02: bool
    degenerate: bool = False


@dataclass(frozen=True)
class EvaluationReport:
    threshold: float
    seed: int
    k_extract: int
    pairings: tuple[str, ...]
    fold_results: tuple[FoldResult, ...]
    means: dict[str, dict[str, float]]
    error_vectors: dict[str, tuple[float, ...]]
    t_tests: dict[str, TTestResult]


@dataclass(frozen=True)
class SweepResult:
    thresholds: tuple[float, ...]
    pairings: tuple[str, ...]
    reports: dict[float, EvaluationReport]
    mean_error: dict[str, dict[float, float]]
    argmin_threshold: dict[str, float]


# ---------------------------------------------------------------------------
# Matching and the section-level measures


def match_keyphrases(
    extracted: Sequence[str], gold: Sequence[str], instance_count: int = 0
) -> MatchResult:
    """Set overlap of the two keyphrase lists after normalization.

    Both sides are case-folded, stemmed, token-sorted and deduplicated, so
    "Food Security" and "food securities" count as the same phrase.
    """
    ext = {normalize_phrase_text(p) for p in extracted if p.strip()}
    gld = {normalize_phrase_text(p) for p in gold if p.strip()}
    overlap = len(ext & gld)
    return MatchResult(
        M=len(ext),
        N=len(gld),
        O=overlap,
        FP=len(ext) - overlap,
        FN=len(gld) - overlap,
        instance_count=instance_count,
    )


def precision_recall_f(match: MatchResult) -> tuple[float, float, float]:
    p = 100.0 * match.O / match.M if match.M else 0.0
    r = 100.0 * match.O / match.N if match.N else 0.0
    f = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def agreement_scores(match: MatchResult) -> tuple[float, float, float]:
    """Hooper, Rolling and Cosine agreement; 0 whenever a denominator is 0."""
    m, n, o = match.M, match.N, match.O
    hooper = o / (m + n - o) if m + n - o > 0 else 0.0
    rolling = 2.0 * o / (m + n) if m + n > 0 else 0.0
    cosine = o / math.sqrt(m * n) if m > 0 and n > 0 else 0.0
    return hooper, rolling, cosine


def error_rate(match: MatchResult) -> float:
    if match.instance_count == 0:
        raise ValueError("instance count is zero")
    return (match.FP + match.FN) / match.instance_count


def paired_t_test(errors_a: Sequence[float], errors_b: Sequence[float]) -> TTestResult:
    """Fold-paired t statistic for two length-10 error vectors.

    A zero-variance difference vector cannot be tested; it is reported as
    degenerate, with t = 0 when the vectors are identical and an unbounded
    significant t otherwise.
    """
    if len(errors_a) != 10 or len(errors_b) != 10:
        raise ValueError("paired t-test requires exactly 10 folds")
    diffs = [a - b for a, b in zip(errors_a, errors_b)]
    mean = math.fsum(diffs) / 10.0
    variance = math.fsum((d - mean) ** 2 for d in diffs) / 9.0
    sd = math.sqrt(variance)
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, significant_05=False, significant_02=False, degenerate=True)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, significant_05=True, significant_02=True, degenerate=True)
    t = mean / (sd / math.sqrt(10.0))
    return TTestResult(
        t=t,
        significant_05=abs(t) > T_CRITICAL_05,
        significant_02=abs(t) > T_CRITICAL_02,
        degenerate=False,
    )


# ---------------------------------------------------------------------------
# Folds and the cross-validation protocol


def make_folds(corpus: Sequence[Document], k: int = 10, seed: int = 0) -> list[tuple[str, ...]]:
    ids = sorted(doc.id for doc in corpus)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document id in corpus")
    if len(ids) < k:
        raise ValueError(f"need at least {k} documents for {k} folds")
    rng = random.Random(seed)
    rng.shuffle(ids)
    base, extra = divmod(len(ids), k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(tuple(ids[start : start + size]))
        start += size
    return folds


def count_test_instances(
    test_docs: Sequence[Document],
    min_len: int = 1,
    max_len: int = 5,
    vocabulary: Vocabulary | None = None,
    matched_only: bool | None = None,
) -> int:
    """Error-rate denominator: candidate classification instances in the docs.

    Kept as a single function so the instance-universe definition can be
    swapped without touching the protocol code.
    """
    return sum(
        len(generate_candidates(doc, min_len, max_len, vocabulary, matched_only).candidates)
        for doc in test_docs
    )


def _variant_document(document: Document, variant: str, threshold: float) -> Document:
    if variant == "Full":
        return document
    partition = denoise(document, threshold)
    kept = partition.denoised if variant == "Denoised" else partition.noise
    return document_from_sentences(document.id, document, kept)


def _ordered_pairings(pairings: Sequence[str]) -> tuple[str, ...]:
    requested = list(pairings)
    for name in requested:
        if name not in PAIRING_NAMES:
            raise ValueError(f"unknown pairing: {name}")
    return tuple(name for name in PAIRING_NAMES if name in set(requested))


def cross_validate(
    corpus: Sequence[Document],
    vocabulary: Vocabulary | None = None,
    threshold: float = 0.7,
    k_extract: int = 10,
    pairings: Sequence[str] = DEFAULT_CV_PAIRINGS,
    seed: int = 0,
    min_len: int = 1,
    max_len: int = 5,
    matched_only: bool | None = None,
) -> EvaluationReport:
    """Run the 10-fold protocol over the requested train/test pairings.

    Every fold trains a full-text model and, when needed, a model on the
    sentences kept by denoising at `threshold`; each requested pairing is
    then evaluated on the held-out fold's full, denoised or noise variant.
    The Full-Full benchmark errors are always computed so each pairing gets
    a paired t value against them (positive t = error below the benchmark).
    """
    for doc in corpus:
        if doc.gold_keyphrases is None:
            raise ValueError(f"document without gold list: {doc.id}")
    requested = _ordered_pairings(pairings)
    if not requested:
        raise ValueError("no pairings requested")
    by_id = {doc.id: doc for doc in corpus}
    folds = make_folds(corpus, 10, seed)
    needed = set(requested) | {"Full-Full"}
    model_variants = {name.split("-")[0] for name in needed}
    test_variants = {name.split("-")[1] for name in needed}

    per_pairing: dict[str, list[FoldResult]] = {name: [] for name in requested}
    benchmark_errors: list[float] = []
    for fold_index, test_ids in enumerate(folds):
        held_out = set(test_ids)
        train_docs = [by_id[i] for i in sorted(by_id) if i not in held_out]
        test_docs = [by_id[i] for i in sorted(test_ids)]
        try:
            models: dict[str, TrainedModel] = {}
            if "Full" in model_variants:
                models["Full"] = train(
                    train_docs,
                    vocabulary,
                    ModelConfig(min_len, max_len, matched_only, "full", None),
                )
            if "Denoised" in model_variants:
                denoised_train = [_variant_document(d, "Denoised", threshold) for d in train_docs]
                models["Denoised"] = train(
                    denoised_train,
                    vocabulary,
                    ModelConfig(min_len, max_len, matched_only, "denoised", threshold),
                )
            variant_docs = {
                name: [_variant_document(d, name, threshold) for d in test_docs]
                for name in test_variants
            }
            for pairing in sorted(needed, key=PAIRING_NAMES.index):
                model_name, test_name = pairing.split("-")
                model = models[model_name]
                docs = variant_docs[test_name]
                m = n = o = fp = fn = 0
                for doc in docs:
                    extracted = [
                        r.surface_form for r in extract_top_k(model, doc, k_extract, vocabulary)
                    ]
                    result = match_keyphrases(extracted, doc.gold_keyphrases or ())
                    m += result.M
                    n += result.N
                    o += result.O
                    fp += result.FP
                    fn += result.FN
                instances = count_test_instances(
                    docs, min_len, max_len, vocabulary,
                    models[model_name].config.matched_only,
                )
                total = MatchResult(m, n, o, fp, fn, instances)
                p, r, f = precision_recall_f(total)
                hooper, rolling, cosine = agreement_scores(total)
                fold_result = FoldResult(
                    fold_index=fold_index,
                    pairing=pairing,
                    precision=p,
                    recall=r,
                    fscore=f,
                    hooper=hooper,
                    rolling=rolling,
                    cosine=cosine,
                    error_rate=error_rate(total),
                )
                if pairing == "Full-Full":
                    benchmark_errors.append(fold_result.error_rate)
                if pairing in per_pairing:
                    per_pairing[pairing].append(fold_result)
        except ValueError as exc:
            raise ValueError(f"fold {fold_index}: {exc}") from exc

    means: dict[str, dict[str, float]] = {}
    error_vectors: dict[str, tuple[float, ...]] = {}
    t_tests: dict[str, TTestResult] = {}
    ordered_results: list[FoldResult] = []
    for pairing in requested:
        results = per_pairing[pairing]
        ordered_results.extend(results)
        means[pairing] = {
            name: math.fsum(fr.measure(name) for fr in results) / len(results)
            for name in MEASURE_NAMES
        }
        vector = tuple(fr.error_rate for fr in results)
        error_vectors[pairing] = vector
        t_tests[pairing] = paired_t_test(benchmark_errors, vector)
    return EvaluationReport(
        threshold=threshold,
        seed=seed,
        k_extract=k_extract,
        pairings=requested,
        fold_results=tuple(ordered_results),
        means=means,
        error_vectors=error_vectors,
        t_tests=t_tests,
    )


def threshold_sweep(
    corpus: Sequence[Document],
    vocabulary: Vocabulary | None = None,
    thresholds: Sequence[float] = DEFAULT_SWEEP_THRESHOLDS,
    k_extract: int = 10,
    seed: int = 0,
    pairings: Sequence[str] = PAIRING_NAMES,
    min_len: int = 1,
    max_len: int = 5,
    matched_only: bool | None = None,
) -> SweepResult:
    """Cross-validate at each threshold and locate the error-rate minima.

    Argmin ties resolve to the smallest threshold.
    """
    if not thresholds:
        raise ValueError("no thresholds given")
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ValueError("invalid threshold")
    ordered_thresholds = tuple(sorted(set(thresholds)))
    requested = _ordered_pairings(pairings)
    reports: dict[float, EvaluationReport] = {}
    for t in ordered_thresholds:
        reports[t] = cross_validate(
            corpus, vocabulary, t, k_extract, requested, seed, min_len, max_len, matched_only
        )
    mean_error: dict[str, dict[float, float]] = {}
    argmin: dict[str, float] = {}
    for pairing in requested:
        curve = {t: reports[t].means[pairing]["error_rate"] for t in ordered_thresholds}
        mean_error[pairing] = curve
        best = ordered_thresholds[0]
        for t in ordered_thresholds[1:]:
            if curve[t] < curve[best]:
                best = t
        argmin[pairing] = best
    return SweepResult(
        thresholds=ordered_thresholds,
        pairings=requested,
        reports=reports,
        mean_error=mean_error,
        argmin_threshold=argmin,
    )


# ---------------------------------------------------------------------------
# Report emission


def _csv_row(threshold: float, fr: FoldResult) -> str:
    cells = [
        repr(threshold),
        fr.pairing,
        str(fr.fold_index),
        repr(fr.precision),
        repr(fr.recall),
        repr(fr.fscore),
        repr(fr.hooper),
        repr(fr.rolling),
        repr(fr.cosine),
        repr(fr.error_rate),
    ]
    return ",".join(cells)


def report_csv_lines(report: EvaluationReport) -> list[str]:
    lines = [",".join(CSV_COLUMNS)]
    for fr in report.fold_results:
        lines.append(_csv_row(report.threshold, fr))
    return lines


def sweep_csv_lines(sweep: SweepResult) -> list[str]:
    lines = [",".join(CSV_COLUMNS)]
    for t in sweep.thresholds:
        for fr in sweep.reports[t].fold_results:
            lines.append(_csv_row(t, fr))
    return lines


def _t_value_json(result: TTestResult) -> float | None:
    return result.t if math.isfinite(result.t) else None


def report_summary(report: EvaluationReport) -> dict:
    pairing_block = {}
    for pairing in report.pairings:
        t_res = report.t_tests[pairing]
        block = dict(report.means[pairing])
        block["error_rates"] = list(report.error_vectors[pairing])
        block["t_value"] = _t_value_json(t_res)
        block["significant_05"] = t_res.significant_05
        block["significant_02"] = t_res.significant_02
        block["degenerate_t"] = t_res.degenerate
        pairing_block[pairing] = block
    return {
        "threshold": report.threshold,
        "seed": report.seed,
        "k_extract": report.k_extract,
        "pairings": pairing_block,
    }


def sweep_summary(sweep: SweepResult) -> dict:
    curves = {
        pairing: {repr(t): sweep.mean_error[pairing][t] for t in sweep.thresholds}
        for pairing in sweep.pairings
    }
    return {
        "thresholds": list(sweep.thresholds),
        "argmin_threshold": dict(sweep.argmin_threshold),
        "mean_error": curves,
    }


def write_lines(lines: Sequence[str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(payload: Mapping, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")

"""Discretized Naive Bayes training, candidate ranking and persistence."""
from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .candidates import generate_candidates, merge_document_frequencies
from .features import (
    FEATURE_NAMES,
    KeyphrasenessTable,
    build_keyphraseness_table,
    compute_features,
    normalized_gold_set,
)
from .textkit import Document
from .vocab import Vocabulary

MODEL_MAGIC = "KPINDEXMODEL"
MODEL_VERSION = 1

_FALLBACK_BINS = 10


@dataclass(frozen=True)
class ModelConfig:
    """Preprocessing snapshot stored with a model so extraction can replay it."""

    min_len: int = 1
    max_len: int = 5
    matched_only: bool | None = None
    text_variant: str = "full"
    denoise_threshold: float | None = None


@dataclass(frozen=True)
class DiscretizationTable:
    cuts: tuple[tuple[float, ...], ...]

    def bin_of(self, feature_index: int, value: float) -> int:
        return bisect_right(self.cuts[feature_index], value)

    def bin_count(self, feature_index: int) -> int:
        return len(self.cuts[feature_index]) + 1


@dataclass(frozen=True)
class RankedKeyphrase:
    surface_form: str
    normalized_form: str
    score: float


@dataclass(frozen=True)
class TrainedModel:
    feature_names: tuple[str, ...]
    discretization: DiscretizationTable
    n_pos: int
    n_neg: int
    pos_counts: tuple[tuple[int, ...], ...]
    neg_counts: tuple[tuple[int, ...], ...]
    df_table: dict[str, int]
    corpus_doc_count: int
    keyphraseness_table: KeyphrasenessTable
    config: ModelConfig
    vocab_fingerprint: str | None

    @property
    def class_priors(self) -> tuple[float, float]:
        total = self.n_pos + self.n_neg
        return self.n_pos / total, self.n_neg / total

    def conditional(self, feature_index: int, positive: bool, bin_index: int) -> float:
        """Laplace-smoothed P(bin | class)."""
        counts = self.pos_counts if positive else self.neg_counts
        n_class = self.n_pos if positive else self.n_neg
        bins = self.discretization.bin_count(feature_index)
        return (counts[feature_index][bin_index] + 1) / (n_class + bins)


# ---------------------------------------------------------------------------
# Supervised discretization


def _entropy(pos: int, neg: int) -> float:
    total = pos + neg
    if total == 0:
        return 0.0
    ent = 0.0
    for c in (pos, neg):
        if c:
            p = c / total
            ent -= p * math.log2(p)
    return ent


def _class_count(pos: int, neg: int) -> int:
    return (pos > 0) + (neg > 0)


def _mdl_recurse(groups: list[tuple[float, int, int]], lo: int, hi: int, cuts: list[float]) -> None:
    n_pos = sum(g[1] for g in groups[lo:hi])
    n_neg = sum(g[2] for g in groups[lo:hi])
    total = n_pos + n_neg
    if hi - lo < 2 or total < 2:
        return
    ent_s = _entropy(n_pos, n_neg)
    if ent_s == 0.0:
        return
    best = None
    left_pos = left_neg = 0
    for i in range(lo + 1, hi):
        left_pos += groups[i - 1][1]
        left_neg += groups[i - 1][2]
        n_left = left_pos + left_neg
        n_right = total - n_left
        weighted = (
            n_left * _entropy(left_pos, left_neg)
            + n_right * _entropy(n_pos - left_pos, n_neg - left_neg)
        ) / total
        if best is None or weighted < best[0]:
            best = (weighted, i, left_pos, left_neg)
    if best is None:
        return
    weighted, i, left_pos, left_neg = best
    right_pos = n_pos - left_pos
    right_neg = n_neg - left_neg
    gain = ent_s - weighted
    ent_left = _entropy(left_pos, left_neg)
    ent_right = _entropy(right_pos, right_neg)
    k = _class_count(n_pos, n_neg)
    k_left = _class_count(left_pos, left_neg)
    k_right = _class_count(right_pos, right_neg)
    delta = math.log2(3**k - 2) - (k * ent_s - k_left * ent_left - k_right * ent_right)
    if gain <= (math.log2(total - 1) + delta) / total:
        return
    cuts.append((groups[i - 1][0] + groups[i][0]) / 2)
    _mdl_recurse(groups, lo, i, cuts)
    _mdl_recurse(groups, i, hi, cuts)


def mdl_cut_points(values: Sequence[float], labels: Sequence[bool]) -> list[float]:
    """Entropy-minimizing cut points accepted by the MDL stopping criterion."""
    groups: list[tuple[float, int, int]] = []
    for value, label in sorted(zip(values, labels)):
        if groups and groups[-1][0] == value:
            v, p, n = groups[-1]
            groups[-1] = (v, p + int(label), n + int(not label))
        else:
            groups.append((value, int(label), int(not label)))
    cuts: list[float] = []
    _mdl_recurse(groups, 0, len(groups), cuts)
    return sorted(cuts)


def equal_frequency_cuts(values: Sequence[float], bins: int = _FALLBACK_BINS) -> list[float]:
    ordered = sorted(values)
    n = len(ordered)
    cuts = set()
    for j in range(1, bins):
        idx = (j * n) // bins
        if 0 < idx < n and ordered[idx - 1] < ordered[idx]:
            cuts.add((ordered[idx - 1] + ordered[idx]) / 2)
    return sorted(cuts)


# ---------------------------------------------------------------------------
# Training


def _effective_matched_only(config: ModelConfig, vocabulary: Vocabulary | None) -> bool:
    if config.matched_only is None:
        return vocabulary is not None
    return bool(config.matched_only)


def _document_instances(document, cset, df_table, corpus_doc_count, vocabulary, ktable):
    gold = normalized_gold_set(document)
    term_ids = sorted({c.term_id for c in cset.candidates.values() if c.term_id is not None})
    vectors = []
    labels = []
    for key in sorted(cset.candidates):
        cand = cset.candidates[key]
        fv = compute_features(
            cand, cset.doc_word_count, df_table, corpus_doc_count,
            vocabulary, ktable, term_ids,
        )
        vectors.append(fv.as_tuple())
        labels.append(" ".join(sorted(key.split())) in gold)
    return vectors, labels


def train(
    training_docs: Sequence[Document],
    vocabulary: Vocabulary | None = None,
    config: ModelConfig = ModelConfig(),
) -> TrainedModel:
    """Fit the discretized Naive Bayes model on gold-labeled candidates.

    A candidate is positive iff its order-insensitive normalized form matches
    a normalized gold keyphrase of its own document. The result does not
    depend on the order of `training_docs`.
    """
    if len(training_docs) < 2:
        raise ValueError("need at least 2 training documents")
    docs = sorted(training_docs, key=lambda d: d.id)
    matched_only = _effective_matched_only(config, vocabulary)
    csets = [
        generate_candidates(d, config.min_len, config.max_len, vocabulary, matched_only)
        for d in docs
    ]
    df_table = merge_document_frequencies(csets)
    ktable = build_keyphraseness_table(docs)
    corpus_doc_count = len(docs)

    vectors: list[tuple[float, ...]] = []
    labels: list[bool] = []
    for doc, cset in zip(docs, csets):
        doc_vectors, doc_labels = _document_instances(
            doc, cset, df_table, corpus_doc_count, vocabulary, ktable
        )
        vectors.extend(doc_vectors)
        labels.extend(doc_labels)
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    if n_pos == 0:
        raise ValueError("degenerate training set")

    cut_lists = []
    for fi in range(len(FEATURE_NAMES)):
        column = [vec[fi] for vec in vectors]
        cuts = mdl_cut_points(column, labels)
        if not cuts:
            cuts = equal_frequency_cuts(column)
        cut_lists.append(tuple(cuts))
    table = DiscretizationTable(cuts=tuple(cut_lists))

    pos_counts = [[0] * table.bin_count(fi) for fi in range(len(FEATURE_NAMES))]
    neg_counts = [[0] * table.bin_count(fi) for fi in range(len(FEATURE_NAMES))]
    for vec, label in zip(vectors, labels):
        target = pos_counts if label else neg_counts
        for fi, value in enumerate(vec):
            target[fi][table.bin_of(fi, value)] += 1

    resolved = ModelConfig(
        min_len=config.min_len,
        max_len=config.max_len,
        matched_only=matched_only,
        text_variant=config.text_variant,
        denoise_threshold=config.denoise_threshold,
    )
    return TrainedModel(
        feature_names=tuple(FEATURE_NAMES),
        discretization=table,
        n_pos=n_pos,
        n_neg=n_neg,
        pos_counts=tuple(tuple(row) for row in pos_counts),
        neg_counts=tuple(tuple(row) for row in neg_counts),
        df_table=df_table,
        corpus_doc_count=corpus_doc_count,
        keyphraseness_table=ktable,
        config=resolved,
        vocab_fingerprint=vocabulary.fingerprint if vocabulary is not None else None,
    )


# ---------------------------------------------------------------------------
# Ranking and extraction


def _log_class_score(model: TrainedModel, vec: tuple[float, ...], positive: bool) -> float:
    n_class = model.n_pos if positive else model.n_neg
    if n_class == 0:
        return -math.inf
    score = math.log(n_class / (model.n_pos + model.n_neg))
    for fi, value in enumerate(vec):
        score += math.log(
            model.conditional(fi, positive, model.discretization.bin_of(fi, value))
        )
    return score


def _posterior(log_pos: float, log_neg: float) -> float:
    top = max(log_pos, log_neg)
    p = math.exp(log_pos - top)
    q = math.exp(log_neg - top)
    return p / (p + q)


def rank_candidates(
    model: TrainedModel, document: Document, vocabulary: Vocabulary | None = None
) -> list[RankedKeyphrase]:
    """Score every candidate and sort by key-class posterior, descending.

    Ties are broken alphabetically by normalized form so output order is
    fully deterministic.
    """
    supplied = vocabulary.fingerprint if vocabulary is not None else None
    if supplied != model.vocab_fingerprint:
        raise ValueError("model/vocabulary mismatch")
    cset = generate_candidates(
        document, model.config.min_len, model.config.max_len,
        vocabulary, model.config.matched_only,
    )
    term_ids = sorted({c.term_id for c in cset.candidates.values() if c.term_id is not None})
    ranked = []
    for key in sorted(cset.candidates):
        cand = cset.candidates[key]
        fv = compute_features(
            cand, cset.doc_word_count, model.df_table, model.corpus_doc_count,
            vocabulary, model.keyphraseness_table, term_ids,
        )
        vec = fv.as_tuple()
        posterior = _posterior(
            _log_class_score(model, vec, True), _log_class_score(model, vec, False)
        )
        ranked.append(RankedKeyphrase(cand.surface_form, key, posterior))
    ranked.sort(key=lambda r: (-r.score, r.normalized_form))
    return ranked


def extract_top_k(
    model: TrainedModel, document: Document, k: int, vocabulary: Vocabulary | None = None
) -> list[RankedKeyphrase]:
    if k < 1:
        raise ValueError("invalid k")
    return rank_candidates(model, document, vocabulary)[:k]


# ---------------------------------------------------------------------------
# Persistence


def _payload(model: TrainedModel) -> dict:
    return {
        "feature_names": list(model.feature_names),
        "cuts": [list(c) for c in model.discretization.cuts],
        "n_pos": model.n_pos,
        "n_neg": model.n_neg,
        "pos_counts": [list(row) for row in model.pos_counts],
        "neg_counts": [list(row) for row in model.neg_counts],
        "df_table": model.df_table,
        "corpus_doc_count": model.corpus_doc_count,
        "keyphraseness_counts": model.keyphraseness_table.counts,
        "training_doc_count": model.keyphraseness_table.training_doc_count,
        "config": {
            "min_len": model.config.min_len,
            "max_len": model.config.max_len,
            "matched_only": model.config.matched_only,
            "text_variant": model.config.text_variant,
            "denoise_threshold": model.config.denoise_threshold,
        },
        "vocab_fingerprint": model.vocab_fingerprint,
    }


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MODEL_MAGIC} {MODEL_VERSION}\n")
        json.dump(_payload(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != MODEL_MAGIC:
            raise ValueError("not a model file")
        if header[1] != str(MODEL_VERSION):
            raise ValueError(f"unsupported model version: {header[1]}")
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"corrupted model file: {exc}") from exc
    try:
        config = ModelConfig(
            min_len=payload["config"]["min_len"],
            max_len=payload["config"]["max_len"],
            matched_only=payload["config"]["matched_only"],
            text_variant=payload["config"]["text_variant"],
            denoise_threshold=payload["config"]["denoise_threshold"],
        )
        model = TrainedModel(
            feature_names=tuple(payload["feature_names"]),
            discretization=DiscretizationTable(
                cuts=tuple(tuple(float(v) for v in c) for c in payload["cuts"])
            ),
            n_pos=payload["n_pos"],
            n_neg=payload["n_neg"],
            pos_counts=tuple(tuple(row) for row in payload["pos_counts"]),
            neg_counts=tuple(tuple(row) for row in payload["neg_counts"]),
            df_table=dict(payload["df_table"]),
            corpus_doc_count=payload["corpus_doc_count"],
            keyphraseness_table=KeyphrasenessTable(
                counts=dict(payload["keyphraseness_counts"]),
                training_doc_count=payload["training_doc_count"],
            ),
            config=config,
            vocab_fingerprint=payload["vocab_fingerprint"],
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"corrupted model file: {exc}") from exc
    if tuple(model.feature_names) != tuple(FEATURE_NAMES):
        raise ValueError("corrupted model file: unexpected feature set")
    return model

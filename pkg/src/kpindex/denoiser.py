"""Fog-Index sentence scoring and the denoised/noise document split."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .textkit import Document, Sentence, is_complex_word


@dataclass(frozen=True)
class ScoredSentence:
    sentence: Sentence
    fog: float


@dataclass(frozen=True)
class DenoisePartition:
    threshold: float
    denoised: tuple[Sentence, ...]
    noise: tuple[Sentence, ...]


@dataclass(frozen=True)
class CorpusDenoiseSummary:
    document_count: int
    total_words: int
    denoised_words: int
    noise_words: int


def fog_score(sentence: Sentence) -> float:
    """Per-sentence Fog Index: 0.4 * (W + 100 * C / W).

    W is the sentence's token count and C the number of complex words in it.
    For a single sentence the passage-level average sentence length reduces
    to W itself.
    """
    w = len(sentence.tokens)
    if w == 0:
        raise ValueError("empty sentence")
    c = sum(1 for t in sentence.tokens if is_complex_word(t.surface))
    return 0.4 * (w + 100.0 * c / w)


def _selection_count(threshold: float, total: int) -> int:
    # The epsilon guards against float products like 0.1 * 80 landing a hair
    # above the integer they mathematically equal, which would inflate ceil.
    return max(1, math.ceil(threshold * total - 1e-9))


def score_sentences(document: Document) -> list[ScoredSentence]:
    return [ScoredSentence(s, fog_score(s)) for s in document.sentences]


def denoise(document: Document, threshold: float) -> DenoisePartition:
    """Split a document's sentences into denoised and noise parts.

    Sentences are ranked by fog score descending (highest score = lowest
    readability) with ties resolved toward earlier sentences; the top
    ceil(threshold * S) make up the denoised part. Both parts keep original
    document order.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("invalid threshold")
    if not document.sentences:
        raise ValueError("empty document")
    scored = score_sentences(document)
    ranked = sorted(scored, key=lambda ss: (-ss.fog, ss.sentence.doc_order))
    keep = _selection_count(threshold, len(scored))
    selected = {ss.sentence.doc_order for ss in ranked[:keep]}
    denoised = tuple(s for s in document.sentences if s.doc_order in selected)
    noise = tuple(s for s in document.sentences if s.doc_order not in selected)
    return DenoisePartition(threshold=threshold, denoised=denoised, noise=noise)


def denoise_corpus(
    corpus: Sequence[Document], threshold: float
) -> tuple[dict[str, DenoisePartition], CorpusDenoiseSummary]:
    partitions: dict[str, DenoisePartition] = {}
    total = denoised_words = noise_words = 0
    for doc in corpus:
        try:
            part = denoise(doc, threshold)
        except ValueError as exc:
            raise ValueError(f"{doc.id}: {exc}") from exc
        partitions[doc.id] = part
        total += doc.word_count
        denoised_words += sum(len(s.tokens) for s in part.denoised)
        noise_words += sum(len(s.tokens) for s in part.noise)
    summary = CorpusDenoiseSummary(
        document_count=len(partitions),
        total_words=total,
        denoised_words=denoised_words,
        noise_words=noise_words,
    )
    return partitions, summary

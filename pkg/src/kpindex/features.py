"""Per-candidate feature vectors for training and ranking."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .candidates import CandidatePhrase
from .textkit import Document, normalize_phrase_text
from .vocab import Vocabulary, generality, node_degree

FEATURE_NAMES = (
    "tf",
    "idf",
    "tfidf",
    "first_occurrence",
    "last_occurrence",
    "spread",
    "length_words",
    "node_degree",
    "generality",
    "keyphraseness",
)


@dataclass(frozen=True)
class FeatureVector:
    tf: float
    idf: float
    tfidf: float
    first_occurrence: float
    last_occurrence: float
    spread: float
    length_words: int
    node_degree: int
    generality: float
    keyphraseness: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in FEATURE_NAMES)


@dataclass(frozen=True)
class KeyphrasenessTable:
    """docs_where_gold counts per normalized phrase, over the training set."""

    counts: dict[str, int]
    training_doc_count: int

    def fraction(self, sorted_key: str) -> float:
        if self.training_doc_count <= 0:
            return 0.0
        return self.counts.get(sorted_key, 0) / self.training_doc_count


def normalized_gold_set(document: Document) -> set[str]:
    if document.gold_keyphrases is None:
        raise ValueError(f"document without gold list: {document.id}")
    return {normalize_phrase_text(g) for g in document.gold_keyphrases if g.strip()}


def build_keyphraseness_table(training_docs: Sequence[Document]) -> KeyphrasenessTable:
    counts: dict[str, int] = {}
    for doc in training_docs:
        for key in normalized_gold_set(doc):
            counts[key] = counts.get(key, 0) + 1
    return KeyphrasenessTable(counts=counts, training_doc_count=len(training_docs))


def compute_features(
    candidate: CandidatePhrase,
    doc_word_count: int,
    df_table: Mapping[str, int],
    corpus_doc_count: int,
    vocabulary: Vocabulary | None = None,
    keyphraseness_table: KeyphrasenessTable | None = None,
    doc_term_ids: Iterable[str] = (),
) -> FeatureVector:
    """Assemble the ten-feature vector for one candidate.

    `doc_term_ids` holds the vocabulary term ids of every candidate in the
    same document; node degree counts this candidate's links into that set.
    """
    if doc_word_count == 0:
        raise ValueError("empty document")
    tf = candidate.freq / doc_word_count
    df = df_table.get(candidate.normalized_form, 0)
    idf = max(0.0, math.log2(corpus_doc_count / (df + 1)))
    first = candidate.first_pos / doc_word_count
    last = candidate.last_pos / doc_word_count
    if vocabulary is not None and candidate.term_id is not None:
        degree = node_degree(vocabulary, candidate.term_id, doc_term_ids)
        general = generality(vocabulary, candidate.term_id)
    else:
        degree = 0
        general = 0.0
    if keyphraseness_table is not None:
        sorted_key = " ".join(sorted(candidate.normalized_form.split()))
        keyness = keyphraseness_table.fraction(sorted_key)
    else:
        keyness = 0.0
    return FeatureVector(
        tf=tf,
        idf=idf,
        tfidf=tf * idf,
        first_occurrence=first,
        last_occurrence=last,
        spread=last - first,
        length_words=candidate.length_words,
        node_degree=degree,
        generality=general,
        keyphraseness=keyness,
    )

"""Candidate keyphrase generation with per-document occurrence statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .textkit import Document, Token
from .vocab import Vocabulary, match_phrase

_NUMERIC_CHARS = frozenset("0123456789.,")


@dataclass(frozen=True)
class CandidatePhrase:
    normalized_form: str
    surface_form: str
    length_words: int
    term_id: str | None
    freq: int
    first_pos: int
    last_pos: int


@dataclass(frozen=True)
class CandidateSet:
    document_id: str
    candidates: dict[str, CandidatePhrase]
    doc_word_count: int


def _is_numeric_token(token: Token) -> bool:
    return bool(token.surface) and set(token.surface) <= _NUMERIC_CHARS


class _Accumulator:
    __slots__ = ("window", "freq", "first_pos", "last_pos", "surface_counts")

    def __init__(self, window: Sequence[Token]):
        self.window = tuple(window)
        self.freq = 0
        self.first_pos = window[0].position
        self.last_pos = window[0].position
        self.surface_counts: dict[str, tuple[int, int]] = {}

    def add(self, window: Sequence[Token]) -> None:
        pos = window[0].position
        self.freq += 1
        self.first_pos = min(self.first_pos, pos)
        self.last_pos = max(self.last_pos, pos)
        surface = " ".join(t.surface for t in window)
        count, first_seen = self.surface_counts.get(surface, (0, pos))
        self.surface_counts[surface] = (count + 1, first_seen)

    def best_surface(self) -> str:
        # Most frequent raw form wins; ties go to the earliest occurrence.
        return min(self.surface_counts.items(), key=lambda kv: (-kv[1][0], kv[1][1], kv[0]))[0]


def generate_candidates(
    document: Document,
    min_len: int = 1,
    max_len: int = 5,
    vocabulary: Vocabulary | None = None,
    matched_only: bool | None = None,
) -> CandidateSet:
    """Collect within-sentence n-grams of min_len..max_len words.

    Boundary stopwords and all-numeric phrases are excluded; interior
    stopwords are allowed. When a vocabulary is supplied, candidates are
    restricted to vocabulary matches unless `matched_only` is set False.
    """
    if not 1 <= min_len <= max_len:
        raise ValueError("invalid phrase length bounds")
    if matched_only is None:
        matched_only = vocabulary is not None
    found: dict[str, _Accumulator] = {}
    for sentence in document.sentences:
        tokens = sentence.tokens
        for start in range(len(tokens)):
            if tokens[start].is_stopword:
                continue
            for length in range(min_len, max_len + 1):
                end = start + length
                if end > len(tokens):
                    break
                window = tokens[start:end]
                if window[-1].is_stopword:
                    continue
                if all(_is_numeric_token(t) for t in window):
                    continue
                key = " ".join(t.stem for t in window)
                acc = found.get(key)
                if acc is None:
                    acc = found[key] = _Accumulator(window)
                acc.add(window)

    candidates: dict[str, CandidatePhrase] = {}
    for key, acc in found.items():
        term_id = match_phrase(vocabulary, acc.window) if vocabulary is not None else None
        if matched_only and term_id is None:
            continue
        candidates[key] = CandidatePhrase(
            normalized_form=key,
            surface_form=acc.best_surface(),
            length_words=len(acc.window),
            term_id=term_id,
            freq=acc.freq,
            first_pos=acc.first_pos,
            last_pos=acc.last_pos,
        )
    return CandidateSet(
        document_id=document.id,
        candidates=candidates,
        doc_word_count=document.word_count,
    )


def merge_document_frequencies(candidate_sets: Sequence[CandidateSet]) -> dict[str, int]:
    """df(p) = number of documents whose candidate set contains p."""
    seen_ids = set()
    df: dict[str, int] = {}
    for cset in candidate_sets:
        if cset.document_id in seen_ids:
            raise ValueError(f"duplicate document id: {cset.document_id}")
        seen_ids.add(cset.document_id)
        for key in cset.candidates:
            df[key] = df.get(key, 0) + 1
    return df

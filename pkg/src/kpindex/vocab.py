"""Controlled vocabulary loading, phrase matching and hierarchy features."""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .textkit import Token, normalize_phrase_text

_HEADER = ("id", "preferred_label", "alt_labels", "broader_ids", "related_ids")


@dataclass(frozen=True)
class VocabTerm:
    term_id: str
    preferred_label: str
    alt_labels: tuple[str, ...]
    broader: tuple[str, ...]
    related: tuple[str, ...]
    depth: int


@dataclass(frozen=True)
class Vocabulary:
    terms: dict[str, VocabTerm]
    label_index: dict[str, str]
    adjacency: dict[str, frozenset[str]]
    max_depth: int
    fingerprint: str

    def __contains__(self, term_id: str) -> bool:
        return term_id in self.terms


def _split_ids(field: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in field.split(";") if part.strip())


def _parse_rows(path: str) -> list[tuple[str, str, tuple[str, ...], tuple[str, ...], tuple[str, ...]]]:
    lines = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            lines.append(line)
    if not lines:
        return []
    header = tuple(col.strip() for col in lines[0].split("\t"))
    if header != _HEADER:
        expected = "\t".join(_HEADER)
        raise ValueError(f"invalid vocabulary header: expected {expected!r}")
    rows = []
    for line in lines[1:]:
        cols = line.split("\t")
        if len(cols) < 2 or len(cols) > 5 or not cols[0].strip():
            raise ValueError(f"malformed vocabulary row: {line!r}")
        cols = list(cols) + [""] * (5 - len(cols))
        rows.append(
            (
                cols[0].strip(),
                cols[1].strip(),
                tuple(_split_ids(cols[2])),
                _split_ids(cols[3]),
                _split_ids(cols[4]),
            )
        )
    return rows


def _compute_depths(rows) -> dict[str, int]:
    ids = {row[0] for row in rows}
    broader = {row[0]: row[3] for row in rows}
    children: dict[str, list[str]] = {tid: [] for tid in ids}
    for tid, parents in broader.items():
        for parent in parents:
            children[parent].append(tid)
    depths: dict[str, int] = {tid: 0 for tid in ids if not broader[tid]}
    queue = deque(sorted(depths))
    while queue:
        current = queue.popleft()
        for child in children[current]:
            if child not in depths:
                depths[child] = depths[current] + 1
                queue.append(child)
    unresolved = sorted(ids - depths.keys())
    if unresolved:
        cycle = _find_cycle(unresolved, broader)
        raise ValueError("broader cycle: " + " -> ".join(cycle))
    return depths


def _find_cycle(unresolved: list[str], broader: dict[str, Sequence[str]]) -> list[str]:
    # Every unresolved term sits on or below a cycle; walking broader links
    # inside the unresolved set must therefore revisit a node.
    unresolved_set = set(unresolved)
    node = unresolved[0]
    seen: list[str] = []
    while node not in seen:
        seen.append(node)
        node = next(p for p in broader[node] if p in unresolved_set)
    start = seen.index(node)
    return seen[start:] + [node]


def load_vocabulary(path: str) -> Vocabulary:
    """Load a TSV vocabulary and precompute depths and adjacency.

    Depth is the shortest broader-chain distance to a root. Broader links
    must be acyclic and every referenced id must exist.
    """
    rows = _parse_rows(path)
    ids = set()
    for row in rows:
        if row[0] in ids:
            raise ValueError(f"duplicate term id: {row[0]}")
        ids.add(row[0])
    for tid, _, _, broader_ids, related_ids in rows:
        for ref in list(broader_ids) + list(related_ids):
            if ref not in ids:
                raise ValueError(f"unknown term id: {ref} (referenced by {tid})")
    depths = _compute_depths(rows)

    terms: dict[str, VocabTerm] = {}
    for tid, preferred, alts, broader_ids, related_ids in rows:
        terms[tid] = VocabTerm(
            term_id=tid,
            preferred_label=preferred,
            alt_labels=alts,
            broader=broader_ids,
            related=related_ids,
            depth=depths[tid],
        )

    label_index: dict[str, str] = {}
    for tid in sorted(terms):
        key = normalize_phrase_text(terms[tid].preferred_label)
        if key and key not in label_index:
            label_index[key] = tid
    for tid in sorted(terms):
        for alt in terms[tid].alt_labels:
            key = normalize_phrase_text(alt)
            if key and key not in label_index:
                label_index[key] = tid

    neighbor_sets: dict[str, set[str]] = {tid: set() for tid in terms}
    for tid, term in terms.items():
        for other in list(term.broader) + list(term.related):
            if other != tid:
                neighbor_sets[tid].add(other)
                neighbor_sets[other].add(tid)
    adjacency = {tid: frozenset(ns) for tid, ns in neighbor_sets.items()}

    digest = hashlib.sha256()
    for row in sorted(rows):
        digest.update(repr(row).encode("utf-8"))
    return Vocabulary(
        terms=terms,
        label_index=label_index,
        adjacency=adjacency,
        max_depth=max(depths.values(), default=0),
        fingerprint=digest.hexdigest(),
    )


def match_phrase(vocabulary: Vocabulary, phrase_tokens: Sequence[Token]) -> str | None:
    """Return the term whose normalized label equals the normalized phrase."""
    key = " ".join(sorted(t.stem for t in phrase_tokens))
    return vocabulary.label_index.get(key)


def node_degree(vocabulary: Vocabulary, term_id: str, candidate_terms: Iterable[str]) -> int:
    """Count vocabulary edges between `term_id` and the other candidates."""
    if term_id not in vocabulary.terms:
        raise ValueError(f"unknown term id: {term_id}")
    others = set(candidate_terms) - {term_id}
    for other in others:
        if other not in vocabulary.terms:
            raise ValueError(f"unknown term id: {other}")
    return len(vocabulary.adjacency[term_id] & others)


def generality(vocabulary: Vocabulary, term_id: str) -> float:
    """1 at the roots, falling linearly to 0 at the deepest level."""
    term = vocabulary.terms.get(term_id)
    if term is None:
        raise ValueError(f"unknown term id: {term_id}")
    if vocabulary.max_depth == 0:
        return 1.0
    return 1.0 - term.depth / vocabulary.max_depth

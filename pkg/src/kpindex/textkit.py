"""Low-level text processing: segmentation, tokenization, syllables, stemming.

Everything here is a pure function of its inputs, so identical text always
produces identical output regardless of call order or thread count.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

# Decimal/thousands numbers first so "3.5" stays one token, then word runs
# with internal hyphens or apostrophes. Underscore is excluded on purpose.
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)+|[^\W_]+(?:['’-][^\W_]+)*")

_TERMINATOR_RE = re.compile(r"[.!?]+")

# Trailing words that end in a period but do not close a sentence.
_ABBREVIATIONS = frozenset({"dr.", "mr.", "fig.", "al.", "e.g.", "i.e.", "vs."})

_VOWELS = "aeiou"


@dataclass(frozen=True)
class Token:
    """One word as it appeared in the source text."""

    surface: str
    stem: str
    position: int
    is_stopword: bool


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_order: int
    char_span: tuple[int, int]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    sentences: tuple[Sentence, ...]
    word_count: int
    gold_keyphrases: tuple[str, ...] | None = None


# ---------------------------------------------------------------------------
# Stopwords


def load_stopwords(path: str) -> frozenset[str]:
    """Read a stopword file: UTF-8, one lowercase word per line, # comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.casefold())
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    data = resources.files("kpindex.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in data.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.casefold())
    return frozenset(words)


# ---------------------------------------------------------------------------
# Porter stemmer
#
# The classic suffix-stripping algorithm, implemented from its published
# rule tables without the later revisions. Words shorter than 3 letters
# are returned unchanged, as the algorithm prescribes.


def _is_cons(w: str, i: int) -> bool:
    c = w[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_cons(w, i - 1)
    return True


def _measure(w: str) -> int:
    """Count VC sequences: the m of the [C](VC)^m[V] word form."""
    m = 0
    i = 0
    n = len(w)
    while i < n and _is_cons(w, i):
        i += 1
    while i < n:
        while i < n and not _is_cons(w, i):
            i += 1
        if i == n:
            break
        m += 1
        while i < n and _is_cons(w, i):
            i += 1
    return m


def _has_vowel(w: str) -> bool:
    return any(not _is_cons(w, i) for i in range(len(w)))


def _ends_double_cons(w: str) -> bool:
    return len(w) >= 2 and w[-1] == w[-2] and _is_cons(w, len(w) - 1)


def _ends_cvc(w: str) -> bool:
    if len(w) < 3:
        return False
    if _is_cons(w, len(w) - 2) or not _is_cons(w, len(w) - 3) or not _is_cons(w, len(w) - 1):
        return False
    return w[-1] not in "wxy"


_STEP2_RULES = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3_RULES = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4_SUFFIXES = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _longest_rule(w: str, rules: Iterable[tuple[str, str]]) -> tuple[str, str] | None:
    best = None
    for suf, rep in rules:
        if w.endswith(suf) and (best is None or len(suf) > len(best[0])):
            best = (suf, rep)
    return best


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b_fixup(w: str) -> str:
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_cons(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    if w.endswith("ed"):
        stem_part = w[:-2]
        return _step1b_fixup(stem_part) if _has_vowel(stem_part) else w
    if w.endswith("ing"):
        stem_part = w[:-3]
        return _step1b_fixup(stem_part) if _has_vowel(stem_part) else w
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step2(w: str) -> str:
    rule = _longest_rule(w, _STEP2_RULES)
    if rule is not None:
        stem_part = w[: len(w) - len(rule[0])]
        if _measure(stem_part) > 0:
            return stem_part + rule[1]
    return w


def _step3(w: str) -> str:
    rule = _longest_rule(w, _STEP3_RULES)
    if rule is not None:
        stem_part = w[: len(w) - len(rule[0])]
        if _measure(stem_part) > 0:
            return stem_part + rule[1]
    return w


def _step4(w: str) -> str:
    rule = _longest_rule(w, ((s, "") for s in _STEP4_SUFFIXES))
    if rule is None:
        return w
    suf = rule[0]
    stem_part = w[: len(w) - len(suf)]
    if _measure(stem_part) > 1:
        if suf == "ion" and (not stem_part or stem_part[-1] not in "st"):
            return w
        return stem_part
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        stem_part = w[:-1]
        m = _measure(stem_part)
        if m > 1 or (m == 1 and not _ends_cvc(stem_part)):
            w = stem_part
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


def porter_pass(word: str) -> str:
    """One application of the classic suffix-stripping step sequence.

    Input must already be case-folded; words of length <= 2 come back
    unchanged, as the algorithm prescribes.
    """
    w = word
    if len(w) <= 2:
        return w
    for step in (_step1a, _step1b, _step1c, _step2, _step3, _step4, _step5):
        w = step(w)
    return w


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    """Return the suffix-stripped, case-folded form of `word`.

    Only pure ASCII-alphabetic words are stripped; anything else (numbers,
    hyphenated or apostrophized forms, non-Latin scripts) is just case-folded
    so that normalization stays deterministic without pretending to stem it.

    The pass is applied until the word stops changing. The classic algorithm
    runs once, which leaves residues like "agre" that a second pass reduces;
    iterating makes stem a true normal form (stem(stem(w)) == stem(w)). No
    rewrite rule lengthens a word and the three length-preserving rules
    cannot re-fire, so the loop always terminates.
    """
    w = word.casefold()
    if not w.isascii() or not w.isalpha():
        return w
    while True:
        reduced = porter_pass(w)
        if reduced == w:
            return w
        w = reduced


# ---------------------------------------------------------------------------
# Syllables


def count_syllables(word: str) -> int:
    """Heuristic syllable count: maximal vowel groups with a silent-e rule.

    "y" counts as a vowel only after a consonant. A trailing "e" drops one
    group unless that would leave zero. Tokens without letters count as one
    syllable so numeric tokens stay non-complex.
    """
    w = word.casefold()
    groups = 0
    in_group = False
    prev_cons_letter = False
    has_alpha = False
    for c in w:
        if not c.isalpha():
            in_group = False
            prev_cons_letter = False
            continue
        has_alpha = True
        vowel = c in _VOWELS or (c == "y" and prev_cons_letter)
        if vowel and not in_group:
            groups += 1
        in_group = vowel
        prev_cons_letter = not vowel
    if not has_alpha:
        return 1
    if groups > 1 and w.endswith("e"):
        groups -= 1
    return max(groups, 1)


def is_complex_word(word: str) -> bool:
    return count_syllables(word) >= 3


# ---------------------------------------------------------------------------
# Tokenization and sentence segmentation


def tokenize(sentence_text: str, stopwords: frozenset[str] | None = None) -> list[Token]:
    """Split one sentence's text into tokens with 0-based local positions."""
    if stopwords is None:
        stopwords = default_stopwords()
    tokens = []
    for pos, match in enumerate(_TOKEN_RE.finditer(sentence_text)):
        surface = match.group()
        folded = surface.casefold()
        tokens.append(
            Token(
                surface=surface,
                stem=stem(surface),
                position=pos,
                is_stopword=folded in stopwords,
            )
        )
    return tokens


def _sentence_boundaries(text: str) -> list[int]:
    points = []
    n = len(text)
    for match in _TERMINATOR_RE.finditer(text):
        end = match.end()
        if end < n and not text[end].isspace():
            continue
        j = end
        while j < n and text[j].isspace():
            j += 1
        if j < n and (text[j].islower() or text[j].isdigit()):
            continue
        if set(match.group()) == {"."}:
            i = match.start()
            while i > 0 and not text[i - 1].isspace():
                i -= 1
            if text[i:end].casefold() in _ABBREVIATIONS:
                continue
        points.append(end)
    return points


def segment_sentences(raw_text: str, stopwords: frozenset[str] | None = None) -> list[Sentence]:
    """Split raw text into sentences whose spans partition the input.

    Spans are not trimmed, so concatenating them in order reproduces the
    text exactly; segments that contain no tokens are discarded.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    starts = [0] + _sentence_boundaries(raw_text)
    if not starts or starts[-1] != len(raw_text):
        starts.append(len(raw_text))
    sentences: list[Sentence] = []
    next_position = 0
    for span_start, span_end in zip(starts, starts[1:]):
        if span_start >= span_end:
            continue
        local = tokenize(raw_text[span_start:span_end], stopwords)
        if not local:
            continue
        tokens = tuple(replace(t, position=next_position + i) for i, t in enumerate(local))
        next_position += len(tokens)
        sentences.append(
            Sentence(tokens=tokens, doc_order=len(sentences), char_span=(span_start, span_end))
        )
    return sentences


def document_from_text(
    doc_id: str,
    raw_text: str,
    gold_keyphrases: Sequence[str] | None = None,
    stopwords: frozenset[str] | None = None,
) -> Document:
    sentences = tuple(segment_sentences(raw_text, stopwords))
    return Document(
        id=doc_id,
        text=raw_text,
        sentences=sentences,
        word_count=sum(len(s.tokens) for s in sentences),
        gold_keyphrases=tuple(gold_keyphrases) if gold_keyphrases is not None else None,
    )


def sentence_text(document: Document, sentence: Sentence) -> str:
    start, end = sentence.char_span
    return document.text[start:end].strip()


def document_from_sentences(
    doc_id: str, source: Document, sentences: Sequence[Sentence]
) -> Document:
    """Build a new document from a subset of a source document's sentences.

    Sentence order and token positions are renumbered so that positional
    statistics refer to the new token stream, not the source one.
    """
    parts = [sentence_text(source, s) for s in sentences]
    text = " ".join(parts)
    rebuilt: list[Sentence] = []
    offset = 0
    next_position = 0
    for i, (sent, part) in enumerate(zip(sentences, parts)):
        tokens = tuple(
            replace(t, position=next_position + j) for j, t in enumerate(sent.tokens)
        )
        next_position += len(tokens)
        rebuilt.append(Sentence(tokens=tokens, doc_order=i, char_span=(offset, offset + len(part))))
        offset += len(part) + 1
    return Document(
        id=doc_id,
        text=text,
        sentences=tuple(rebuilt),
        word_count=next_position,
        gold_keyphrases=source.gold_keyphrases,
    )


# ---------------------------------------------------------------------------
# Phrase normalization helpers shared by candidates, vocab and eval code.


def normalize_words(words: Iterable[str]) -> list[str]:
    return [stem(w) for w in words]


def phrase_key(words: Iterable[str]) -> str:
    """Stemmed, case-folded phrase key that preserves word order."""
    return " ".join(normalize_words(words))


def sorted_phrase_key(words: Iterable[str]) -> str:
    """Order-insensitive phrase key, for gold and vocabulary matching."""
    return " ".join(sorted(normalize_words(words)))


def phrase_words(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def normalize_phrase_text(text: str, order_sensitive: bool = False) -> str:
    words = phrase_words(text)
    return phrase_key(words) if order_sensitive else sorted_phrase_key(words)

"""Tokenization, punctuation handling, and sentence segmentation.

All other modules share this normalization so word-level error rates and
unigram overlap are computed over one consistent token definition:
lowercase whitespace-separated words with boundary punctuation removed.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

TokenSeq = list[str]

# The 32 ASCII punctuation characters. Apostrophe and hyphen survive when
# word-internal ("it's", "open-domain") so contractions and compounds are
# not torn apart the way raw ASR output never would be.
PUNCTUATION = frozenset(string.punctuation)

_KEEP_INTERNAL = frozenset("'-")
_SENTENCE_TERMINATORS = frozenset(".!?")


@dataclass(frozen=True)
class SentenceSplit:
    """Sentence spans of a raw text; concatenating them restores the text."""

    sentences: tuple[str, ...]
    count: int


def strip_punctuation(text: str) -> str:
    """Remove punctuation and collapse whitespace runs to single spaces.

    Word-internal apostrophes and hyphens (alphanumeric on both sides)
    are preserved. Casing is untouched. Idempotent.
    """
    kept: list[str] = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in PUNCTUATION:
            kept.append(ch)
            continue
        if ch in _KEEP_INTERNAL:
            prev_ok = i > 0 and text[i - 1].isalnum()
            next_ok = i + 1 < n and text[i + 1].isalnum()
            if prev_ok and next_ok:
                kept.append(ch)
    return " ".join("".join(kept).split())


def normalize(text: str) -> TokenSeq:
    """Lowercase and tokenize raw text into a punctuation-free word sequence.

    Tokens that consist entirely of punctuation disappear; empty input
    yields an empty sequence.
    """
    return strip_punctuation(text).lower().split()


def split_sentences(text: str) -> SentenceSplit:
    """Split text on maximal runs of ``.``/``!``/``?`` followed by whitespace or end.

    Spans are contiguous slices of the source, so their concatenation
    reconstructs it exactly. Trailing whitespace after the final
    terminator folds into the last span rather than forming an empty
    sentence. Abbreviations receive no special treatment. Empty input
    counts as a single empty sentence.
    """
    spans: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _SENTENCE_TERMINATORS:
            j = i
            while j + 1 < n and text[j + 1] in _SENTENCE_TERMINATORS:
                j += 1
            if j + 1 == n or text[j + 1].isspace():
                spans.append(text[start : j + 1])
                start = j + 1
            i = j + 1
        else:
            i += 1
    if start < n:
        remainder = text[start:]
        if remainder.strip() or not spans:
            spans.append(remainder)
        else:
            spans[-1] += remainder
    if not spans:
        spans.append(text)
    return SentenceSplit(sentences=tuple(spans), count=len(spans))

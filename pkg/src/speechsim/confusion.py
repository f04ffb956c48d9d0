"""Train and serialize the n-gram confusion model behind error simulation.

Aligned reference/hypothesis pairs are cut into confusion segments:
maximal runs of non-match alignment ops, greedily chunked left to right
so neither side of a segment exceeds the model order. Segment counts
form the substitution/deletion table; pure insertions are keyed by the
preceding reference token (or a start-of-utterance anchor) because an
insertion needs a place to happen.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .alignment import OpKind, align
from .errors import EmptyCorpus, MalformedInput, VersionMismatch
from .text_norm import TokenSeq

FORMAT_VERSION = "1"
FORMAT_NAME = "speechsim-confusion-model"

# Anchor for insertions occurring before any reference token. Angle
# brackets cannot survive normalization, so no real token collides.
START_CONTEXT = "<s>"

Gram = tuple[str, ...]


@dataclass(frozen=True)
class ConfusionSegment:
    """A contiguous confusion: ref_gram was realized as hyp_gram.

    ``anchor`` is set only for pure insertions (empty ref_gram) and names
    the reference token the insertion follows. ``ref_start`` locates the
    segment in the reference, which makes replay unambiguous; it is
    per-pair metadata and never enters the aggregated model.
    """

    ref_gram: Gram
    hyp_gram: Gram
    anchor: str | None = None
    ref_start: int = 0

    def __post_init__(self) -> None:
        if not self.ref_gram and not self.hyp_gram:
            raise ValueError("segment cannot be empty on both sides")
        if bool(self.anchor) != (len(self.ref_gram) == 0):
            raise ValueError("anchor is set exactly for pure insertions")


def segment_pair(ref: Sequence[str], hyp: Sequence[str], order: int) -> list[ConfusionSegment]:
    """Confusion segments of one aligned pair, in reference order.

    Maximal runs of non-match ops are chunked greedily left to right so
    neither gram exceeds ``order``. Replaying the segments over the
    reference reproduces the hypothesis exactly; match positions are
    skipped, not segmented.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    segments: list[ConfusionSegment] = []
    last_ref_token: str | None = None
    ref_pos = 0
    run_ref: list[str] = []
    run_hyp: list[str] = []
    run_start = 0
    run_anchor = START_CONTEXT

    def flush() -> None:
        nonlocal run_ref, run_hyp, run_start, run_anchor
        if run_ref or run_hyp:
            segments.append(
                ConfusionSegment(
                    ref_gram=tuple(run_ref),
                    hyp_gram=tuple(run_hyp),
                    anchor=run_anchor if not run_ref else None,
                    ref_start=run_start,
                )
            )
        run_ref = []
        run_hyp = []
        run_start = ref_pos
        run_anchor = last_ref_token if last_ref_token is not None else START_CONTEXT

    for op in align(ref, hyp).ops:
        if op.kind is OpKind.MATCH:
            flush()
            last_ref_token = op.ref_token
            ref_pos += 1
            run_start = ref_pos
            run_anchor = last_ref_token
            continue
        added_ref = 1 if op.ref_token is not None else 0
        added_hyp = 1 if op.hyp_token is not None else 0
        if len(run_ref) + added_ref > order or len(run_hyp) + added_hyp > order:
            flush()
        if op.ref_token is not None:
            run_ref.append(op.ref_token)
            last_ref_token = op.ref_token
            ref_pos += 1
        if op.hyp_token is not None:
            run_hyp.append(op.hyp_token)
    flush()
    return segments


def replay_segments(
    ref: Sequence[str], segments: Sequence[ConfusionSegment]
) -> TokenSeq:
    """Apply segments to a reference, yielding the hypothesis they encode."""
    out: TokenSeq = []
    pos = 0
    for seg in segments:
        out.extend(ref[pos : seg.ref_start])
        out.extend(seg.hyp_gram)
        pos = seg.ref_start + len(seg.ref_gram)
    out.extend(ref[pos:])
    return out


@dataclass
class ConfusionModel:
    """Counts-backed mapping from reference n-grams to hypothesis n-grams.

    ``corruption_rate`` is the fraction of training reference tokens that
    fell inside a confusion segment; the simulator scales it to hit a
    target corpus WER. ``anchor_counts`` holds, for every anchor with
    observed insertions, how often that anchor occurred in training
    references, giving per-anchor empirical insertion rates.
    """

    order: int
    table: dict[Gram, Counter] = field(default_factory=dict)
    insertions: dict[str, Counter] = field(default_factory=dict)
    anchor_counts: dict[str, int] = field(default_factory=dict)
    corruption_rate: float = 0.0
    total_training_tokens: int = 0
    version: str = FORMAT_VERSION

    @property
    def has_errors(self) -> bool:
        return bool(self.table) or bool(self.insertions)

    def longest_match(self, tokens: Sequence[str], start: int) -> Gram | None:
        """Longest table key matching ``tokens[start:]``, up to the model order."""
        limit = min(self.order, len(tokens) - start)
        for length in range(limit, 0, -1):
            gram = tuple(tokens[start : start + length])
            if gram in self.table:
                return gram
        return None

    def insertion_rate(self, anchor: str) -> float:
        """Empirical probability of an insertion after this anchor in training."""
        counter = self.insertions.get(anchor)
        if not counter:
            return 0.0
        occurrences = self.anchor_counts.get(anchor, 0)
        if occurrences == 0:
            return 0.0
        return sum(counter.values()) / occurrences

    def saturation_scale(self) -> float:
        """Smallest scale at which every corruption probability clamps to 1.

        Above this value the achieved error rate cannot grow further; it
        is the upper bracket for calibration.
        """
        candidates = []
        if self.corruption_rate > 0:
            candidates.append(1.0 / self.corruption_rate)
        for anchor, counter in self.insertions.items():
            total = sum(counter.values())
            occurrences = self.anchor_counts.get(anchor, 0)
            if total > 0 and occurrences > 0:
                candidates.append(occurrences / total)
        return max(candidates, default=0.0)


def train(pairs: Iterable[tuple[TokenSeq, TokenSeq]], order: int = 3) -> ConfusionModel:
    """Build a confusion model from aligned reference/hypothesis pairs.

    Counting is purely additive, so any processing order (or parallel
    merge of partial counts) yields the same model.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    table: dict[Gram, Counter] = defaultdict(Counter)
    insertions: dict[str, Counter] = defaultdict(Counter)
    anchor_totals: Counter = Counter()
    corrupted = 0
    total = 0
    n_pairs = 0
    for ref, hyp in pairs:
        n_pairs += 1
        total += len(ref)
        anchor_totals[START_CONTEXT] += 1
        anchor_totals.update(ref)
        for seg in segment_pair(ref, hyp, order):
            if seg.ref_gram:
                table[seg.ref_gram][seg.hyp_gram] += 1
                corrupted += len(seg.ref_gram)
            else:
                insertions[seg.anchor][seg.hyp_gram] += 1
    if n_pairs == 0:
        raise EmptyCorpus("no training pairs")
    return ConfusionModel(
        order=order,
        table=dict(table),
        insertions=dict(insertions),
        anchor_counts={a: anchor_totals[a] for a in insertions},
        corruption_rate=corrupted / total if total else 0.0,
        total_training_tokens=total,
    )


def _gram_key(gram: Gram) -> str:
    return " ".join(gram)


def _parse_gram(key: str) -> Gram:
    return tuple(key.split(" ")) if key else ()


def save(model: ConfusionModel) -> bytes:
    """Serialize to versioned, sorted-key JSON; stable bytes for equal models."""
    payload = {
        "format": FORMAT_NAME,
        "version": model.version,
        "order": model.order,
        "corruption_rate": model.corruption_rate,
        "total_training_tokens": model.total_training_tokens,
        "table": {
            _gram_key(ref): {_gram_key(h): c for h, c in counter.items()}
            for ref, counter in model.table.items()
        },
        "insertions": {
            anchor: {_gram_key(h): c for h, c in counter.items()}
            for anchor, counter in model.insertions.items()
        },
        "anchor_counts": dict(model.anchor_counts),
    }
    return json.dumps(payload, sort_keys=True, indent=1).encode("utf-8")


def load(data: bytes) -> ConfusionModel:
    """Inverse of :func:`save`; rejects unknown versions and malformed input."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot parse confusion model: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise MalformedInput("not a confusion model file")
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported confusion model version: {version!r}")
    try:
        table = {
            _parse_gram(ref): Counter({_parse_gram(h): int(c) for h, c in counter.items()})
            for ref, counter in payload["table"].items()
        }
        insertions = {
            anchor: Counter({_parse_gram(h): int(c) for h, c in counter.items()})
            for anchor, counter in payload["insertions"].items()
        }
        for ref_gram, counter in table.items():
            if not ref_gram:
                raise ValueError("table key with empty reference gram")
            if not counter or any(c <= 0 for c in counter.values()):
                raise ValueError(f"table entry for {ref_gram} lacks positive counts")
        for anchor, counter in insertions.items():
            if not counter or any(c <= 0 for c in counter.values()) or () in counter:
                raise ValueError(f"insertion entry for {anchor!r} is invalid")
        return ConfusionModel(
            order=int(payload["order"]),
            table=table,
            insertions=insertions,
            anchor_counts={a: int(c) for a, c in payload["anchor_counts"].items()},
            corruption_rate=float(payload["corruption_rate"]),
            total_training_tokens=int(payload["total_training_tokens"]),
            version=version,
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedInput(f"confusion model file missing or bad field: {exc}") from exc

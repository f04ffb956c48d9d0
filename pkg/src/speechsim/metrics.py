"""Aggregate model scores into perplexity, unigram F1, and recall-at-k.

Perplexity pools tokens corpus-wide (not per-example means), recall uses
a strict tie rule (the ground truth must beat ties at the boundary), and
multi-seed reports carry mean and population standard deviation per
bucket, with the ``all`` bucket computed over the union of examples
rather than averaged from the others.
"""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .dialogs import DialogExample
from .errors import ArityMismatch, EmptyInput, MalformedInput, MissingScores
from .text_norm import normalize

BUCKETS = ("single", "multi", "all")
METRICS = ("ppl", "f1", "recall_at_k")


@dataclass
class ScoreRecord:
    """Model outputs for one example: target log-probs and candidate scores."""

    example_id: str
    target_token_logprobs: list[float]
    candidate_scores: list[float]
    generated_text: str | None = None

    def __post_init__(self) -> None:
        for lp in self.target_token_logprobs:
            if lp > 1e-9:
                raise ValueError(f"log-probability {lp} is positive")

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "target_token_logprobs": self.target_token_logprobs,
            "candidate_scores": self.candidate_scores,
            "generated_text": self.generated_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreRecord":
        try:
            return cls(
                example_id=data["example_id"],
                target_token_logprobs=[float(x) for x in data["target_token_logprobs"]],
                candidate_scores=[float(x) for x in data["candidate_scores"]],
                generated_text=data.get("generated_text"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad score record: {exc}") from exc


def corpus_ppl(records: Iterable[ScoreRecord]) -> float:
    """exp of the token-pooled mean negative log-likelihood."""
    total_logprob = 0.0
    total_tokens = 0
    for record in records:
        total_logprob += sum(record.target_token_logprobs)
        total_tokens += len(record.target_token_logprobs)
    if total_tokens == 0:
        raise EmptyInput("perplexity needs at least one scored token")
    return math.exp(-total_logprob / total_tokens)


def unigram_f1(generated: str, reference: str) -> float:
    """Harmonic mean of unigram-multiset precision and recall after normalization."""
    gen = Counter(normalize(generated))
    ref = Counter(normalize(reference))
    gen_len = sum(gen.values())
    ref_len = sum(ref.values())
    if gen_len == 0 and ref_len == 0:
        return 1.0
    if gen_len == 0 or ref_len == 0:
        return 0.0
    overlap = sum((gen & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / gen_len
    recall = overlap / ref_len
    return 2 * precision * recall / (precision + recall)


def _record_map(records: Iterable[ScoreRecord]) -> dict[str, ScoreRecord]:
    by_id: dict[str, ScoreRecord] = {}
    for record in records:
        if record.example_id in by_id:
            raise MalformedInput(f"duplicate score record for {record.example_id!r}")
        by_id[record.example_id] = record
    return by_id


def _is_hit(example: DialogExample, record: ScoreRecord, k: int) -> bool:
    scores = record.candidate_scores
    if len(scores) != len(example.candidates):
        raise ArityMismatch(
            f"example {example.example_id!r} has {len(example.candidates)} candidates "
            f"but {len(scores)} scores"
        )
    gt_score = scores[example.gt_index]
    outranking = sum(
        1 for j, score in enumerate(scores) if j != example.gt_index and score >= gt_score
    )
    return outranking < k


def recall_at_k(
    examples: Sequence[DialogExample],
    records: Iterable[ScoreRecord],
    k: int = 1,
) -> float:
    """Fraction of examples whose ground truth ranks strictly inside the top k.

    A candidate tied with the ground truth counts as outranking it, so a
    degenerate constant scorer earns zero.
    """
    if not examples:
        raise EmptyInput("recall needs at least one example")
    by_id = _record_map(records)
    hits = 0
    for example in examples:
        record = by_id.get(example.example_id)
        if record is None:
            raise MissingScores(f"no score record for example {example.example_id!r}")
        hits += _is_hit(example, record, k)
    return hits / len(examples)


@dataclass(frozen=True)
class MetricCell:
    """One metric in one bucket: per-seed values plus their mean and spread."""

    mean: float | None
    stddev: float | None
    per_seed: tuple[float, ...]
    n_examples: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "per_seed": list(self.per_seed),
            "n_examples": self.n_examples,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricCell":
        return cls(
            mean=data["mean"],
            stddev=data["stddev"],
            per_seed=tuple(data["per_seed"]),
            n_examples=data["n_examples"],
        )


@dataclass
class MetricReport:
    """PPL, F1, recall per sentence bucket, with per-seed statistics."""

    n_seeds: int
    k: int
    n_candidates: int
    cells: dict[str, dict[str, MetricCell]]
    ppl_definition: str = "token-pooled over this package's normalized word tokens"
    window_definition: str = "history budget counts normalized word tokens"

    def cell(self, metric: str, bucket: str) -> MetricCell:
        return self.cells[metric][bucket]

    def to_dict(self) -> dict:
        return {
            "n_seeds": self.n_seeds,
            "k": self.k,
            "n_candidates": self.n_candidates,
            "ppl_definition": self.ppl_definition,
            "window_definition": self.window_definition,
            "cells": {
                metric: {bucket: cell.to_dict() for bucket, cell in buckets.items()}
                for metric, buckets in self.cells.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        try:
            return cls(
                n_seeds=int(data["n_seeds"]),
                k=int(data["k"]),
                n_candidates=int(data["n_candidates"]),
                ppl_definition=data["ppl_definition"],
                window_definition=data["window_definition"],
                cells={
                    metric: {
                        bucket: MetricCell.from_dict(cell) for bucket, cell in buckets.items()
                    }
                    for metric, buckets in data["cells"].items()
                },
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad metric report: {exc}") from exc


def _bucket_examples(examples: Sequence[DialogExample], bucket: str) -> list[DialogExample]:
    if bucket == "all":
        return list(examples)
    return [e for e in examples if e.sentence_bucket == bucket]


def _seed_value(
    metric: str,
    examples: Sequence[DialogExample],
    by_id: Mapping[str, ScoreRecord],
    k: int,
) -> float | None:
    records = []
    for example in examples:
        record = by_id.get(example.example_id)
        if record is None:
            raise MissingScores(f"no score record for example {example.example_id!r}")
        records.append((example, record))
    if not records:
        return None
    if metric == "ppl":
        total_lp = sum(sum(r.target_token_logprobs) for _, r in records)
        total_tokens = sum(len(r.target_token_logprobs) for _, r in records)
        if total_tokens == 0:
            return None
        return math.exp(-total_lp / total_tokens)
    if metric == "f1":
        scored = [
            unigram_f1(record.generated_text, example.target)
            for example, record in records
            if record.generated_text is not None
        ]
        if not scored:
            return None
        return sum(scored) / len(scored)
    hits = sum(_is_hit(example, record, k) for example, record in records)
    return hits / len(records)


def _validate_example_sets(example_sets: Sequence[Sequence[DialogExample]]) -> None:
    first = example_sets[0]
    signature = [(e.example_id, e.gt_index, e.sentence_bucket, len(e.candidates)) for e in first]
    for other in example_sets[1:]:
        other_sig = [
            (e.example_id, e.gt_index, e.sentence_bucket, len(e.candidates)) for e in other
        ]
        if other_sig != signature:
            raise ArityMismatch(
                "per-seed example sets disagree on ids, candidate arity, or buckets"
            )


def bucketed_report(
    example_sets: Sequence[Sequence[DialogExample]],
    record_sets: Sequence[Sequence[ScoreRecord]],
    k: int = 1,
) -> MetricReport:
    """Metrics per bucket with mean and population stddev across seeds.

    ``example_sets`` holds either one shared example list or one per
    seed (WER-SIM histories differ per seed while ids, candidates, and
    buckets must agree). The ``all`` bucket is computed over the union of
    examples, never by averaging the bucket values.
    """
    if not record_sets:
        raise EmptyInput("at least one seed of score records is required")
    if len(example_sets) not in (1, len(record_sets)):
        raise ArityMismatch(
            f"got {len(example_sets)} example sets for {len(record_sets)} score sets"
        )
    if any(not examples for examples in example_sets):
        raise EmptyInput("example set is empty")
    _validate_example_sets(example_sets)

    arities = {len(e.candidates) for e in example_sets[0]}
    if len(arities) != 1:
        raise ArityMismatch(f"examples carry mixed candidate arity: {sorted(arities)}")
    n_candidates = arities.pop()

    cells: dict[str, dict[str, MetricCell]] = {metric: {} for metric in METRICS}
    per_bucket_counts = {
        bucket: len(_bucket_examples(example_sets[0], bucket)) for bucket in BUCKETS
    }
    for metric in METRICS:
        for bucket in BUCKETS:
            values: list[float] = []
            for seed_idx, records in enumerate(record_sets):
                examples = example_sets[seed_idx if len(example_sets) > 1 else 0]
                by_id = _record_map(records)
                value = _seed_value(metric, _bucket_examples(examples, bucket), by_id, k)
                if value is not None:
                    values.append(value)
            if values:
                cell = MetricCell(
                    mean=sum(values) / len(values),
                    stddev=statistics.pstdev(values),
                    per_seed=tuple(values),
                    n_examples=per_bucket_counts[bucket],
                )
            else:
                cell = MetricCell(
                    mean=None,
                    stddev=None,
                    per_seed=(),
                    n_examples=per_bucket_counts[bucket],
                )
            cells[metric][bucket] = cell
    return MetricReport(
        n_seeds=len(record_sets),
        k=k,
        n_candidates=n_candidates,
        cells=cells,
    )


def write_scores(path, records: Iterable[ScoreRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def read_scores(path) -> list[ScoreRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{line_no}: {exc}") from exc
            records.append(ScoreRecord.from_dict(data))
    return records


def write_examples(path, examples: Iterable[DialogExample]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(json.dumps(example.to_dict(), sort_keys=True) + "\n")


def read_examples(path) -> list[DialogExample]:
    examples = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{line_no}: {exc}") from exc
            examples.append(DialogExample.from_dict(data))
    return examples

"""Add-alpha n-gram language model used as a built-in reference scorer.

It exists so the whole evaluate pipeline (scores, perplexity, recall,
degradation trends) runs end to end without any external neural model.
Quality is beside the point; normalized probabilities and determinism
are the contract.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dialogs import DialogExample
from .errors import EmptyCorpus, MalformedInput, VersionMismatch
from .metrics import ScoreRecord
from .text_norm import TokenSeq, normalize

LM_FORMAT_NAME = "speechsim-ngram-lm"
LM_FORMAT_VERSION = "1"

START = "<s>"
END = "</s>"
UNK = "<unk>"

# JSON-safe stand-in for log(0) when a candidate normalizes to nothing.
EMPTY_CANDIDATE_SCORE = -1.0e9

Context = tuple[str, ...]


@dataclass
class NgramLm:
    """Counts plus add-alpha smoothing; unseen contexts fall back to unigrams."""

    order: int
    alpha: float
    vocab: set[str] = field(default_factory=set)
    context_counts: dict[Context, Counter] = field(default_factory=dict)
    unigram_counts: Counter = field(default_factory=Counter)
    total_unigrams: int = 0
    version: str = LM_FORMAT_VERSION

    def _map(self, token: str) -> str:
        if token == START or token in self.vocab:
            return token
        return UNK

    def logprob(self, context: Sequence[str], word: str) -> float:
        """Natural-log conditional probability of ``word`` after ``context``."""
        target = word if word in self.vocab else UNK
        ctx = tuple(self._map(tok) for tok in context[-(self.order - 1):]) if self.order > 1 else ()
        vocab_size = len(self.vocab)
        counter = self.context_counts.get(ctx)
        if counter is None:
            numerator = self.unigram_counts[target] + self.alpha
            denominator = self.total_unigrams + self.alpha * vocab_size
        else:
            numerator = counter[target] + self.alpha
            denominator = sum(counter.values()) + self.alpha * vocab_size
        return math.log(numerator / denominator)


def lm_train(corpus: Iterable[TokenSeq], order: int = 3, alpha: float = 0.1) -> NgramLm:
    """Count padded n-grams over the corpus. Deterministic for a given corpus."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    sequences = [list(seq) for seq in corpus]
    if not sequences:
        raise EmptyCorpus("no training sequences")
    vocab: set[str] = {END, UNK}
    for seq in sequences:
        vocab.update(seq)
    context_counts: dict[Context, Counter] = defaultdict(Counter)
    unigram_counts: Counter = Counter()
    total = 0
    pad = [START] * (order - 1)
    for seq in sequences:
        padded = pad + seq + [END]
        for position in range(order - 1, len(padded)):
            word = padded[position]
            context = tuple(padded[position - order + 1 : position])
            context_counts[context][word] += 1
            unigram_counts[word] += 1
            total += 1
    return NgramLm(
        order=order,
        alpha=alpha,
        vocab=vocab,
        context_counts=dict(context_counts),
        unigram_counts=unigram_counts,
        total_unigrams=total,
    )


def lm_score(
    model: NgramLm,
    history: Sequence[str],
    response: Sequence[str],
) -> tuple[list[float], float]:
    """Per-token conditional log-probs of the response given the history.

    Each response token is conditioned on the last ``order - 1`` tokens
    of start-padding + history + preceding response tokens. The total is
    exactly the sum of the per-token values.
    """
    stream = [START] * (model.order - 1) + list(history) + list(response)
    base = len(stream) - len(response)
    logprobs = [
        model.logprob(stream[max(0, base + i - model.order + 1) : base + i], token)
        for i, token in enumerate(response)
    ]
    return logprobs, sum(logprobs)


def lm_emit_scores(model: NgramLm, examples: Iterable[DialogExample]) -> list[ScoreRecord]:
    """Score examples into the records the metric aggregators consume.

    Candidate scores are length-normalized total log-probabilities so
    short distractors earn no free advantage. The top-scoring candidate
    doubles as the generated response (retrieval-style generation),
    which keeps the unigram-F1 path exercisable without a generator.
    """
    records = []
    for example in examples:
        target_logprobs, _ = lm_score(model, example.history, normalize(example.target))
        candidate_scores = []
        for candidate in example.candidates:
            tokens = normalize(candidate)
            if not tokens:
                candidate_scores.append(EMPTY_CANDIDATE_SCORE)
                continue
            _, total = lm_score(model, example.history, tokens)
            candidate_scores.append(total / len(tokens))
        top = max(range(len(candidate_scores)), key=candidate_scores.__getitem__)
        records.append(
            ScoreRecord(
                example_id=example.example_id,
                target_token_logprobs=target_logprobs,
                candidate_scores=candidate_scores,
                generated_text=example.candidates[top],
            )
        )
    return records


def save_lm(model: NgramLm) -> bytes:
    payload = {
        "format": LM_FORMAT_NAME,
        "version": model.version,
        "order": model.order,
        "alpha": model.alpha,
        "vocab": sorted(model.vocab),
        "contexts": {
            " ".join(ctx): dict(counter) for ctx, counter in model.context_counts.items()
        },
        "unigrams": dict(model.unigram_counts),
        "total_unigrams": model.total_unigrams,
    }
    return json.dumps(payload, sort_keys=True, indent=1).encode("utf-8")


def load_lm(data: bytes) -> NgramLm:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot parse language model: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != LM_FORMAT_NAME:
        raise MalformedInput("not a language model file")
    if payload.get("version") != LM_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported language model version: {payload.get('version')!r}")
    try:
        return NgramLm(
            order=int(payload["order"]),
            alpha=float(payload["alpha"]),
            vocab=set(payload["vocab"]),
            context_counts={
                tuple(ctx.split(" ")) if ctx else (): Counter(
                    {w: int(c) for w, c in counter.items()}
                )
                for ctx, counter in payload["contexts"].items()
            },
            unigram_counts=Counter({w: int(c) for w, c in payload["unigrams"].items()}),
            total_unigrams=int(payload["total_unigrams"]),
            version=payload["version"],
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedInput(f"language model file missing or bad field: {exc}") from exc

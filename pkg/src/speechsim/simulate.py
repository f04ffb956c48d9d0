"""Generate simulated ASR hypotheses at a calibrated corpus-level WER.

The trained confusion model fixes *which* errors can happen and their
relative frequencies; a single global scale factor on its corruption
rate fixes *how many* happen. Bisection on that scale hits the target
corpus WER while preserving the trained error distribution. All
randomness is derived per turn from stable identifiers, so output is
independent of processing order and worker count.
"""

from __future__ import annotations

import math
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .alignment import WerReport, corpus_wer
from .confusion import START_CONTEXT, ConfusionModel
from .errors import MonotonicityViolation, UnreachableTarget
from .seeding import derived_rng, stable_mix
from .text_norm import TokenSeq, normalize

MIN_RELIABLE_CALIBRATION_TOKENS = 1000


def wer_key(target: float) -> str:
    """Canonical string form of a target WER, used in file and seed keys."""
    return f"{float(target):g}"


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs for one simulated variant of a corpus."""

    target_wer: float
    seed: int
    scale: float | None = None
    calibration_tolerance: float = 0.005
    max_calibration_iters: int = 40

    def __post_init__(self) -> None:
        if not 0.0 <= self.target_wer < 1.0:
            raise ValueError("target_wer must lie in [0, 1)")
        if self.scale is not None and self.scale < 0:
            raise ValueError("scale must be non-negative")
        if self.calibration_tolerance <= 0:
            raise ValueError("calibration_tolerance must be positive")
        if self.max_calibration_iters < 1:
            raise ValueError("max_calibration_iters must be at least 1")


def _weighted_choice(rng: random.Random, counter) -> tuple[str, ...]:
    """Sample a key proportionally to its count, over sorted items.

    Sorting makes the draw independent of dict insertion order, so a
    trained model and its deserialized copy sample identically.
    """
    items = sorted(counter.items())
    total = sum(count for _, count in items)
    target = rng.random() * total
    acc = 0
    for gram, count in items:
        acc += count
        if target < acc:
            return gram
    return items[-1][0]


def perturb(
    ref: Sequence[str],
    model: ConfusionModel,
    scale: float,
    rng: random.Random,
) -> TokenSeq:
    """Corrupt one token sequence according to the model, scaled by ``scale``.

    Scans left to right; at each position the longest reference n-gram
    present in the table (backing off to shorter ones) is corrupted with
    probability ``min(1, scale * corruption_rate)``, the replacement
    drawn proportionally to training counts. Unseen tokens pass through.
    After each consumed position an insertion may fire from the anchored
    insertion table at ``min(1, scale * insertion_rate(anchor))``.
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    out: TokenSeq = []
    corrupt_p = min(1.0, scale * model.corruption_rate)

    def maybe_insert(anchor: str) -> None:
        counter = model.insertions.get(anchor)
        if not counter:
            return
        p = min(1.0, scale * model.insertion_rate(anchor))
        if p > 0 and rng.random() < p:
            out.extend(_weighted_choice(rng, counter))

    maybe_insert(START_CONTEXT)
    i = 0
    n = len(ref)
    while i < n:
        gram = model.longest_match(ref, i)
        if gram is not None and corrupt_p > 0 and rng.random() < corrupt_p:
            out.extend(_weighted_choice(rng, model.table[gram]))
            i += len(gram)
        else:
            out.append(ref[i])
            i += 1
        maybe_insert(ref[i - 1])
    return out


@dataclass(frozen=True)
class CalibrationResult:
    target_wer: float
    scale: float
    achieved: float
    iterations: int
    converged: bool
    corpus_tokens: int
    reliable: bool

    def to_dict(self) -> dict:
        return {
            "target_wer": self.target_wer,
            "scale": self.scale,
            "achieved_calibration_wer": self.achieved,
            "iterations": self.iterations,
            "converged": self.converged,
            "corpus_tokens": self.corpus_tokens,
            "reliable": self.reliable,
        }


def _measure(
    corpus: Sequence[TokenSeq],
    model: ConfusionModel,
    scale: float,
    seed: int,
) -> float:
    pairs = []
    for idx, ref in enumerate(corpus):
        rng = derived_rng(seed, "cal-utt", idx)
        pairs.append((ref, perturb(ref, model, scale, rng)))
    return corpus_wer(pairs).wer


def _check_monotone(points: list[tuple[float, float]], slack: float) -> None:
    ordered = sorted(points)
    for (s_lo, a_lo), (s_hi, a_hi) in zip(ordered, ordered[1:]):
        if a_hi < a_lo - slack:
            raise MonotonicityViolation(
                f"achieved WER fell from {a_lo:.4f} at scale {s_lo:.4f} "
                f"to {a_hi:.4f} at scale {s_hi:.4f} (slack {slack})"
            )


def calibrate(
    corpus: Iterable[TokenSeq],
    model: ConfusionModel,
    target_wer: float,
    seed: int,
    *,
    tolerance: float = 0.005,
    max_iters: int = 40,
    monotonicity_slack: float = 0.01,
) -> CalibrationResult:
    """Find the corruption scale whose simulated corpus WER hits the target.

    Bisection over [0, saturation scale] using a calibration-dedicated
    sub-seed, so generation seeds stay untouched. Achieved WER is
    checked to be (slack-tolerantly) non-decreasing in the scale; a real
    violation aborts with :class:`MonotonicityViolation` rather than
    returning a silently wrong bracket.
    """
    refs = [list(ref) for ref in corpus]
    total_tokens = sum(len(r) for r in refs)
    reliable = total_tokens >= MIN_RELIABLE_CALIBRATION_TOKENS
    # Sampling jitter between measurements shrinks with corpus size; the
    # guard should catch systematic inversions, not single flipped events.
    effective_slack = max(monotonicity_slack, 3.0 / math.sqrt(max(total_tokens, 1)))
    if not reliable:
        warnings.warn(
            f"calibration corpus has {total_tokens} tokens "
            f"(< {MIN_RELIABLE_CALIBRATION_TOKENS}); calibration unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    if not 0.0 <= target_wer < 1.0:
        raise ValueError("target_wer must lie in [0, 1)")
    if target_wer == 0.0:
        return CalibrationResult(
            target_wer=0.0,
            scale=0.0,
            achieved=0.0,
            iterations=0,
            converged=True,
            corpus_tokens=total_tokens,
            reliable=reliable,
        )
    if total_tokens == 0:
        raise UnreachableTarget("calibration corpus has no reference tokens")
    ceiling_scale = model.saturation_scale()
    if not model.has_errors or ceiling_scale <= 0:
        raise UnreachableTarget("confusion model produces no errors")

    points: list[tuple[float, float]] = []

    def measure(scale: float) -> float:
        achieved = _measure(refs, model, scale, seed)
        points.append((scale, achieved))
        _check_monotone(points, effective_slack)
        return achieved

    ceiling = measure(ceiling_scale)
    if ceiling < target_wer - tolerance:
        raise UnreachableTarget(
            f"model ceiling WER {ceiling:.4f} is below target {target_wer} "
            f"(scale {ceiling_scale:.4f})"
        )
    best = (ceiling_scale, ceiling)
    lo, hi = 0.0, ceiling_scale
    converged = abs(ceiling - target_wer) <= tolerance
    while not converged and len(points) < max_iters:
        mid = (lo + hi) / 2.0
        achieved = measure(mid)
        if abs(achieved - target_wer) < abs(best[1] - target_wer):
            best = (mid, achieved)
        if abs(achieved - target_wer) <= tolerance:
            converged = True
            break
        if achieved < target_wer:
            lo = mid
        else:
            hi = mid
    return CalibrationResult(
        target_wer=target_wer,
        scale=best[0],
        achieved=best[1],
        iterations=len(points),
        converged=converged,
        corpus_tokens=total_tokens,
        reliable=reliable,
    )


@dataclass
class SimulatedCorpus:
    """Per-turn hypotheses for one (target WER, seed index) variant."""

    config: SimulationConfig
    seed_index: int
    hypotheses: dict[tuple[str, int], TokenSeq] = field(default_factory=dict)
    achieved: WerReport | None = None
    out_of_tolerance: bool = False

    @property
    def target_wer(self) -> float:
        return self.config.target_wer


def _simulate_dialog(dialog, model: ConfusionModel, scale: float, gen_seed: int):
    results = []
    for turn in dialog.turns:
        rng = derived_rng(gen_seed, dialog.conversation_id, turn.index)
        ref = normalize(turn.message)
        results.append(((dialog.conversation_id, turn.index), ref, perturb(ref, model, scale, rng)))
    return results


def simulate_corpus(
    dialogs: Sequence,
    model: ConfusionModel,
    targets: Iterable[float],
    n_seeds: int,
    seed: int,
    *,
    calibration_tolerance: float = 0.005,
    max_calibration_iters: int = 40,
    achieved_tolerance: float = 0.01,
    jobs: int = 1,
) -> tuple[list[SimulatedCorpus], list[CalibrationResult]]:
    """Simulate every turn of every dialog per (target WER, seed index).

    One calibration runs per target on this corpus; each variant then
    draws per-turn RNG streams from its own derived seed. Variants whose
    achieved corpus WER misses the target by more than
    ``achieved_tolerance`` are flagged, not hidden.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    target_list = sorted(set(float(t) for t in targets))
    if not target_list:
        raise ValueError("at least one target WER is required")
    corpus = [normalize(turn.message) for dialog in dialogs for turn in dialog.turns]

    calibrations: list[CalibrationResult] = []
    variants: list[SimulatedCorpus] = []
    for target in target_list:
        cal_seed = stable_mix(seed, "calibration", wer_key(target))
        calibration = calibrate(
            corpus,
            model,
            target,
            cal_seed,
            tolerance=calibration_tolerance,
            max_iters=max_calibration_iters,
        )
        calibrations.append(calibration)
        for seed_index in range(n_seeds):
            gen_seed = stable_mix(seed, "generate", wer_key(target), seed_index)
            config = SimulationConfig(
                target_wer=target,
                seed=gen_seed,
                scale=calibration.scale,
                calibration_tolerance=calibration_tolerance,
                max_calibration_iters=max_calibration_iters,
            )
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    per_dialog = list(
                        pool.map(
                            lambda d: _simulate_dialog(d, model, calibration.scale, gen_seed),
                            dialogs,
                        )
                    )
            else:
                per_dialog = [
                    _simulate_dialog(d, model, calibration.scale, gen_seed) for d in dialogs
                ]
            hypotheses: dict[tuple[str, int], TokenSeq] = {}
            pairs = []
            for items in per_dialog:
                for key, ref, hyp in items:
                    hypotheses[key] = hyp
                    pairs.append((ref, hyp))
            achieved = corpus_wer(pairs)
            variants.append(
                SimulatedCorpus(
                    config=config,
                    seed_index=seed_index,
                    hypotheses=hypotheses,
                    achieved=achieved,
                    out_of_tolerance=abs(achieved.wer - target) > achieved_tolerance,
                )
            )
    return variants, calibrations

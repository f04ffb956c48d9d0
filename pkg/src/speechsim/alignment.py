"""Word-level edit-distance alignment, WER, transcript realignment, error profiles."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import EmptyReference, NoSubstitutions
from .text_norm import TokenSeq, normalize

if TYPE_CHECKING:
    from .dialogs import Dialog


class OpKind(str, Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    INSERT = "insert"
    DELETE = "delete"


@dataclass(frozen=True)
class AlignOp:
    """One alignment step; exactly the token slots implied by its kind are set."""

    kind: OpKind
    ref_token: str | None = None
    hyp_token: str | None = None

    def __post_init__(self) -> None:
        if self.kind in (OpKind.MATCH, OpKind.SUBSTITUTE):
            if self.ref_token is None or self.hyp_token is None:
                raise ValueError(f"{self.kind.value} op requires both tokens")
            if self.kind is OpKind.MATCH and self.ref_token != self.hyp_token:
                raise ValueError("match op requires equal tokens")
        elif self.kind is OpKind.INSERT:
            if self.ref_token is not None or self.hyp_token is None:
                raise ValueError("insert op carries only a hypothesis token")
        else:
            if self.ref_token is None or self.hyp_token is not None:
                raise ValueError("delete op carries only a reference token")


@dataclass(frozen=True)
class AlignmentPath:
    ops: tuple[AlignOp, ...]
    cost: int

    def ref_tokens(self) -> TokenSeq:
        return [op.ref_token for op in self.ops if op.ref_token is not None]

    def hyp_tokens(self) -> TokenSeq:
        return [op.hyp_token for op in self.ops if op.hyp_token is not None]


@dataclass(frozen=True)
class WerReport:
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            raise EmptyReference("WER undefined for an empty reference")
        return self.errors / self.ref_len

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "ref_len": self.ref_len,
            "wer": self.wer,
        }


def align(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentPath:
    """Minimal unit-cost Levenshtein path between token sequences.

    Ties are broken deterministically while backtracing from the sequence
    ends, preferring match, then substitute, then delete, then insert.
    """
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ref_tok = ref[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (ref_tok != hyp[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and here == dist[i - 1][j - 1]:
            ops.append(AlignOp(OpKind.MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and here == dist[i - 1][j - 1] + 1:
            ops.append(AlignOp(OpKind.SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and here == dist[i - 1][j] + 1:
            ops.append(AlignOp(OpKind.DELETE, ref[i - 1], None))
            i -= 1
        else:
            ops.append(AlignOp(OpKind.INSERT, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return AlignmentPath(ops=tuple(ops), cost=dist[n][m])


def _count_ops(path: AlignmentPath) -> tuple[int, int, int]:
    subs = ins = dels = 0
    for op in path.ops:
        if op.kind is OpKind.SUBSTITUTE:
            subs += 1
        elif op.kind is OpKind.INSERT:
            ins += 1
        elif op.kind is OpKind.DELETE:
            dels += 1
    return subs, ins, dels


def wer(ref: Sequence[str], hyp: Sequence[str]) -> WerReport:
    """Word error rate of a single reference/hypothesis pair."""
    if not ref:
        raise EmptyReference("reference has no tokens")
    subs, ins, dels = _count_ops(align(ref, hyp))
    return WerReport(substitutions=subs, insertions=ins, deletions=dels, ref_len=len(ref))


def corpus_wer(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> WerReport:
    """Pooled WER: error counts summed over pairs, divided by summed reference length.

    This is not the mean of per-utterance rates; long references weigh more.
    """
    subs = ins = dels = ref_len = 0
    for ref, hyp in pairs:
        s, i, d = _count_ops(align(ref, hyp))
        subs += s
        ins += i
        dels += d
        ref_len += len(ref)
    if ref_len == 0:
        raise EmptyReference("corpus has no reference tokens")
    return WerReport(substitutions=subs, insertions=ins, deletions=dels, ref_len=ref_len)


@dataclass(frozen=True)
class TurnReview:
    turn_index: int
    ref_len: int
    hyp_len: int
    local_wer: float | None
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "ref_len": self.ref_len,
            "hyp_len": self.hyp_len,
            "local_wer": self.local_wer,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class AlignmentQualityReport:
    """Machine-readable review of a transcript-to-turn realignment.

    Turns whose local WER exceeds the threshold, or that could not be
    scored, are flagged for manual review; insertions that landed exactly
    on a turn boundary (and were attached to the earlier turn by
    convention) are listed so a reviewer can move them.
    """

    reviews: tuple[TurnReview, ...]
    boundary_insertions: tuple[tuple[int, str], ...]
    review_threshold: float

    def flagged_turns(self) -> list[int]:
        return [r.turn_index for r in self.reviews if r.flagged]

    def to_dict(self) -> dict:
        return {
            "review_threshold": self.review_threshold,
            "turns": [r.to_dict() for r in self.reviews],
            "boundary_insertions": [
                {"turn_index": idx, "token": tok} for idx, tok in self.boundary_insertions
            ],
        }


def realign_transcript(
    dialog: "Dialog",
    transcript: Sequence[str],
    review_threshold: float = 0.5,
) -> tuple[list[TokenSeq], AlignmentQualityReport]:
    """Cut a whole-dialog transcript into per-turn hypotheses.

    The concatenated normalized turn texts are aligned against the
    transcript; hypothesis tokens are assigned to the turn owning the
    reference position they align to. Insertions attach to the turn of
    the most recently consumed reference token, so a boundary insertion
    goes to the earlier turn. Every transcript token lands in exactly
    one turn.
    """
    refs = [normalize(turn.message) for turn in dialog.turns]
    flat_ref: TokenSeq = [tok for ref in refs for tok in ref]
    if not flat_ref:
        raise EmptyReference("dialog turns normalize to zero tokens")
    if not transcript:
        raise EmptyReference("transcript has no tokens")

    turn_of_pos: list[int] = []
    for turn_idx, ref in enumerate(refs):
        turn_of_pos.extend([turn_idx] * len(ref))
    boundary_positions = set()
    cum = 0
    for ref in refs:
        boundary_positions.add(cum)
        cum += len(ref)
    boundary_positions.add(cum)

    path = align(flat_ref, list(transcript))
    hyps: list[TokenSeq] = [[] for _ in refs]
    boundary_insertions: list[tuple[int, str]] = []
    current_turn = 0
    ref_pos = 0
    for op in path.ops:
        if op.kind is OpKind.INSERT:
            hyps[current_turn].append(op.hyp_token)
            if ref_pos in boundary_positions:
                boundary_insertions.append((current_turn + 1, op.hyp_token))
        else:
            current_turn = turn_of_pos[ref_pos]
            if op.kind is not OpKind.DELETE:
                hyps[current_turn].append(op.hyp_token)
            ref_pos += 1

    reviews = []
    for turn_idx, (ref, hyp) in enumerate(zip(refs, hyps)):
        if ref:
            local = wer(ref, hyp).wer
            flagged = local > review_threshold
        else:
            local = None
            flagged = bool(hyp)
        reviews.append(
            TurnReview(
                turn_index=turn_idx + 1,
                ref_len=len(ref),
                hyp_len=len(hyp),
                local_wer=local,
                flagged=flagged,
            )
        )
    report = AlignmentQualityReport(
        reviews=tuple(reviews),
        boundary_insertions=tuple(boundary_insertions),
        review_threshold=review_threshold,
    )
    return hyps, report


@dataclass
class ErrorProfile:
    """Pooled error-type counts and the multiset of substitution pairs."""

    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    substitution_pairs: Counter = field(default_factory=Counter)

    @property
    def total_errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def op_type_distribution(self) -> dict[str, float]:
        total = self.total_errors
        if total == 0:
            return {"substitute": 0.0, "insert": 0.0, "delete": 0.0}
        return {
            "substitute": self.substitutions / total,
            "insert": self.insertions / total,
            "delete": self.deletions / total,
        }

    def top_substitutions(self, limit: int = 20) -> list[tuple[str, str, int]]:
        ranked = sorted(self.substitution_pairs.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(ref, hyp, count) for (ref, hyp), count in ranked[:limit]]

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "op_type_distribution": self.op_type_distribution,
            "distinct_substitution_pairs": len(self.substitution_pairs),
            "top_substitutions": [
                {"ref": ref, "hyp": hyp, "count": count}
                for ref, hyp, count in self.top_substitutions()
            ],
        }


def error_profile(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> ErrorProfile:
    """Pooled op-type counts and substitution pairs over aligned pairs."""
    profile = ErrorProfile()
    for ref, hyp in pairs:
        for op in align(ref, hyp).ops:
            if op.kind is OpKind.SUBSTITUTE:
                profile.substitutions += 1
                profile.substitution_pairs[(op.ref_token, op.hyp_token)] += 1
            elif op.kind is OpKind.INSERT:
                profile.insertions += 1
            elif op.kind is OpKind.DELETE:
                profile.deletions += 1
    return profile


def substitution_overlap(profile_a: ErrorProfile, profile_b: ErrorProfile) -> float:
    """Fraction of profile_a's distinct substitution pairs that profile_b shares."""
    pairs_a = set(profile_a.substitution_pairs)
    if not pairs_a:
        raise NoSubstitutions("first profile has no substitution pairs")
    pairs_b = set(profile_b.substitution_pairs)
    return len(pairs_a & pairs_b) / len(pairs_a)

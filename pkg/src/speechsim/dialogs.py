"""Dialog dataset model, history rendering, and evaluation example construction.

The on-disk dataset format is a JSON object mapping conversation id to
``{"content": [{"message": ..., "agent": ...}, ...]}``; each turn may
additionally carry ``"asr"`` (simulated hypotheses keyed by WER then
seed index) and ``"real"`` (actual transcriptions keyed by transcription
system) blocks.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    InsufficientDistractorPool,
    InvalidDialog,
    InvalidTurnIndex,
    MalformedInput,
    MissingVariant,
)
from .seeding import derived_rng, rand_below
from .simulate import SimulatedCorpus, wer_key
from .text_norm import TokenSeq, normalize, split_sentences, strip_punctuation

DEFAULT_WINDOW = 256
DEFAULT_CANDIDATES = 5

_SETTING_KINDS = ("gold", "no-punc", "wer-sim", "real")


@dataclass(frozen=True)
class Setting:
    """Which text variant user turns contribute to the dialog history."""

    kind: str
    wer: str | None = None
    seed_index: int | None = None
    system: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _SETTING_KINDS:
            raise ValueError(f"unknown setting kind: {self.kind!r}")
        if self.kind == "wer-sim" and (self.wer is None or self.seed_index is None):
            raise ValueError("wer-sim setting requires wer and seed_index")
        if self.kind == "real" and not self.system:
            raise ValueError("real setting requires a transcription system")

    def key(self) -> str:
        if self.kind == "wer-sim":
            return f"wer-sim:{self.wer}:{self.seed_index}"
        if self.kind == "real":
            return f"real:{self.system}"
        return self.kind


GOLD = Setting("gold")
NO_PUNC = Setting("no-punc")


def wer_sim(target: float, seed_index: int) -> Setting:
    return Setting("wer-sim", wer=wer_key(target), seed_index=seed_index)


def real(system: str) -> Setting:
    return Setting("real", system=system)


def parse_setting(text: str) -> Setting:
    """Parse a setting key like ``gold``, ``no-punc``, ``wer-sim:0.1:0``, ``real:A``."""
    parts = text.strip().split(":")
    kind = parts[0].lower().replace("_", "-")
    if kind == "nopunc":
        kind = "no-punc"
    if kind in ("gold", "no-punc") and len(parts) == 1:
        return Setting(kind)
    if kind == "wer-sim" and len(parts) == 3:
        return wer_sim(float(parts[1]), int(parts[2]))
    if kind == "real" and len(parts) == 2:
        return Setting("real", system=parts[1])
    raise ValueError(f"cannot parse setting: {text!r}")


@dataclass
class Turn:
    """One utterance: 1-based position, speaker tag, gold text, variants."""

    index: int
    agent: str
    message: str
    asr: dict[str, dict[str, str]] = field(default_factory=dict)
    real: dict[str, str] = field(default_factory=dict)

    def variant_text(self, setting: Setting) -> str:
        if setting.kind == "gold":
            return self.message
        if setting.kind == "no-punc":
            return strip_punctuation(self.message)
        if setting.kind == "wer-sim":
            text = self.asr.get(setting.wer, {}).get(str(setting.seed_index))
            if text is None:
                raise MissingVariant(
                    f"turn {self.index} has no simulated hypothesis for "
                    f"{setting.key()} (available WERs: {self.wer_keys()})"
                )
            return text
        text = self.real.get(setting.system)
        if text is None:
            raise MissingVariant(
                f"turn {self.index} has no transcription for system {setting.system!r}"
            )
        return text

    def wer_keys(self) -> list[str]:
        return sorted(self.asr)


@dataclass
class Dialog:
    conversation_id: str
    turns: list[Turn]

    def __post_init__(self) -> None:
        if len(self.turns) < 2:
            raise InvalidDialog(f"dialog {self.conversation_id!r} has fewer than 2 turns")
        agents = [t.agent for t in self.turns]
        if len(set(agents)) != 2:
            raise InvalidDialog(
                f"dialog {self.conversation_id!r} must have exactly two speakers, "
                f"got {sorted(set(agents))}"
            )
        for prev, cur in zip(agents, agents[1:]):
            if prev == cur:
                raise InvalidDialog(
                    f"dialog {self.conversation_id!r} speakers do not strictly alternate"
                )
        for pos, turn in enumerate(self.turns, start=1):
            if turn.index != pos:
                raise InvalidDialog(
                    f"dialog {self.conversation_id!r} turn indices are not consecutive"
                )
            if not turn.message:
                raise InvalidDialog(
                    f"dialog {self.conversation_id!r} turn {pos} has empty text"
                )


def assign_roles(dialog: Dialog, target_turn: int) -> list[str]:
    """Role labels for turns 1..target_turn given the response turn.

    The speaker of the target turn is the system; the other speaker is
    the user. Labels follow speaker identity for all earlier turns.
    """
    if not 2 <= target_turn <= len(dialog.turns):
        raise InvalidTurnIndex(
            f"target turn {target_turn} outside [2, {len(dialog.turns)}] "
            f"for dialog {dialog.conversation_id!r}"
        )
    system_agent = dialog.turns[target_turn - 1].agent
    return [
        "system" if turn.agent == system_agent else "user"
        for turn in dialog.turns[:target_turn]
    ]


def render_history(
    dialog: Dialog,
    target_turn: int,
    setting: Setting,
    window: int = DEFAULT_WINDOW,
) -> TokenSeq:
    """Flattened, normalized history of turns 1..target_turn-1, last ``window`` tokens.

    User turns contribute the setting's text variant; system turns always
    contribute gold text. The budget counts this package's normalized
    word tokens, not any model-internal subwords.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    roles = assign_roles(dialog, target_turn)
    tokens: TokenSeq = []
    for turn, role in zip(dialog.turns[: target_turn - 1], roles):
        text = turn.variant_text(setting) if role == "user" else turn.message
        tokens.extend(normalize(text))
    return tokens[-window:]


def render_inference_history(dialog: Dialog, target_turn: int, setting: Setting) -> TokenSeq:
    """History reduced to the last user turn only, as used at inference time."""
    assign_roles(dialog, target_turn)
    last_user = dialog.turns[target_turn - 2]
    return normalize(last_user.variant_text(setting))


def sentence_bucket(text: str) -> str:
    """``single`` if the text contains one sentence, else ``multi``."""
    return "single" if split_sentences(text).count == 1 else "multi"


@dataclass
class DialogExample:
    """One evaluation unit: truncated history plus a candidate-response set."""

    example_id: str
    conversation_id: str
    target_turn: int
    history: TokenSeq
    target: str
    candidates: list[str]
    gt_index: int
    setting: str
    sentence_bucket: str
    mode: str
    window: int | None

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "conversation_id": self.conversation_id,
            "target_turn": self.target_turn,
            "history": self.history,
            "target": self.target,
            "candidates": self.candidates,
            "gt_index": self.gt_index,
            "setting": self.setting,
            "sentence_bucket": self.sentence_bucket,
            "mode": self.mode,
            "window": self.window,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DialogExample":
        try:
            return cls(
                example_id=data["example_id"],
                conversation_id=data["conversation_id"],
                target_turn=int(data["target_turn"]),
                history=list(data["history"]),
                target=data["target"],
                candidates=list(data["candidates"]),
                gt_index=int(data["gt_index"]),
                setting=data["setting"],
                sentence_bucket=data["sentence_bucket"],
                mode=data["mode"],
                window=data["window"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad example record: {exc}") from exc


def _sample_distractors(
    rng, foreign: list[tuple[str, int, str]], k: int, target_text: str
) -> list[str]:
    """k distinct foreign turns whose text differs from the target.

    A foreign turn that happens to repeat the target text cannot pose as
    a distractor: the candidate list must contain the target exactly once.
    """
    chosen: list[str] = []
    seen: set[int] = set()
    while len(chosen) < k:
        idx = rand_below(rng, len(foreign))
        if idx in seen:
            continue
        seen.add(idx)
        if foreign[idx][2] == target_text:
            continue
        chosen.append(foreign[idx][2])
    return chosen


def _dialog_examples(
    dialog: Dialog,
    pool: list[tuple[str, int, str]],
    setting: Setting,
    mode: str,
    window: int,
    n_candidates: int,
    seed: int,
) -> list[DialogExample]:
    foreign = [entry for entry in pool if entry[0] != dialog.conversation_id]
    foreign_text_counts: dict[str, int] = {}
    for entry in foreign:
        foreign_text_counts[entry[2]] = foreign_text_counts.get(entry[2], 0) + 1
    examples = []
    for target_turn in range(2, len(dialog.turns) + 1):
        rng = derived_rng(seed, "example", dialog.conversation_id, target_turn)
        if mode == "train":
            history = render_history(dialog, target_turn, setting, window)
        else:
            history = render_inference_history(dialog, target_turn, setting)
        target_text = dialog.turns[target_turn - 1].message
        eligible = len(foreign) - foreign_text_counts.get(target_text, 0)
        if eligible < n_candidates - 1:
            raise InsufficientDistractorPool(
                f"dialog {dialog.conversation_id!r} turn {target_turn} has only "
                f"{eligible} eligible foreign turns to draw "
                f"{n_candidates - 1} distractors from"
            )
        distractors = _sample_distractors(rng, foreign, n_candidates - 1, target_text)
        gt_index = rand_below(rng, n_candidates)
        candidates = distractors[:gt_index] + [target_text] + distractors[gt_index:]
        examples.append(
            DialogExample(
                example_id=f"{dialog.conversation_id}:{target_turn}",
                conversation_id=dialog.conversation_id,
                target_turn=target_turn,
                history=history,
                target=target_text,
                candidates=candidates,
                gt_index=gt_index,
                setting=setting.key(),
                sentence_bucket=sentence_bucket(dialog.turns[target_turn - 2].message),
                mode=mode,
                window=window if mode == "train" else None,
            )
        )
    return examples


def build_examples(
    dialogs: Sequence[Dialog],
    setting: Setting,
    mode: str = "train",
    window: int = DEFAULT_WINDOW,
    n_candidates: int = DEFAULT_CANDIDATES,
    seed: int = 0,
    jobs: int = 1,
) -> list[DialogExample]:
    """Build one example per (dialog, target turn >= 2) over a split.

    Distractors are drawn, seeded per example id, from gold turns of
    other dialogs in the same split; the ground-truth position within the
    candidate list is uniform per example. The RNG stream depends only on
    (seed, conversation id, target turn), so candidate sets are identical
    across settings and across any processing order or worker count.
    """
    if n_candidates < 2:
        raise ValueError("n_candidates must be at least 2")
    if mode not in ("train", "inference"):
        raise ValueError(f"mode must be 'train' or 'inference', got {mode!r}")
    ordered = sorted(dialogs, key=lambda d: d.conversation_id)
    pool = [
        (dialog.conversation_id, turn.index, turn.message)
        for dialog in ordered
        for turn in dialog.turns
    ]

    def work(dialog: Dialog) -> list[DialogExample]:
        return _dialog_examples(dialog, pool, setting, mode, window, n_candidates, seed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            per_dialog = list(executor.map(work, ordered))
    else:
        per_dialog = [work(dialog) for dialog in ordered]
    return [example for batch in per_dialog for example in batch]


def load_dataset(data: dict) -> list[Dialog]:
    """Build validated dialogs from the dataset JSON structure."""
    if not isinstance(data, dict):
        raise MalformedInput("dataset root must be a JSON object")
    dialogs = []
    for conversation_id in sorted(data):
        body = data[conversation_id]
        try:
            content = body["content"]
            turns = [
                Turn(
                    index=position,
                    agent=str(item["agent"]),
                    message=str(item["message"]),
                    asr={
                        str(w): {str(s): str(t) for s, t in seeds.items()}
                        for w, seeds in item.get("asr", {}).items()
                    },
                    real={str(k): str(v) for k, v in item.get("real", {}).items()},
                )
                for position, item in enumerate(content, start=1)
            ]
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedInput(
                f"dialog {conversation_id!r} does not match the dataset schema: {exc}"
            ) from exc
        dialogs.append(Dialog(conversation_id=conversation_id, turns=turns))
    return dialogs


def read_dataset(path) -> list[Dialog]:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"cannot parse dataset {path}: {exc}") from exc
    return load_dataset(data)


def dataset_to_dict(dialogs: Iterable[Dialog]) -> dict:
    """Inverse of :func:`load_dataset`."""
    out: dict = {}
    for dialog in dialogs:
        content = []
        for turn in dialog.turns:
            item: dict = {"agent": turn.agent, "message": turn.message}
            if turn.asr:
                item["asr"] = {w: dict(seeds) for w, seeds in turn.asr.items()}
            if turn.real:
                item["real"] = dict(turn.real)
            content.append(item)
        out[dialog.conversation_id] = {"content": content}
    return out


def merge_simulated(dialogs: Sequence[Dialog], variants: Iterable[SimulatedCorpus]) -> None:
    """Attach simulated hypotheses to each turn's ``asr`` block, in place."""
    by_id = {dialog.conversation_id: dialog for dialog in dialogs}
    for variant in variants:
        key = wer_key(variant.target_wer)
        for (conversation_id, turn_index), hyp in variant.hypotheses.items():
            turn = by_id[conversation_id].turns[turn_index - 1]
            turn.asr.setdefault(key, {})[str(variant.seed_index)] = " ".join(hyp)

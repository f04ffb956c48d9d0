"""Synthetic fixture corpora shared by unit and acceptance tests.

Everything here is seeded and deterministic: a small vocabulary with a
fixed confusion lexicon for parallel reference/hypothesis pairs, a
conversational dataset whose turns hand a topic to the next turn (so an
n-gram scorer has real signal to lose when the history is corrupted),
and a fully random dialog generator for invariant fuzzing.
"""

from __future__ import annotations

import random

from speechsim.dialogs import Dialog, Turn

VOCAB = [
    "the", "a", "i", "you", "we", "they", "it", "that", "this", "and",
    "but", "or", "so", "is", "was", "are", "have", "had", "will", "would",
    "like", "love", "think", "know", "want", "need", "see", "hear", "say", "tell",
    "time", "day", "year", "money", "people", "world", "house", "water", "music", "game",
    "good", "bad", "big", "small", "new", "old", "long", "right", "sure", "really",
    "ton", "lot", "bit", "kind", "sort", "thing", "place", "way", "team", "show",
]

# Fixed confusable alternatives per vocabulary word (rotations of the
# vocabulary), so trained substitution tables are dense and stable.
CONFUSIONS = {
    word: [VOCAB[(idx + 7) % len(VOCAB)], VOCAB[(idx + 23) % len(VOCAB)]]
    for idx, word in enumerate(VOCAB)
}

TOPICS = [
    "music", "cooking", "cars", "soccer", "planets", "books", "robots",
    "coffee", "gardening", "movies", "history", "chess", "trains",
    "oceans", "birds", "bread", "hiking", "photography", "jazz", "castles",
]
ADJECTIVES = [
    "great", "boring", "amazing", "odd", "tricky", "lovely",
    "wild", "calm", "famous", "rare",
]
VERBS = [
    "like", "love", "enjoy", "study", "watch", "follow",
    "avoid", "admire", "discuss", "remember",
]
FILLERS = ["honestly", "well", "you know", "i mean", "by the way", "anyway"]


def make_lexicon(vocab: list[str]) -> dict[str, list[str]]:
    """Two fixed confusable alternatives per word (vocabulary rotations)."""
    n = len(vocab)
    return {word: [vocab[(i + 7) % n], vocab[(i + 23) % n]] for i, word in enumerate(vocab)}


def random_utterance(rng: random.Random, min_len: int = 6, max_len: int = 14) -> list[str]:
    return [rng.choice(VOCAB) for _ in range(rng.randint(min_len, max_len))]


def corrupt(
    rng: random.Random,
    ref: list[str],
    vocab: list[str] | None = None,
    lexicon: dict[str, list[str]] | None = None,
    sub_rate: float = 0.18,
    del_rate: float = 0.06,
    ins_rate: float = 0.06,
) -> list[str]:
    """Apply seeded substitutions, deletions, and insertions to one utterance."""
    vocab = vocab or VOCAB
    lexicon = lexicon if lexicon is not None else CONFUSIONS
    hyp: list[str] = []
    for token in ref:
        roll = rng.random()
        if roll < sub_rate:
            hyp.append(rng.choice(lexicon.get(token) or vocab))
        elif roll < sub_rate + del_rate:
            continue
        else:
            hyp.append(token)
        if rng.random() < ins_rate:
            hyp.append(rng.choice(vocab))
    return hyp


def parallel_pairs(n_pairs: int, seed: int, **rates) -> list[tuple[list[str], list[str]]]:
    """Seeded (reference, hypothesis) pairs for confusion-model training."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        ref = random_utterance(rng)
        pairs.append((ref, corrupt(rng, ref, **rates)))
    return pairs


def dialog_parallel_pairs(
    dialogs: list[Dialog], seed: int, **rates
) -> list[tuple[list[str], list[str]]]:
    """Parallel pairs whose references are the dialogs' own normalized turns.

    Trains a confusion model that covers the evaluation vocabulary, the
    way a simulator trained on transcribed speech covers its domain.
    """
    from speechsim.text_norm import normalize

    vocab = sorted(
        {tok for dialog in dialogs for turn in dialog.turns for tok in normalize(turn.message)}
    )
    lexicon = make_lexicon(vocab)
    rng = random.Random(seed)
    pairs = []
    for dialog in dialogs:
        for turn in dialog.turns:
            ref = normalize(turn.message)
            pairs.append((ref, corrupt(rng, ref, vocab=vocab, lexicon=lexicon, **rates)))
    return pairs


def flat_corpus(n_utterances: int, seed: int) -> list[list[str]]:
    """Seeded clean utterances over the shared vocabulary."""
    rng = random.Random(seed)
    return [random_utterance(rng) for _ in range(n_utterances)]


def trend_dialogs(n_dialogs: int = 150, seed: int = 7) -> list[Dialog]:
    """Conversations where each turn answers the previous topic and hands off a new one.

    The closing tokens of turn t determine the opening tokens of turn
    t+1, so corrupting the last user turn measurably hurts an n-gram
    scorer's view of the true continuation.
    """
    rng = random.Random(seed)
    dialogs = []
    for d in range(n_dialogs):
        n_turns = rng.randint(6, 10)
        topic = rng.choice(TOPICS)
        turns = []
        for t in range(1, n_turns + 1):
            next_topic = rng.choice(TOPICS)
            adj = rng.choice(ADJECTIVES)
            verb = rng.choice(VERBS)
            if t == 1:
                text = f"Hello there! What do you think about {topic}?"
            elif rng.random() < 0.45:
                text = f"{topic} is {adj} and i {verb} it, tell me about {next_topic}"
                topic = next_topic
            else:
                filler = rng.choice(FILLERS)
                text = (
                    f"{topic} is really {adj}, i {verb} it a lot. "
                    f"{filler}, what about {next_topic}?"
                )
                topic = next_topic
            turns.append(Turn(index=t, agent="T1" if t % 2 else "T2", message=text))
        dialogs.append(Dialog(conversation_id=f"conv-{d:04d}", turns=turns))
    return dialogs


_PUNCT_CHOICES = ["", "", "", ",", ".", "!", "?", "..."]


def fuzz_dialogs(n_dialogs: int = 1000, seed: int = 123) -> list[Dialog]:
    """Structurally valid but otherwise random dialogs for invariant fuzzing."""
    rng = random.Random(seed)
    dialogs = []
    for d in range(n_dialogs):
        n_turns = rng.randint(2, 7)
        first = rng.choice(["A", "B"])
        second = "B" if first == "A" else "A"
        turns = []
        for t in range(1, n_turns + 1):
            words = []
            for _ in range(rng.randint(3, 10)):
                words.append(rng.choice(VOCAB) + rng.choice(_PUNCT_CHOICES))
            text = " ".join(words)
            if rng.random() < 0.3:
                text = text.capitalize()
            turns.append(
                Turn(index=t, agent=first if t % 2 else second, message=text)
            )
        dialogs.append(Dialog(conversation_id=f"fuzz-{d:05d}", turns=turns))
    return dialogs

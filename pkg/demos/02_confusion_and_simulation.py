"""Train a confusion model from parallel text and simulate at target WERs.

Builds a small synthetic parallel corpus (clean references plus noisy
hypotheses), trains the n-gram confusion model on it, then calibrates a
single corruption scale per target WER and checks what the simulator
actually achieved on a fresh corpus.
"""

import random

from speechsim import calibrate, corpus_wer, perturb, train
from speechsim.seeding import derived_rng

WORDS = (
    "the a i you we they it that this and but so is was are have will "
    "like think know want time day year money people world house water "
    "music game good bad big small new old long right sure really"
).split()
LEXICON = {w: [WORDS[(i + 5) % len(WORDS)], WORDS[(i + 17) % len(WORDS)]] for i, w in enumerate(WORDS)}


def make_pairs(n, seed):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        ref = [rng.choice(WORDS) for _ in range(rng.randint(6, 14))]
        hyp = []
        for tok in ref:
            roll = rng.random()
            if roll < 0.18:
                hyp.append(rng.choice(LEXICON[tok]))
            elif roll < 0.24:
                pass  # deletion
            else:
                hyp.append(tok)
            if rng.random() < 0.06:
                hyp.append(rng.choice(WORDS))
        pairs.append((ref, hyp))
    return pairs


print("=== Training ===")
model = train(make_pairs(2000, seed=1), order=3)
print(f"order={model.order} corruption_rate={model.corruption_rate:.3f} "
      f"training_tokens={model.total_training_tokens}")
print(f"table entries: {len(model.table)}, insertion anchors: {len(model.insertions)}")
example_gram = next(iter(sorted(model.table)))
print(f"sample confusion: {example_gram} -> {dict(model.table[example_gram])}")
print()

print("=== Calibration and simulation ===")
rng = random.Random(2)
eval_corpus = [[rng.choice(WORDS) for _ in range(rng.randint(6, 14))] for _ in range(1200)]
print(f"evaluation corpus: {sum(len(u) for u in eval_corpus)} tokens")
for target in (0.1, 0.2, 0.3):
    result = calibrate(eval_corpus, model, target, seed=42)
    pairs = []
    for idx, ref in enumerate(eval_corpus):
        pairs.append((ref, perturb(ref, model, result.scale, derived_rng(7, "demo", idx))))
    achieved = corpus_wer(pairs)
    print(f"target {target:.2f}: scale={result.scale:.3f} "
          f"({result.iterations} calibration passes) -> achieved {achieved.wer:.4f}")
print()

print("=== One perturbed utterance, fully deterministic per seed ===")
ref = "i think people like music and good games".split()
for seed in (1, 2):
    for attempt in ("first", "second"):
        hyp = perturb(ref, model, 2.0, derived_rng(seed, "utt"))
        print(f"seed {seed} ({attempt} call): {' '.join(hyp)}")

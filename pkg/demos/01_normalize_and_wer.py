"""Text normalization, sentence splitting, and word error rate.

Walks through the shared token definition every other capability builds
on, then aligns a reference against a noisy hypothesis and reads the
edit operations and WER off the alignment.
"""

from speechsim import align, corpus_wer, normalize, split_sentences, strip_punctuation, wer

print("=== Normalization ===")
raw = "Well, it's $110 million... that is a TON of money!"
print("raw:      ", raw)
print("stripped: ", strip_punctuation(raw))
print("tokens:   ", normalize(raw))
print()

print("=== Sentence splitting ===")
for text in ["Just one sentence", "Wow!!! Really?", "Trailing spaces after this.  "]:
    split = split_sentences(text)
    print(f"{text!r} -> {split.count} sentence(s): {split.sentences}")
print()

print("=== Alignment and WER ===")
ref = normalize("the quick brown fox jumps over the lazy dog")
hyp = normalize("the quick browned fox jumps the crazy dog dog")
path = align(ref, hyp)
for op in path.ops:
    print(f"  {op.kind.value:10s} ref={op.ref_token or '':8s} hyp={op.hyp_token or ''}")
report = wer(ref, hyp)
print(f"S={report.substitutions} I={report.insertions} D={report.deletions} "
      f"ref_len={report.ref_len} WER={report.wer:.3f}")
print()

print("=== Corpus-level WER pools counts, it does not average rates ===")
pairs = [
    (normalize("a b c d e f g h i j"), normalize("a b c d e f g h i x")),  # 10 tokens, 1 err
    (normalize("k l"), normalize("x y")),  # 2 tokens, 2 errs
]
pooled = corpus_wer(pairs)
per_utt = [wer(r, h).wer for r, h in pairs]
print(f"per-utterance WERs: {per_utt}, mean of rates: {sum(per_utt) / 2:.3f}")
print(f"pooled corpus WER:  {pooled.wer:.3f}  (3 errors / 12 reference tokens)")

"""Error-profile analysis: what kinds of mistakes does a corpus contain?

Compares two hypothesis sources for the same references: op-type
proportions (substitute / insert / delete) and the fraction of one
source's distinct substitution pairs that also appear in the other.
"""

from speechsim import error_profile, normalize, substitution_overlap

references = [
    "the weather was lovely this morning",
    "we should plan another trip soon",
    "my brother collects vintage radios",
    "that restaurant serves amazing noodles",
    "the meeting ran long again today",
    "she plays piano every single evening",
]

# Source one: substitution-heavy, like a decoder guessing similar words.
source_one = [
    "the whether was lovely this morning",
    "we should plan an other trip soon",
    "my brother collects vintage radius",
    "that restaurant serves amazing noodle",
    "the meeting ran long again to day",
    "she plays piano every single evening",
]

# Source two: drops and inserts more, shares only some confusions.
source_two = [
    "the whether was lovely morning",
    "we should plan trip soon",
    "my brother he collects vintage radios",
    "that restaurant serves amazing noodle",
    "the meeting ran long long again today",
    "she plays the piano every evening",
]


def profile(hypotheses):
    return error_profile(
        [(normalize(ref), normalize(hyp)) for ref, hyp in zip(references, hypotheses)]
    )


one = profile(source_one)
two = profile(source_two)

for name, prof in (("source one", one), ("source two", two)):
    dist = prof.op_type_distribution
    print(f"{name}: {prof.total_errors} errors -> "
          f"sub {dist['substitute']:.2f} / ins {dist['insert']:.2f} / del {dist['delete']:.2f}")
    print(f"  distinct substitution pairs: {sorted(prof.substitution_pairs)}")

overlap = substitution_overlap(one, two)
print()
print(f"fraction of source-one substitution pairs also seen in source two: {overlap:.2f}")
print("(the same analysis, over dataset variants, runs via: "
      "speechsim evaluate --profile --dataset ... --setting-a ... --setting-b ...)")

"""Dialog histories under different settings, and evaluation examples.

Loads the bundled sample dataset, shows user/system role assignment,
renders the flattened truncated history for several settings, and
builds next-utterance-selection examples with seeded distractors.
"""

import json
import pathlib

from speechsim import (
    GOLD,
    NO_PUNC,
    assign_roles,
    build_examples,
    load_dataset,
    render_history,
    render_inference_history,
)
from speechsim.dialogs import real

here = pathlib.Path(__file__).parent
dialogs = load_dataset(json.loads((here / "data" / "sample_dialogs.json").read_text()))
print(f"loaded {len(dialogs)} dialogs")
dialog = dialogs[0]
print(f"dialog {dialog.conversation_id!r}, {len(dialog.turns)} turns")
print()

print("=== Roles depend on which turn is the target ===")
for target_turn in (4, 5):
    roles = assign_roles(dialog, target_turn)
    speaker = dialog.turns[target_turn - 1].agent
    print(f"target turn {target_turn} (spoken by {speaker}): roles={roles}")
print()

print("=== History rendering ===")
target_turn = 5
history = render_history(dialog, target_turn, GOLD, window=256)
print(f"GOLD history ({len(history)} tokens): {' '.join(history)}")
short = render_history(dialog, target_turn, GOLD, window=12)
print(f"window=12 keeps the suffix:          ...{' '.join(short)}")
inference = render_inference_history(dialog, target_turn, GOLD)
print(f"inference history (last user turn):  {' '.join(inference)}")
nopunc = render_history(dialog, target_turn, NO_PUNC, window=256)
print(f"NO-PUNC tokens match GOLD here (punctuation dies in normalization): "
      f"{nopunc == history}")
print()

print("=== Actual-transcription variants on the user turns ===")
# Target turn 5 makes turns 2 and 4 user turns; both need the variant.
dialog.turns[1].real["A"] = "interesting i always a soon dark roast men more caffeine"
dialog.turns[3].real["A"] = "so my triple express so habit has no excuse good to no"
real_history = render_history(dialog, 5, real("A"), window=256)
print(f"REAL history: {' '.join(real_history)}")
print(f"differs from GOLD: {real_history != history}")
print()

print("=== Examples: 4 seeded foreign distractors + the ground truth ===")
examples = build_examples(dialogs, GOLD, mode="inference", n_candidates=5, seed=11)
print(f"built {len(examples)} examples "
      f"(one per dialog turn >= 2 across {len(dialogs)} dialogs)")
example = examples[2]
print(f"example {example.example_id} bucket={example.sentence_bucket} "
      f"gt_index={example.gt_index}")
for idx, candidate in enumerate(example.candidates):
    marker = "*" if idx == example.gt_index else " "
    print(f"  {marker} [{idx}] {candidate}")

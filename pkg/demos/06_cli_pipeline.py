"""The whole file-based CLI pipeline, driven programmatically.

Everything the library demos did, but through the `speechsim` command
surface and on-disk artifacts: train-sim -> simulate -> make-examples ->
oracle-lm -> evaluate -> report, with a run manifest next to every
output file.
"""

import json
import pathlib
import random
import shutil
import tempfile

from speechsim.cli import main

words = (
    "the a i we you they it this that and but so is was are have has "
    "coffee trains music gardens movies races books friends weather plans"
).split()

workdir = pathlib.Path(tempfile.mkdtemp(prefix="speechsim-demo-"))
print(f"working in {workdir}")


def run(argv):
    print(f"\n$ speechsim {' '.join(argv)}")
    code = main(argv)
    assert code == 0, f"exit code {code}"


# A parallel corpus for simulator training.
rng = random.Random(0)
with open(workdir / "pairs.jsonl", "w") as handle:
    for _ in range(1500):
        ref = [rng.choice(words) for _ in range(rng.randint(6, 12))]
        hyp = [rng.choice(words) if rng.random() < 0.2 else tok for tok in ref]
        handle.write(json.dumps({"ref": " ".join(ref), "hyp": " ".join(hyp)}) + "\n")

# A dialog dataset.
dataset = {}
for d in range(25):
    content = []
    for t in range(6):
        message = " ".join(rng.choice(words) for _ in range(rng.randint(5, 12))) + "."
        content.append({"agent": "T1" if t % 2 == 0 else "T2", "message": message})
    dataset[f"conv-{d:02d}"] = {"content": content}
(workdir / "dataset.json").write_text(json.dumps(dataset, sort_keys=True, indent=1))

run(["train-sim", "--pairs", str(workdir / "pairs.jsonl"), "--order", "3",
     "--out", str(workdir / "model.json")])

run(["simulate", "--model", str(workdir / "model.json"),
     "--dataset", str(workdir / "dataset.json"),
     "--wer", "0.1", "--wer", "0.15", "--wer", "0.2", "--wer", "0.3",
     "--seeds", "5", "--seed", "17", "--out", str(workdir / "augmented.json")])

sidecar = json.loads((workdir / "augmented.json.calibration.json").read_text())
print("calibration summary:")
for entry in sidecar["calibration"]:
    print(f"  target {entry['target_wer']}: scale={entry['scale']:.3f} "
          f"achieved={entry['achieved_calibration_wer']:.4f}")

run(["make-examples", "--dataset", str(workdir / "augmented.json"),
     "--setting", "gold", "--mode", "inference", "--seed", "5",
     "--out", str(workdir / "gold.jsonl")])

for seed_idx in range(5):
    run(["make-examples", "--dataset", str(workdir / "augmented.json"),
         "--setting", "wer-sim", "--wer", "0.3", "--seed-idx", str(seed_idx),
         "--mode", "inference", "--seed", "5",
         "--out", str(workdir / f"sim03-{seed_idx}.jsonl")])

run(["oracle-lm", "train", "--dataset", str(workdir / "dataset.json"),
     "--out", str(workdir / "lm.json")])

run(["oracle-lm", "score", "--model", str(workdir / "lm.json"),
     "--examples", str(workdir / "gold.jsonl"), "--out", str(workdir / "gold-scores.jsonl")])
for seed_idx in range(5):
    run(["oracle-lm", "score", "--model", str(workdir / "lm.json"),
         "--examples", str(workdir / f"sim03-{seed_idx}.jsonl"),
         "--out", str(workdir / f"sim03-scores-{seed_idx}.jsonl")])

run(["evaluate", "--examples", str(workdir / "gold.jsonl"),
     "--scores", str(workdir / "gold-scores.jsonl"),
     "--report", str(workdir / "report-gold.json")])

sim_eval = ["evaluate"]
for seed_idx in range(5):
    sim_eval += ["--examples", str(workdir / f"sim03-{seed_idx}.jsonl")]
    sim_eval += ["--scores", str(workdir / f"sim03-scores-{seed_idx}.jsonl")]
sim_eval += ["--report", str(workdir / "report-sim03.json")]
run(sim_eval)

run(["report",
     "--report", f"GOLD={workdir / 'report-gold.json'}",
     "--report", f"WER-SIM 0.3={workdir / 'report-sim03.json'}"])

manifest = json.loads((workdir / "augmented.json.manifest.json").read_text())
print("\nevery output carries a manifest; the simulate one records:")
print(f"  command: {manifest['command']}, seed: {manifest['seed']}")
print(f"  argv: {' '.join(manifest['argv'][:8])} ...")
print(f"  output digests: {list(manifest['outputs'].values())[0][:16]}...")

shutil.rmtree(workdir)
print("\ncleaned up temporary directory")

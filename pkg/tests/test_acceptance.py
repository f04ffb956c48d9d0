"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines on stdout; the test outcomes themselves carry the same information.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from contextlib import contextmanager

import pytest

import helpers
from test_alignment import brute_min_cost

from speechsim import confusion
from speechsim.alignment import align, corpus_wer, error_profile, substitution_overlap
from speechsim.cli import main
from speechsim.dialogs import (
    GOLD,
    NO_PUNC,
    DialogExample,
    assign_roles,
    build_examples,
    dataset_to_dict,
    merge_simulated,
    render_history,
    wer_sim,
)
from speechsim.metrics import (
    MetricReport,
    ScoreRecord,
    bucketed_report,
    corpus_ppl,
    recall_at_k,
    unigram_f1,
)
from speechsim.oracle_lm import lm_emit_scores, lm_train
from speechsim.seeding import derived_rng
from speechsim.simulate import calibrate, perturb, simulate_corpus, wer_key
from speechsim.text_norm import PUNCTUATION, normalize, strip_punctuation


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:02d} FAIL: {description}")
        raise
    print(f"ACCEPTANCE {number:02d} PASS: {description}")


def write_dataset(path, dialogs):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(dataset_to_dict(dialogs), handle, sort_keys=True, indent=1)


# --- shared expensive fixtures -------------------------------------------------


@pytest.fixture(scope="module")
def calibration_corpus():
    corpus = helpers.flat_corpus(2600, seed=29)
    assert sum(len(u) for u in corpus) >= 10_000
    return corpus


@pytest.fixture(scope="module")
def trend_bundle():
    """Dialogs, simulated variants, and oracle-LM reports per setting."""
    dialogs = helpers.trend_dialogs(150, seed=7)
    pairs = helpers.dialog_parallel_pairs(helpers.trend_dialogs(120, seed=900), seed=901)
    model = confusion.train(pairs, order=3)
    variants, calibrations = simulate_corpus(
        dialogs, model, targets=[0.1, 0.3], n_seeds=1, seed=77
    )
    merge_simulated(dialogs, variants)
    lm = lm_train(
        [[tok for t in d.turns for tok in normalize(t.message)] for d in dialogs],
        order=3,
        alpha=0.1,
    )
    reports = {}
    example_sets = {}
    for label, setting in (
        ("gold", GOLD),
        ("sim-0.1", wer_sim(0.1, 0)),
        ("sim-0.3", wer_sim(0.3, 0)),
    ):
        examples = build_examples(dialogs, setting, mode="inference", seed=55)
        records = lm_emit_scores(lm, examples)
        reports[label] = bucketed_report([examples], [records], k=1)
        example_sets[label] = examples
    return {
        "dialogs": dialogs,
        "calibrations": calibrations,
        "reports": reports,
        "examples": example_sets,
    }


@pytest.fixture(scope="module")
def fuzz_bundle(trained_model):
    dialogs = helpers.fuzz_dialogs(1000, seed=123)
    variants, _ = simulate_corpus(dialogs, trained_model, targets=[0.2], n_seeds=1, seed=5)
    merge_simulated(dialogs, variants)
    window = 24
    examples = {
        "gold": build_examples(dialogs, GOLD, window=window, seed=15),
        "no-punc": build_examples(dialogs, NO_PUNC, window=window, seed=15),
        "wer-sim": build_examples(dialogs, wer_sim(0.2, 0), window=window, seed=15),
    }
    return {"dialogs": dialogs, "examples": examples, "window": window}


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance-cli")
    dialogs = helpers.trend_dialogs(20, seed=61)
    write_dataset(root / "dataset.json", dialogs)
    pairs = helpers.dialog_parallel_pairs(helpers.trend_dialogs(40, seed=62), seed=63)
    model = confusion.train(pairs, order=3)
    (root / "model.json").write_bytes(confusion.save(model))
    return root


# --- criteria ------------------------------------------------------------------


def test_criterion_1_wer_oracle_equivalence():
    with criterion(1, "align/wer match brute-force enumeration on all short pairs"):
        start = time.time()
        alphabet = ["a", "b", "c"]
        seqs = [
            list(combo)
            for length in range(5)
            for combo in itertools.product(alphabet, repeat=length)
        ]
        assert len(seqs) == 121
        mismatches = 0
        for ref in seqs:
            for hyp in seqs:
                path = align(ref, hyp)
                if path.cost != brute_min_cost(ref, hyp):
                    mismatches += 1
                if path.ref_tokens() != ref or path.hyp_tokens() != hyp:
                    mismatches += 1
        elapsed = time.time() - start
        assert mismatches == 0
        assert elapsed < 10.0


def test_criterion_2_calibration_accuracy(trained_model, calibration_corpus):
    with criterion(2, "calibrated corpus WER within +/-0.01 of each standard target"):
        start = time.time()
        for target in (0.1, 0.15, 0.2, 0.3):
            result = calibrate(calibration_corpus, trained_model, target, seed=2024)
            assert result.converged
            pairs = []
            for idx, ref in enumerate(calibration_corpus):
                rng = derived_rng(4096, "gen", wer_key(target), idx)
                pairs.append((ref, perturb(ref, trained_model, result.scale, rng)))
            achieved = corpus_wer(pairs).wer
            assert abs(achieved - target) <= 0.01, f"target {target}: achieved {achieved:.4f}"
        assert time.time() - start < 120.0


def _run_simulate(workspace, out_dir, jobs):
    out = out_dir / "aug.json"
    code = main(
        [
            "simulate",
            "--model", str(workspace / "model.json"),
            "--dataset", str(workspace / "dataset.json"),
            "--wer", "0.1", "--wer", "0.3",
            "--seeds", "2",
            "--seed", "9",
            "--jobs", str(jobs),
            "--out", str(out),
        ]
    )
    assert code == 0
    manifest = json.loads((out_dir / "aug.json.manifest.json").read_text())
    return (
        out.read_bytes(),
        (out_dir / "aug.json.calibration.json").read_bytes(),
        manifest["outputs"],
    )


def _run_make_examples(workspace, dataset, out_dir, jobs):
    out = out_dir / "examples.jsonl"
    code = main(
        [
            "make-examples",
            "--dataset", str(dataset),
            "--setting", "wer-sim",
            "--wer", "0.1",
            "--seed-idx", "1",
            "--mode", "train",
            "--window", "64",
            "--seed", "21",
            "--jobs", str(jobs),
            "--out", str(out),
        ]
    )
    assert code == 0
    manifest = json.loads((out_dir / "examples.jsonl.manifest.json").read_text())
    return out.read_bytes(), manifest["outputs"]


def test_criterion_3_byte_determinism(cli_workspace, tmp_path):
    with criterion(3, "simulate/make-examples byte-identical across reruns and --jobs"):
        runs = {}
        for name, jobs in (("a", 1), ("b", 1), ("c", 8)):
            out_dir = tmp_path / f"sim-{name}"
            out_dir.mkdir()
            runs[name] = _run_simulate(cli_workspace, out_dir, jobs)
        assert runs["a"][0] == runs["b"][0] == runs["c"][0]
        assert runs["a"][1] == runs["b"][1] == runs["c"][1]
        digests = [sorted(d.values()) for _, _, d in runs.values()]
        assert digests[0] == digests[1] == digests[2]

        augmented = tmp_path / "sim-a" / "aug.json"
        example_runs = {}
        for name, jobs in (("a", 1), ("b", 1), ("c", 8)):
            out_dir = tmp_path / f"ex-{name}"
            out_dir.mkdir()
            example_runs[name] = _run_make_examples(cli_workspace, augmented, out_dir, jobs)
        assert example_runs["a"][0] == example_runs["b"][0] == example_runs["c"][0]
        ex_digests = [sorted(d.values()) for _, d in example_runs.values()]
        assert ex_digests[0] == ex_digests[1] == ex_digests[2]


def test_criterion_4_augmentation_grid_shape(cli_workspace, tmp_path):
    with criterion(4, "4 WERs x 1 train seed and 4 x 5 valid/test seeds materialize exactly"):
        wer_flags = []
        for target in ("0.1", "0.15", "0.2", "0.3"):
            wer_flags += ["--wer", target]
        for split, n_seeds, expected_variants in (("train", 1, 4), ("valid", 5, 20)):
            out = tmp_path / f"{split}.json"
            code = main(
                [
                    "simulate",
                    "--model", str(cli_workspace / "model.json"),
                    "--dataset", str(cli_workspace / "dataset.json"),
                    *wer_flags,
                    "--seeds", str(n_seeds),
                    "--seed", "3",
                    "--out", str(out),
                ]
            )
            assert code == 0
            data = json.loads(out.read_text())
            for body in data.values():
                for turn in body["content"]:
                    asr = turn["asr"]
                    assert sorted(asr) == ["0.1", "0.15", "0.2", "0.3"]
                    for seeds in asr.values():
                        assert sorted(seeds) == [str(i) for i in range(n_seeds)]
                    assert sum(len(seeds) for seeds in asr.values()) == expected_variants
            sidecar = json.loads((tmp_path / f"{split}.json.calibration.json").read_text())
            assert len(sidecar["variants"]) == expected_variants
            assert len(sidecar["calibration"]) == 4


def _uniform_random_examples(n_examples, n_candidates=5, seed=97):
    rng = random.Random(seed)
    examples = []
    records = []
    for i in range(n_examples):
        gt = rng.randrange(n_candidates)
        example = DialogExample(
            example_id=f"syn:{i}",
            conversation_id=f"syn-{i}",
            target_turn=2,
            history=["h"],
            target="t",
            candidates=[f"c{j}" for j in range(n_candidates)],
            gt_index=gt,
            setting="gold",
            sentence_bucket="single",
            mode="inference",
            window=None,
        )
        examples.append(example)
        records.append(
            ScoreRecord(
                example_id=example.example_id,
                target_token_logprobs=[-1.0],
                candidate_scores=[rng.random() for _ in range(n_candidates)],
            )
        )
    return examples, records


def test_criterion_5_metric_identities():
    with criterion(5, "PPL/F1/recall identities and the 0.2 +/- 0.02 random-scorer rate"):
        vocab_size = 250
        ppl = corpus_ppl(
            [ScoreRecord("x", [-math.log(vocab_size)] * 7, [0.0] * 5)]
        )
        assert ppl == pytest.approx(vocab_size, rel=1e-9)

        assert unigram_f1("exact match text", "exact match text") == 1.0
        assert unigram_f1("alpha beta gamma", "delta epsilon") == 0.0

        examples, _ = _uniform_random_examples(500, seed=31)
        gt_max = [
            ScoreRecord(
                e.example_id,
                [-1.0],
                [1.0 if i == e.gt_index else 0.0 for i in range(5)],
            )
            for e in examples
        ]
        assert recall_at_k(examples, gt_max, k=1) == 1.0

        examples, records = _uniform_random_examples(10_000, seed=97)
        rate = recall_at_k(examples, records, k=1)
        assert abs(rate - 0.2) <= 0.02


def test_criterion_6_degradation_trend(trend_bundle):
    with criterion(6, "oracle-LM metrics degrade monotonically GOLD -> WER 0.1 -> WER 0.3"):
        for calibration in trend_bundle["calibrations"]:
            assert calibration.converged
        reports = trend_bundle["reports"]
        ppl = [reports[s].cell("ppl", "all").mean for s in ("gold", "sim-0.1", "sim-0.3")]
        f1 = [reports[s].cell("f1", "all").mean for s in ("gold", "sim-0.1", "sim-0.3")]
        recall = [
            reports[s].cell("recall_at_k", "all").mean for s in ("gold", "sim-0.1", "sim-0.3")
        ]
        assert ppl[0] <= ppl[1] <= ppl[2], f"PPL not non-decreasing: {ppl}"
        assert f1[0] >= f1[1] >= f1[2], f"F1 not non-increasing: {f1}"
        assert recall[0] >= recall[1] >= recall[2], f"recall not non-increasing: {recall}"


PROFILE_PAIRS_A = [
    ("the cat sat", "the bat sat"),
    ("a dog ran fast", "a fog ran fast"),
    ("the sun rose early", "the fun rose early"),
    ("my toy broke", "my tie broke"),
    ("that cat sat still", "that bat sat still"),
    ("i like green tea", "i like tea"),
    ("we saw two birds", "we saw birds"),
    ("he reads old books", "he reads books"),
    ("they built a small house", "they built a house"),
    ("she sang a quiet song", "she sang a song"),
    ("we go now", "we go right now"),
    ("come over here", "come right over here"),
    ("it works fine", "it really works fine"),
    ("stay calm please", "stay very calm please"),
    ("good morning friend", "good morning friend"),
    ("see you later", "see you later"),
    ("that sounds right", "that sounds right"),
    ("thanks a lot", "thanks a lot"),
    ("no problem at all", "no problem at all"),
    ("have a nice day", "have a nice day"),
]
# Hand counts for the pairs above: 5 substitutions (4 distinct pairs:
# cat->bat twice, dog->fog, sun->fun, toy->tie), 5 deletions, 4 insertions.
EXPECTED_DISTRIBUTION = {"substitute": 5 / 14, "insert": 4 / 14, "delete": 5 / 14}

# Second profile shares cat->bat and toy->tie out of A's 4 distinct pairs.
PROFILE_PAIRS_B = [
    ("the cat sat", "the bat sat"),
    ("my toy broke", "my tie broke"),
    ("a dog ran fast", "a log ran fast"),
]
EXPECTED_OVERLAP = 0.5


def test_criterion_7_error_profile_analysis(tmp_path, capsys):
    with criterion(7, "error profile and overlap match hand computation; CLI emits them"):
        profile_a = error_profile(
            [(normalize(r), normalize(h)) for r, h in PROFILE_PAIRS_A]
        )
        assert profile_a.substitutions == 5
        assert profile_a.insertions == 4
        assert profile_a.deletions == 5
        assert profile_a.op_type_distribution == EXPECTED_DISTRIBUTION
        assert len(profile_a.substitution_pairs) == 4
        profile_b = error_profile(
            [(normalize(r), normalize(h)) for r, h in PROFILE_PAIRS_B]
        )
        assert substitution_overlap(profile_a, profile_b) == EXPECTED_OVERLAP

        dataset = {}
        refs = [r for r, _ in PROFILE_PAIRS_A]
        hyps = [h for _, h in PROFILE_PAIRS_A]
        for d in range(10):
            content = []
            for t in range(2):
                idx = d * 2 + t
                turn = {
                    "agent": "T1" if t % 2 == 0 else "T2",
                    "message": refs[idx],
                    "asr": {"0.1": {"0": hyps[idx]}},
                }
                content.append(turn)
            dataset[f"p{d}"] = {"content": content}
        # The second profile rides on matching turns as "real" transcriptions.
        dataset["p0"]["content"][0]["real"] = {"A": "the bat sat"}
        dataset["p1"]["content"][1]["real"] = {"A": "my tie broke"}
        dataset["p0"]["content"][1]["real"] = {"A": "a log ran fast"}
        dataset_path = tmp_path / "profile-dataset.json"
        dataset_path.write_text(json.dumps(dataset, sort_keys=True, indent=1))

        report_path = tmp_path / "profile.json"
        code = main(
            [
                "evaluate",
                "--profile",
                "--dataset", str(dataset_path),
                "--setting-a", "wer-sim:0.1:0",
                "--setting-b", "real:A",
                "--report", str(report_path),
            ]
        )
        capsys.readouterr()
        assert code == 0
        payload = json.loads(report_path.read_text())
        emitted = payload["profiles"]["wer-sim:0.1:0"]["op_type_distribution"]
        assert emitted == EXPECTED_DISTRIBUTION
        assert payload["substitution_overlap"]["fraction_of_a_in_b"] == EXPECTED_OVERLAP


def test_criterion_8_structural_invariants_fuzz(fuzz_bundle):
    with criterion(8, "structural invariants hold over 1,000 random dialogs"):
        dialogs = fuzz_bundle["dialogs"]
        window = fuzz_bundle["window"]
        assert len(dialogs) == 1000

        by_id = {d.conversation_id: d for d in dialogs}
        owners: dict[str, set[str]] = {}
        for dialog in dialogs:
            for turn in dialog.turns:
                owners.setdefault(turn.message, set()).add(dialog.conversation_id)

        for dialog in dialogs:
            for target_turn in range(2, len(dialog.turns) + 1):
                roles = assign_roles(dialog, target_turn)
                assert all(a != b for a, b in zip(roles, roles[1:]))
                assert roles[-1] == "system"

        gold = fuzz_bundle["examples"]["gold"]
        nopunc = fuzz_bundle["examples"]["no-punc"]
        wersim = fuzz_bundle["examples"]["wer-sim"]
        assert len(gold) == len(nopunc) == len(wersim)
        assert len(gold) == sum(len(d.turns) - 1 for d in dialogs)

        for example_set in (gold, nopunc, wersim):
            for example in example_set:
                dialog = by_id[example.conversation_id]
                assert len(example.history) <= window
                assert len(example.candidates) == 5
                assert example.candidates[example.gt_index] == example.target
                assert example.candidates.count(example.target) == 1
                for idx, candidate in enumerate(example.candidates):
                    if idx != example.gt_index:
                        # The text must exist in at least one other dialog;
                        # identity-level foreignness is enforced at sampling.
                        assert owners[candidate] - {example.conversation_id}

        for example in gold:
            dialog = by_id[example.conversation_id]
            full = render_history(dialog, example.target_turn, GOLD, window=10_000)
            assert example.history == full[len(full) - min(len(full), window):]

        # System turns contribute identical tokens in every setting: decompose
        # each rendered history into per-turn segments, confirm the segments
        # rebuild the history, and pin the system segments to the gold ones.
        for g, np_, ws in zip(gold, nopunc, wersim):
            dialog = by_id[g.conversation_id]
            roles = assign_roles(dialog, g.target_turn)
            history_turns = dialog.turns[: g.target_turn - 1]
            gold_segments = [normalize(turn.message) for turn in history_turns]
            for setting, example in ((NO_PUNC, np_), (wer_sim(0.2, 0), ws)):
                segments = [
                    normalize(turn.variant_text(setting) if role == "user" else turn.message)
                    for turn, role in zip(history_turns, roles)
                ]
                flat = [tok for seg in segments for tok in seg]
                assert example.history == flat[-window:]
                for segment, gold_segment, role in zip(segments, gold_segments, roles):
                    if role == "system":
                        assert segment == gold_segment


def test_criterion_9_round_trips(trained_model, trend_bundle):
    with criterion(9, "model save/load and report JSON round-trips are lossless"):
        assert confusion.load(confusion.save(trained_model)) == trained_model
        report = trend_bundle["reports"]["gold"]
        json_text = json.dumps(report.to_dict(), sort_keys=True)
        assert MetricReport.from_dict(json.loads(json_text)) == report


def test_criterion_10_no_punc_properties(fuzz_bundle, trend_bundle):
    with criterion(10, "NO-PUNC idempotent/punctuation-free; buckets partition examples"):
        for dialog in fuzz_bundle["dialogs"]:
            for turn in dialog.turns:
                stripped = turn.variant_text(NO_PUNC)
                assert strip_punctuation(stripped) == stripped
                for i, ch in enumerate(stripped):
                    if ch in PUNCTUATION:
                        assert ch in "'-"
                        assert stripped[i - 1].isalnum() and stripped[i + 1].isalnum()
        for example_set in list(fuzz_bundle["examples"].values()) + list(
            trend_bundle["examples"].values()
        ):
            single = [e for e in example_set if e.sentence_bucket == "single"]
            multi = [e for e in example_set if e.sentence_bucket == "multi"]
            assert len(single) + len(multi) == len(example_set)
            assert not {e.example_id for e in single} & {e.example_id for e in multi}

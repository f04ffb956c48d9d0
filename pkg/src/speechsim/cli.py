"""Command-line entry point wiring the modules into one pipeline.

Typical flow: ``train-sim`` fits a confusion model from parallel text,
``simulate`` augments a dataset with hypotheses at calibrated WERs,
``make-examples`` renders evaluation examples per setting, ``oracle-lm``
trains and scores the built-in reference scorer, ``evaluate`` aggregates
scores into a metric report, and ``report`` renders reports side by
side. Configuration is flags-only; all randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import confusion, dialogs, metrics, oracle_lm, simulate
from .alignment import corpus_wer, error_profile, realign_transcript, substitution_overlap
from .errors import MalformedInput, SpeechsimError
from .manifest import RunManifest, write_manifest
from .metrics import MetricReport
from .text_norm import normalize, strip_punctuation


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=1)
        handle.write("\n")


def _read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read().splitlines()


def _manifest(args, command: str, seed: int | None = None) -> RunManifest:
    return RunManifest(
        command=command,
        argv=list(args.raw_argv),
        tool_version=__version__,
        seed=seed,
    )


def _cmd_wer(args) -> int:
    ref_lines = _read_lines(args.ref)
    hyp_lines = _read_lines(args.hyp)
    if len(ref_lines) != len(hyp_lines):
        raise MalformedInput(
            f"line count mismatch: {len(ref_lines)} references vs {len(hyp_lines)} hypotheses"
        )
    pairs = [(normalize(r), normalize(h)) for r, h in zip(ref_lines, hyp_lines)]
    report = corpus_wer(pairs)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=1))
    return 0


def _cmd_align_transcript(args) -> int:
    dataset = dialogs.read_dataset(args.dataset)
    if args.conversation is None:
        if len(dataset) != 1:
            raise MalformedInput(
                "dataset holds multiple dialogs; pass --conversation to pick one"
            )
        dialog = dataset[0]
    else:
        by_id = {d.conversation_id: d for d in dataset}
        if args.conversation not in by_id:
            raise MalformedInput(f"no dialog {args.conversation!r} in {args.dataset}")
        dialog = by_id[args.conversation]
    transcript = normalize(Path(args.transcript).read_text(encoding="utf-8"))
    hyps, review = realign_transcript(dialog, transcript, review_threshold=args.threshold)
    payload = {
        "conversation_id": dialog.conversation_id,
        "turns": [
            {"turn_index": i + 1, "hypothesis": " ".join(hyp)} for i, hyp in enumerate(hyps)
        ],
        "review": review.to_dict(),
    }
    _write_json(args.out, payload)
    manifest = _manifest(args, "align-transcript")
    manifest.add_input(args.dataset)
    manifest.add_input(args.transcript)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _cmd_train_sim(args) -> int:
    pairs = []
    with open(args.pairs, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pairs.append((normalize(record["ref"]), normalize(record["hyp"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedInput(f"{args.pairs}:{line_no}: {exc}") from exc
    model = confusion.train(pairs, order=args.order)
    Path(args.out).write_bytes(confusion.save(model))
    manifest = _manifest(args, "train-sim")
    manifest.add_input(args.pairs)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _cmd_simulate(args, parser) -> int:
    for target in args.wer:
        if not 0.0 < target < 1.0:
            parser.error(f"--wer must lie in (0, 1), got {target}")
    if args.seeds < 1:
        parser.error("--seeds must be at least 1")
    model = confusion.load(Path(args.model).read_bytes())
    dataset = dialogs.read_dataset(args.dataset)
    variants, calibrations = simulate.simulate_corpus(
        dataset,
        model,
        targets=args.wer,
        n_seeds=args.seeds,
        seed=args.seed,
        calibration_tolerance=args.calibration_tolerance,
        max_calibration_iters=args.max_calibration_iters,
        jobs=args.jobs,
    )
    dialogs.merge_simulated(dataset, variants)
    _write_json(args.out, dialogs.dataset_to_dict(dataset))
    calibration_payload = [c.to_dict() for c in calibrations]
    sidecar = {
        "calibration": calibration_payload,
        "variants": [
            {
                "target_wer": v.target_wer,
                "seed_index": v.seed_index,
                "scale": v.config.scale,
                "achieved": v.achieved.to_dict(),
                "out_of_tolerance": v.out_of_tolerance,
            }
            for v in variants
        ],
    }
    sidecar_path = f"{args.out}.calibration.json"
    _write_json(sidecar_path, sidecar)
    manifest = _manifest(args, "simulate", seed=args.seed)
    manifest.add_input(args.model)
    manifest.add_input(args.dataset)
    manifest.add_output(args.out)
    manifest.add_output(sidecar_path)
    manifest.calibration = calibration_payload
    write_manifest(args.out, manifest)
    return 0


def _cmd_nopunc(args) -> int:
    lines = _read_lines(args.input)
    with open(args.out, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(strip_punctuation(line) + "\n")
    manifest = _manifest(args, "nopunc")
    manifest.add_input(args.input)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _parse_setting_or_usage(text: str, parser) -> dialogs.Setting:
    try:
        return dialogs.parse_setting(text)
    except ValueError as exc:
        parser.error(str(exc))


def _resolve_setting(args, parser) -> dialogs.Setting:
    text = args.setting
    if ":" in text:
        return _parse_setting_or_usage(text, parser)
    kind = text.lower().replace("_", "-")
    if kind == "nopunc":
        kind = "no-punc"
    if kind == "wer-sim":
        if args.wer_value is None or args.seed_idx is None:
            parser.error("--setting wer-sim requires --wer and --seed-idx")
        return dialogs.wer_sim(args.wer_value, args.seed_idx)
    if kind == "real":
        return dialogs.real(args.system)
    return _parse_setting_or_usage(kind, parser)


def _cmd_make_examples(args, parser) -> int:
    setting = _resolve_setting(args, parser)
    dataset = dialogs.read_dataset(args.dataset)
    examples = dialogs.build_examples(
        dataset,
        setting,
        mode=args.mode,
        window=args.window,
        n_candidates=args.n_candidates,
        seed=args.seed,
        jobs=args.jobs,
    )
    metrics.write_examples(args.out, examples)
    manifest = _manifest(args, "make-examples", seed=args.seed)
    manifest.add_input(args.dataset)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _cmd_oracle_train(args) -> int:
    dataset = dialogs.read_dataset(args.dataset)
    corpus = [
        [token for turn in dialog.turns for token in normalize(turn.message)]
        for dialog in dataset
    ]
    model = oracle_lm.lm_train(corpus, order=args.order, alpha=args.alpha)
    Path(args.out).write_bytes(oracle_lm.save_lm(model))
    manifest = _manifest(args, "oracle-lm train")
    manifest.add_input(args.dataset)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _cmd_oracle_score(args) -> int:
    model = oracle_lm.load_lm(Path(args.model).read_bytes())
    examples = metrics.read_examples(args.examples)
    records = oracle_lm.lm_emit_scores(model, examples)
    metrics.write_scores(args.out, records)
    manifest = _manifest(args, "oracle-lm score")
    manifest.add_input(args.model)
    manifest.add_input(args.examples)
    manifest.add_output(args.out)
    write_manifest(args.out, manifest)
    return 0


def _cmd_evaluate(args, parser) -> int:
    if args.profile:
        return _cmd_evaluate_profile(args, parser)
    if not args.examples or not args.scores:
        parser.error("evaluate requires --examples and --scores")
    example_sets = [metrics.read_examples(p) for p in args.examples]
    record_sets = [metrics.read_scores(p) for p in args.scores]
    report = metrics.bucketed_report(example_sets, record_sets, k=args.k)
    _write_json(args.report, report.to_dict())
    manifest = _manifest(args, "evaluate")
    for path in args.examples + args.scores:
        manifest.add_input(path)
    manifest.add_output(args.report)
    write_manifest(args.report, manifest)
    print(render_reports({"(this run)": report}))
    return 0


def _profile_pairs(dataset, setting: dialogs.Setting):
    pairs = []
    for dialog in dataset:
        for turn in dialog.turns:
            try:
                variant = turn.variant_text(setting)
            except SpeechsimError:
                continue
            pairs.append((normalize(turn.message), normalize(variant)))
    if not pairs:
        raise MalformedInput(f"no turn carries the {setting.key()!r} variant")
    return pairs


def _cmd_evaluate_profile(args, parser) -> int:
    if not args.dataset or not args.setting_a:
        parser.error("evaluate --profile requires --dataset and --setting-a")
    dataset = dialogs.read_dataset(args.dataset)
    setting_a = _parse_setting_or_usage(args.setting_a, parser)
    profile_a = error_profile(_profile_pairs(dataset, setting_a))
    payload = {"profiles": {setting_a.key(): profile_a.to_dict()}}
    if args.setting_b:
        setting_b = _parse_setting_or_usage(args.setting_b, parser)
        profile_b = error_profile(_profile_pairs(dataset, setting_b))
        payload["profiles"][setting_b.key()] = profile_b.to_dict()
        payload["substitution_overlap"] = {
            "fraction_of_a_in_b": substitution_overlap(profile_a, profile_b),
            "a": setting_a.key(),
            "b": setting_b.key(),
        }
    _write_json(args.report, payload)
    manifest = _manifest(args, "evaluate --profile")
    manifest.add_input(args.dataset)
    manifest.add_output(args.report)
    write_manifest(args.report, manifest)
    print(json.dumps(payload, sort_keys=True, indent=1))
    return 0


def _format_cell(cell: metrics.MetricCell, multi_seed: bool) -> str:
    if cell.mean is None:
        return "-"
    if multi_seed:
        return f"{cell.mean:.4f} ({cell.stddev:.4f})"
    return f"{cell.mean:.4f}"


def render_reports(reports: dict[str, MetricReport]) -> str:
    """Plain-text table: one row per metric and bucket, one column per setting."""
    labels = list(reports)
    first = next(iter(reports.values()))
    metric_names = {
        "ppl": "PPL",
        "f1": "F1",
        "recall_at_k": f"R_{first.n_candidates}@{first.k}",
    }
    rows: list[list[str]] = [["Metric", "Version", *labels]]
    for metric in metrics.METRICS:
        for bucket in metrics.BUCKETS:
            row = [metric_names[metric], bucket]
            for label in labels:
                report = reports[label]
                row.append(_format_cell(report.cell(metric, bucket), report.n_seeds > 1))
            rows.append(row)
    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)


def _cmd_report(args) -> int:
    reports: dict[str, MetricReport] = {}
    for item in args.report:
        label, _, path = item.rpartition("=")
        if not label:
            label = Path(path).stem
        with open(path, "r", encoding="utf-8") as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"cannot parse report {path}: {exc}") from exc
        reports[label] = MetricReport.from_dict(data)
    if args.json:
        print(
            json.dumps(
                {label: report.to_dict() for label, report in reports.items()},
                sort_keys=True,
                indent=1,
            )
        )
    else:
        print(render_reports(reports))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechsim",
        description="Simulate ASR errors in dialog corpora and evaluate robustness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wer", help="corpus WER between two line-aligned text files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.set_defaults(func=_cmd_wer)

    p = sub.add_parser("align-transcript", help="cut a dialog transcript into per-turn hypotheses")
    p.add_argument("--dataset", required=True)
    p.add_argument("--conversation")
    p.add_argument("--transcript", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_align_transcript)

    p = sub.add_parser("train-sim", help="train a confusion model from ref/hyp JSON lines")
    p.add_argument("--pairs", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_sim)

    p = sub.add_parser("simulate", help="augment a dataset with simulated hypotheses")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--wer", action="append", type=float, required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--calibration-tolerance", type=float, default=0.005)
    p.add_argument("--max-calibration-iters", type=int, default=40)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda args, _p=p: _cmd_simulate(args, _p))

    p = sub.add_parser("nopunc", help="strip punctuation from a text file, line by line")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_nopunc)

    p = sub.add_parser("make-examples", help="render evaluation examples for one setting")
    p.add_argument("--dataset", required=True)
    p.add_argument("--setting", required=True, help="gold | no-punc | wer-sim | real (or a full key)")
    p.add_argument("--wer", dest="wer_value", type=float)
    p.add_argument("--seed-idx", type=int)
    p.add_argument("--system", default="A")
    p.add_argument("--mode", choices=("train", "inference"), default="train")
    p.add_argument("--window", type=int, default=dialogs.DEFAULT_WINDOW)
    p.add_argument("--n-candidates", type=int, default=dialogs.DEFAULT_CANDIDATES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda args, _p=p: _cmd_make_examples(args, _p))

    p = sub.add_parser("oracle-lm", help="train or score with the built-in n-gram scorer")
    oracle_sub = p.add_subparsers(dest="oracle_command", required=True)
    p_train = oracle_sub.add_parser("train")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument("--order", type=int, default=3)
    p_train.add_argument("--alpha", type=float, default=0.1)
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(func=_cmd_oracle_train)
    p_score = oracle_sub.add_parser("score")
    p_score.add_argument("--model", required=True)
    p_score.add_argument("--examples", required=True)
    p_score.add_argument("--out", required=True)
    p_score.set_defaults(func=_cmd_oracle_score)

    p = sub.add_parser("evaluate", help="aggregate scores into a metric report")
    p.add_argument("--examples", action="append", default=[])
    p.add_argument("--scores", action="append", default=[])
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--report", required=True)
    p.add_argument("--profile", action="store_true", help="emit an error-profile report instead")
    p.add_argument("--dataset")
    p.add_argument("--setting-a")
    p.add_argument("--setting-b")
    p.set_defaults(func=lambda args, _p=p: _cmd_evaluate(args, _p))

    p = sub.add_parser("report", help="render one or more metric reports as a table")
    p.add_argument("--report", action="append", required=True, help="label=path or path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(raw_argv)
    args.raw_argv = raw_argv
    try:
        return args.func(args)
    except SpeechsimError as err:
        print(json.dumps({"error": err.kind, "detail": str(err)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Speech-robustness tooling for written-text dialog corpora.

Simulates ASR errors at calibrated corpus-level WER, renders dialog
histories under clean and error-distorted settings, and aggregates model
scores into perplexity, unigram F1, and recall-at-k reports.
"""

__version__ = "0.1.0"

from .alignment import (
    AlignmentPath,
    AlignOp,
    ErrorProfile,
    OpKind,
    WerReport,
    align,
    corpus_wer,
    error_profile,
    realign_transcript,
    substitution_overlap,
    wer,
)
from .confusion import ConfusionModel, ConfusionSegment, replay_segments, segment_pair, train
from .dialogs import (
    GOLD,
    NO_PUNC,
    Dialog,
    DialogExample,
    Setting,
    Turn,
    assign_roles,
    build_examples,
    load_dataset,
    parse_setting,
    read_dataset,
    render_history,
    render_inference_history,
    sentence_bucket,
)
from .metrics import (
    MetricCell,
    MetricReport,
    ScoreRecord,
    bucketed_report,
    corpus_ppl,
    recall_at_k,
    unigram_f1,
)
from .oracle_lm import NgramLm, lm_emit_scores, lm_score, lm_train
from .seeding import stable_mix
from .simulate import (
    CalibrationResult,
    SimulatedCorpus,
    SimulationConfig,
    calibrate,
    perturb,
    simulate_corpus,
)
from .text_norm import SentenceSplit, normalize, split_sentences, strip_punctuation

__all__ = [
    "__version__",
    "AlignOp",
    "AlignmentPath",
    "CalibrationResult",
    "ConfusionModel",
    "ConfusionSegment",
    "Dialog",
    "DialogExample",
    "ErrorProfile",
    "GOLD",
    "MetricCell",
    "MetricReport",
    "NO_PUNC",
    "NgramLm",
    "OpKind",
    "ScoreRecord",
    "SentenceSplit",
    "Setting",
    "SimulatedCorpus",
    "SimulationConfig",
    "Turn",
    "WerReport",
    "align",
    "assign_roles",
    "bucketed_report",
    "build_examples",
    "calibrate",
    "corpus_ppl",
    "corpus_wer",
    "error_profile",
    "lm_emit_scores",
    "lm_score",
    "lm_train",
    "load_dataset",
    "normalize",
    "parse_setting",
    "perturb",
    "read_dataset",
    "realign_transcript",
    "recall_at_k",
    "render_history",
    "replay_segments",
    "render_inference_history",
    "sentence_bucket",
    "segment_pair",
    "simulate_corpus",
    "split_sentences",
    "stable_mix",
    "strip_punctuation",
    "substitution_overlap",
    "train",
    "unigram_f1",
    "wer",
]

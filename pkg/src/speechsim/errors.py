"""Exception types shared across the toolkit.

Every error the CLI reports in its structured form subclasses
:class:`SpeechsimError`; the class name doubles as the machine-readable
error kind.
"""

from __future__ import annotations


class SpeechsimError(Exception):
    """Base class for all toolkit errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class EmptyReference(SpeechsimError):
    """WER requested against a reference with zero tokens."""


class NoSubstitutions(SpeechsimError):
    """Substitution overlap requested for a profile without substitutions."""


class EmptyCorpus(SpeechsimError):
    """Training requested on an empty corpus."""


class VersionMismatch(SpeechsimError):
    """Serialized artifact carries a format version this build does not support."""


class MalformedInput(SpeechsimError):
    """Serialized artifact or input file cannot be parsed."""


class UnreachableTarget(SpeechsimError):
    """Calibration target WER exceeds what the confusion model can produce."""


class MonotonicityViolation(SpeechsimError):
    """Calibration measurements decreased with increasing scale; bisection aborted."""


class MissingVariant(SpeechsimError):
    """A user turn lacks the text variant required by the requested setting."""


class InvalidTurnIndex(SpeechsimError):
    """Target turn index outside the valid range for the dialog."""


class InvalidDialog(SpeechsimError):
    """Dialog violates structural invariants (alternation, turn count)."""


class InsufficientDistractorPool(SpeechsimError):
    """Split has too few foreign turns to sample the requested distractors."""


class MissingScores(SpeechsimError):
    """An example has no matching score record."""


class ArityMismatch(SpeechsimError):
    """Candidate count in a score record disagrees with the example."""


class EmptyInput(SpeechsimError):
    """Metric aggregation requested over zero records or zero tokens."""

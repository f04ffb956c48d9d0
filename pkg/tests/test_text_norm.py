from __future__ import annotations

import string

from hypothesis import given, strategies as st

from speechsim.text_norm import PUNCTUATION, normalize, split_sentences, strip_punctuation

text_strategy = st.text(
    alphabet=string.ascii_letters + string.digits + string.punctuation + " \t\nàéü'",
    max_size=80,
)


def test_normalize_strips_punctuation_and_lowercases():
    assert normalize("Hello, world!") == ["hello", "world"]


def test_normalize_empty():
    assert normalize("") == []


def test_normalize_plain_sentence():
    assert normalize("that is a ton of money") == ["that", "is", "a", "ton", "of", "money"]


def test_normalize_keeps_contractions_and_compounds():
    assert normalize("It's an open-domain system.") == ["it's", "an", "open-domain", "system"]


def test_normalize_dollar_amount():
    assert normalize("$110 million, that is") == ["110", "million", "that", "is"]


def test_strip_punctuation_comma():
    assert (
        strip_punctuation("That is insane, but I heard that")
        == "That is insane but I heard that"
    )


def test_strip_punctuation_fixed_point():
    assert strip_punctuation("no punct here") == "no punct here"


def test_strip_punctuation_only_punctuation():
    assert strip_punctuation("?!.") == ""


def test_strip_punctuation_collapses_whitespace():
    assert strip_punctuation("a ,  b !   c") == "a b c"


def test_split_single_sentence():
    assert split_sentences("yes").count == 1


def test_split_two_sentences():
    assert split_sentences("I agree. Do you?").count == 2


def test_split_maximal_terminator_run():
    result = split_sentences("Wow!!! Really?")
    assert result.count == 2
    assert result.sentences == ("Wow!!!", " Really?")


def test_split_terminator_without_space_does_not_split():
    assert split_sentences("a.b").count == 1


def test_split_trailing_whitespace_folds_into_last_span():
    result = split_sentences("Done.  ")
    assert result.count == 1
    assert "".join(result.sentences) == "Done.  "


def test_split_empty_text_counts_one():
    assert split_sentences("").count == 1


@given(text_strategy)
def test_normalize_idempotent_on_rendered_output(text):
    tokens = normalize(text)
    assert normalize(" ".join(tokens)) == tokens


@given(text_strategy)
def test_strip_punctuation_idempotent(text):
    once = strip_punctuation(text)
    assert strip_punctuation(once) == once


@given(text_strategy)
def test_strip_punctuation_leaves_only_word_internal_marks(text):
    out = strip_punctuation(text)
    for i, ch in enumerate(out):
        if ch in PUNCTUATION:
            assert ch in "'-"
            assert out[i - 1].isalnum() and out[i + 1].isalnum()


@given(text_strategy)
def test_normalize_agrees_with_prestripped_text(text):
    assert normalize(strip_punctuation(text)) == normalize(text)


@given(text_strategy)
def test_normalize_tokens_are_clean(text):
    for token in normalize(text):
        assert token
        assert token == token.lower()
        assert not any(ch.isspace() for ch in token)
        assert any(ch not in PUNCTUATION for ch in token)


@given(text_strategy)
def test_split_reconstructs_source(text):
    result = split_sentences(text)
    assert "".join(result.sentences) == text
    assert result.count == len(result.sentences) >= 1


@given(st.text(alphabet=string.ascii_letters + " ,;:", max_size=60))
def test_split_without_terminators_is_single(text):
    assert split_sentences(text).count == 1

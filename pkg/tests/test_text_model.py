import json

import numpy as np
import pytest

from conftest import FIXTURES
from memory.errors import InvalidToken
from memory.text_model import (
    END_OF_KEY,
    UNKNOWN,
    Vocabulary,
    normalize_text,
    split_words,
)


def _hand_tokenized_cases():
    cases = []
    for line in (FIXTURES / "hand_tokenized.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or not line:
            continue
        text, expected = line.split("\t", 1)
        cases.append((text, expected.split()))
    return cases


@pytest.mark.parametrize("text,expected", _hand_tokenized_cases())
def test_split_words_matches_hand_tokenized_fixture(text, expected):
    assert split_words(text) == expected


def test_reserved_ids_come_first():
    vocab = Vocabulary()
    assert vocab.token(END_OF_KEY) == "<eok>"
    assert vocab.token(UNKNOWN) == "<unk>"
    assert vocab.intern("garden") == 2
    assert list(vocab.word_ids()) == [2]


def test_tokenize_is_deterministic_and_interns_once():
    vocab = Vocabulary()
    first = vocab.tokenize("The garden, the GARDEN!")
    assert first == (2, 3, 2, 3)
    assert vocab.tokenize("garden the") == (3, 2)
    assert len(vocab) == 4


def test_detokenize_strips_end_of_key():
    vocab = Vocabulary()
    seq = vocab.tokenize("vegetable garden")
    assert vocab.detokenize(seq + (END_OF_KEY,)) == "vegetable garden"
    assert vocab.detokenize(vocab.tokenize("Vegetable  Garden")) == normalize_text("Vegetable  Garden")


def test_detokenize_rejects_reserved_ids_inside_a_sequence():
    vocab = Vocabulary()
    seq = vocab.tokenize("a b")
    with pytest.raises(InvalidToken):
        vocab.detokenize((seq[0], UNKNOWN, seq[1]))
    with pytest.raises(InvalidToken):
        vocab.detokenize((END_OF_KEY, seq[0]))


def test_unknown_token_id_raises():
    vocab = Vocabulary()
    with pytest.raises(InvalidToken):
        vocab.token(99)
    with pytest.raises(InvalidToken):
        vocab.token("garden")


def test_permissive_pattern_never_yields_reserved_ids():
    vocab = Vocabulary(word_pattern=r"\S+")
    assert vocab.tokenize("jazz <eok> <UNK> c++") == (2, 3)
    assert vocab.detokenize((2, 3)) == "jazz c++"
    assert "<eok>" not in split_words("<eok> garden", r"\S+")


@pytest.mark.parametrize("word", ["<eok>", "<unk>"])
def test_reserved_strings_cannot_be_interned(word):
    vocab = Vocabulary()
    with pytest.raises(InvalidToken):
        vocab.intern(word)
    assert len(vocab) == 2


def test_empty_text_tokenizes_to_nothing():
    vocab = Vocabulary()
    assert vocab.tokenize("") == ()
    assert vocab.tokenize("?!...") == ()
    assert split_words(None) == []


def test_vocabulary_list_round_trip():
    vocab = Vocabulary()
    vocab.tokenize("one two three")
    restored = Vocabulary.from_list(vocab.to_list())
    assert restored.to_list() == vocab.to_list()
    assert restored.lookup("three") == vocab.lookup("three")


@pytest.mark.parametrize("tokens", [["garden"], ["<eok>", "<unk>", "a", "a"], ["<unk>", "<eok>"]])
def test_vocabulary_from_list_rejects_bad_layouts(tokens):
    with pytest.raises(InvalidToken):
        Vocabulary.from_list(tokens)


def _fixture_corpus():
    texts = [text for text, _ in _hand_tokenized_cases()]
    for line in (FIXTURES / "garden_jazz.jsonl").read_text(encoding="utf-8").splitlines():
        if line.strip():
            texts.append(json.loads(line)["text"])
    return texts


def _check_round_trip(vocab, text):
    seq = vocab.tokenize(text)
    again = vocab.tokenize(vocab.detokenize(seq))
    assert again == seq
    assert vocab.detokenize(again) == vocab.detokenize(seq) == normalize_text(text)


def test_round_trip_is_idempotent_over_fixture_corpus():
    vocab = Vocabulary()
    for text in _fixture_corpus():
        _check_round_trip(vocab, text)


def test_round_trip_is_idempotent_over_random_text():
    rng = np.random.default_rng(17)
    alphabet = list("abcXYZ019 _-.,!?'\t\néßüЖж漢字") + ["<eok>", "<unk>"]
    vocab = Vocabulary()
    for _ in range(2000):
        text = "".join(rng.choice(alphabet, size=int(rng.integers(0, 30))))
        _check_round_trip(vocab, text)

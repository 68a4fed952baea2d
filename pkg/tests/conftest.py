import zlib
from pathlib import Path

import numpy as np
import pytest

from memory.language_model import LanguageModelInterface, TableLM
from memory.schema_trie import CognitiveSchema
from memory.state import EngineState
from memory.text_model import Vocabulary

FIXTURES = Path(__file__).parent / "fixtures"


class SeededLM(LanguageModelInterface):
    """Pseudo-random distributions keyed by (seed, context, prefix).

    With `favor_unknown` most of the mass sits on UNKNOWN and on ids that are
    not schema words, the adversarial case for the constrained decoder.
    """

    thread_safe = True

    def __init__(self, vocab, seed=0, favor=(), spike=8.0, sparsity=0.0):
        super().__init__(vocab)
        self.seed = seed
        self.favor = tuple(favor)
        self.spike = spike
        self.sparsity = sparsity

    def next_logprobs(self, context, prefix):
        key = f"{self.seed}|{context}|{','.join(map(str, prefix))}".encode("utf-8")
        rng = np.random.default_rng(zlib.crc32(key))
        logits = rng.normal(size=len(self.vocab))
        for token_id in self.favor:
            if token_id < len(self.vocab):
                logits[token_id] += self.spike
        if self.sparsity:
            logits[rng.random(len(self.vocab)) < self.sparsity] = -np.inf
        if np.isneginf(logits).all():
            return logits
        top = logits[np.isfinite(logits)].max()
        with np.errstate(divide="ignore"):
            return logits - top - np.log(np.exp(logits - top).sum())


def make_vocab(words):
    vocab = Vocabulary()
    for word in words:
        vocab.intern(word)
    return vocab


def build_state(keys, turn_concepts, session_id="s1", speaker="user"):
    """State with single- or multi-word `keys` as concepts 0..n-1 and one turn per concept set."""
    vocab = Vocabulary()
    schema = CognitiveSchema()
    for key in keys:
        schema.insert_key(vocab.tokenize(key))
    state = EngineState(vocab, schema)
    for concepts in turn_concepts:
        text = "talked about " + " and ".join(keys[c] for c in sorted(concepts))
        turn_id = state.store.add_turn(session_id, speaker, text)
        state.graph.record_turn(concepts)
        for concept in concepts:
            state.store.link(concept, turn_id)
    return state


def table_lm(vocab, entries, default="uniform", answers=()):
    """TableLM from (context pattern, probs) pairs at the empty prefix."""
    document = {
        "version": 1,
        "default": default,
        "entry": [{"context": pattern, "probs": probs} for pattern, probs in entries],
        "answer": [{"query": query, "text": text} for query, text in answers],
    }
    return TableLM.from_mapping(vocab, document)


HIKING_KEYS = ["hiking", "mountains", "boots", "camera", "photography", "lake", "sunrise", "coffee"]
HIKING_TURNS = [{0, 1}, {0, 2}, {1, 5}, {3, 4}, {4, 6}, {0, 1, 6}, {7}, {5, 6}, {0, 7}, {3}]


@pytest.fixture
def hiking_state():
    return build_state(HIKING_KEYS, HIKING_TURNS)


@pytest.fixture
def hiking_lm(hiking_state):
    return table_lm(hiking_state.vocab, [
        ("*hiking*", {"hiking": 0.7, "mountains": 0.2, "coffee": 0.1}),
        ("*trail*", {"trail": 0.8, "hiking": 0.2}),
    ])


@pytest.fixture
def garden_jazz_records():
    from memory.data_loader import load_transcript
    return load_transcript(FIXTURES / "garden_jazz.jsonl")


@pytest.fixture
def garden_jazz_lm():
    vocab = Vocabulary()
    return TableLM.from_file(vocab, FIXTURES / "garden_jazz_lm.toml")

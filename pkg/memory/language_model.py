# memory/language_model.py
"""Next-token log-probability sources.

Real LLM adapters and the deterministic mock models share one interface:
`next_logprobs(context, prefix)` returns a numpy vector indexed by TokenId over
the whole current vocabulary, reserved ids included.
"""
import fnmatch
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import toml

from memory import get_logger
from memory.errors import LanguageModelError
from memory.text_model import (
    END_OF_KEY,
    END_OF_KEY_TOKEN,
    UNKNOWN,
    UNKNOWN_TOKEN,
    normalize_text,
    split_words,
)

logger = get_logger(__name__)

TABLE_FORMAT_VERSION = 1

TABLE_SCHEMA = {
    "type": "object",
    "required": ["version"],
    "properties": {
        "version": {"type": "integer"},
        "default": {"enum": ["uniform", "none"]},
        "entry": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["probs"],
                "properties": {
                    "context": {"type": "string"},
                    "prefix": {"type": "string"},
                    "probs": {
                        "type": "object",
                        "additionalProperties": {"type": "number", "minimum": 0},
                    },
                },
                "additionalProperties": False,
            },
        },
        "answer": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["query", "text"],
                "properties": {"query": {"type": "string"}, "text": {"type": "string"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def normalize_pattern(pattern):
    """Normalize the literal words of a glob pattern the way contexts are normalized."""
    parts = []
    for part in str(pattern).split():
        if "*" in part or "?" in part:
            parts.append(part.lower())
        else:
            parts.extend(split_words(part))
    return " ".join(parts) or "*"


class LanguageModelInterface(ABC):
    """Abstract next-token distribution over the engine vocabulary."""

    # implementations declare whether concurrent calls are safe
    thread_safe = False

    def __init__(self, vocab):
        self.vocab = vocab

    @abstractmethod
    def next_logprobs(self, context, prefix):
        """Log-probabilities for every TokenId given the context and key prefix."""

    def synthesize(self, context, query):
        """Free-text answer conditioned on an assembled context, or None if unsupported."""
        return None

    def _checked(self, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (len(self.vocab),):
            raise LanguageModelError(
                f"{type(self).__name__} returned {vector.shape[0] if vector.ndim else 0} "
                f"log-probabilities for a vocabulary of {len(self.vocab)}"
            )
        if np.isnan(vector).any() or (vector == np.inf).any():
            raise LanguageModelError(f"{type(self).__name__} returned NaN or +inf log-probabilities")
        return vector


class UniformLM(LanguageModelInterface):
    """Equal mass on every id in the vocabulary."""

    thread_safe = True

    def next_logprobs(self, context, prefix):
        size = len(self.vocab)
        return np.full(size, -np.log(size))


class UnigramLM(LanguageModelInterface):
    """Corpus-frequency model.

    At the empty prefix mass goes to words by corpus count (optionally boosted
    for words that occur in the context). After at least one token, END_OF_KEY
    takes `stop_prob` and the remaining mass is spread by corpus frequency.
    UNKNOWN never receives mass.
    """

    thread_safe = True

    def __init__(self, vocab, counts, stop_prob=0.5, context_boost=0.0):
        super().__init__(vocab)
        if not 0.0 < stop_prob < 1.0:
            raise ValueError("stop_prob must lie strictly between 0 and 1")
        if context_boost < 0:
            raise ValueError("context_boost must be non-negative")
        self.stop_prob = stop_prob
        self.context_boost = context_boost
        self.word_counts = {}
        for word, count in sorted(counts.items()):
            if count > 0:
                self.word_counts[vocab.intern(word)] = int(count)

    @classmethod
    def from_corpus(cls, vocab, path, **kwargs):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise LanguageModelError(f"cannot read unigram corpus {path}: {e}") from e
        counts = Counter(split_words(text, vocab.word_pattern))
        logger.info(f"✅ Unigram corpus loaded: {len(counts)} distinct words from {path}")
        return cls(vocab, counts, **kwargs)

    def _weights(self):
        weights = np.zeros(len(self.vocab))
        for token_id, count in self.word_counts.items():
            weights[token_id] = count
        return weights

    def next_logprobs(self, context, prefix):
        weights = self._weights()
        with np.errstate(divide="ignore"):
            if len(prefix) == 0:
                if self.context_boost > 0:
                    for word in set(split_words(context, self.vocab.word_pattern)):
                        token_id = self.vocab.lookup(word)
                        if token_id is not None:
                            weights[token_id] *= 1.0 + self.context_boost
                total = weights.sum()
                if total == 0:
                    return self._checked(np.full(len(self.vocab), -np.inf))
                return self._checked(np.log(weights / total))
            total = weights.sum()
            probs = np.zeros(len(self.vocab))
            if total > 0:
                probs = weights / total * (1.0 - self.stop_prob)
            probs[END_OF_KEY] = self.stop_prob
            return self._checked(np.log(probs))


@dataclass(frozen=True)
class TableEntry:
    context_pattern: str
    prefix: tuple
    logprobs: dict


class TableLM(LanguageModelInterface):
    """Explicit per-(context pattern, prefix) action distributions.

    Entries are tried in order; the first whose glob pattern matches the
    normalized context and whose prefix equals the requested prefix wins.
    Actions an entry does not list get -inf. Without a match the model falls
    back to uniform (or to all -inf when the table says `default = "none"`).
    """

    thread_safe = True

    def __init__(self, vocab, entries=(), answers=(), default="uniform"):
        super().__init__(vocab)
        if default not in ("uniform", "none"):
            raise LanguageModelError(f"unknown table default {default!r}")
        self.default = default
        self.entries = list(entries)
        self.answers = [(normalize_pattern(pattern), text) for pattern, text in answers]

    @classmethod
    def from_mapping(cls, vocab, document):
        """Build from the parsed table mapping (the TOML document structure)."""
        try:
            jsonschema.validate(document, TABLE_SCHEMA)
        except jsonschema.ValidationError as e:
            location = ".".join(str(part) for part in e.absolute_path) or "<root>"
            raise LanguageModelError(f"invalid LM table at {location}: {e.message}") from e
        if document["version"] != TABLE_FORMAT_VERSION:
            raise LanguageModelError(
                f"LM table version {document['version']} is not supported (expected {TABLE_FORMAT_VERSION})"
            )
        entries = []
        for row in document.get("entry", []):
            pattern = normalize_pattern(row.get("context", "*"))
            prefix = vocab.tokenize(row.get("prefix", ""))
            logprobs = {}
            for action, prob in row["probs"].items():
                token_id = cls._action_id(vocab, action)
                logprobs[token_id] = float(np.log(prob)) if prob > 0 else -np.inf
            entries.append(TableEntry(pattern, prefix, logprobs))
        answers = [(row["query"], row["text"]) for row in document.get("answer", [])]
        return cls(vocab, entries, answers, document.get("default", "uniform"))

    @classmethod
    def from_file(cls, vocab, path):
        path = Path(path)
        try:
            document = toml.load(path)
        except (OSError, toml.TomlDecodeError) as e:
            raise LanguageModelError(f"cannot load LM table {path}: {e}") from e
        model = cls.from_mapping(vocab, document)
        logger.info(f"✅ LM table loaded: {len(model.entries)} entries from {path}")
        return model

    @staticmethod
    def _action_id(vocab, action):
        if action == END_OF_KEY_TOKEN:
            return END_OF_KEY
        if action == UNKNOWN_TOKEN:
            return UNKNOWN
        words = split_words(action, vocab.word_pattern)
        if len(words) != 1:
            raise LanguageModelError(f"LM table action {action!r} is not a single word token")
        return vocab.intern(words[0])

    def _match(self, context, prefix):
        normalized = normalize_text(context)
        for entry in self.entries:
            if entry.prefix == prefix and fnmatch.fnmatchcase(normalized, entry.context_pattern):
                return entry
        return None

    def next_logprobs(self, context, prefix):
        size = len(self.vocab)
        entry = self._match(context, tuple(prefix))
        if entry is None:
            if self.default == "uniform":
                return np.full(size, -np.log(size))
            return np.full(size, -np.inf)
        vector = np.full(size, -np.inf)
        for token_id, logprob in entry.logprobs.items():
            vector[token_id] = logprob
        return self._checked(vector)

    def synthesize(self, context, query):
        normalized = normalize_text(query)
        for pattern, text in self.answers:
            if fnmatch.fnmatchcase(normalized, pattern):
                return text
        return None

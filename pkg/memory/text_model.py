# memory/text_model.py
"""Token vocabulary and word-level tokenization shared by the whole engine."""
import operator
import re
import threading

from memory.errors import InvalidToken

END_OF_KEY = 0
UNKNOWN = 1
END_OF_KEY_TOKEN = "<eok>"
UNKNOWN_TOKEN = "<unk>"
RESERVED_IDS = frozenset({END_OF_KEY, UNKNOWN})
RESERVED_TOKENS = (END_OF_KEY_TOKEN, UNKNOWN_TOKEN)

# letters and digits only; underscores and punctuation split words
DEFAULT_WORD_PATTERN = r"[^\W_]+"


def split_words(text, pattern=DEFAULT_WORD_PATTERN):
    """Lowercase text and split it on whitespace and punctuation boundaries.

    Reserved token strings are never words, whatever the pattern matches.
    """
    if not text:
        return []
    return [word for word in re.findall(pattern, str(text).lower()) if word not in RESERVED_TOKENS]


def normalize_text(text, pattern=DEFAULT_WORD_PATTERN):
    """Normalized form of a string: lowercase words joined by single spaces."""
    return " ".join(split_words(text, pattern))


class Vocabulary:
    """Growth-only bijection between token strings and integer ids.

    Ids 0 and 1 are reserved for END_OF_KEY and UNKNOWN; words start at 2.
    Reads are safe from many threads; interning takes a lock.
    """

    def __init__(self, word_pattern=DEFAULT_WORD_PATTERN):
        self.word_pattern = word_pattern
        self.id_to_token = list(RESERVED_TOKENS)
        self.token_to_id = {token: idx for idx, token in enumerate(self.id_to_token)}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def intern(self, word):
        if word in RESERVED_TOKENS:
            raise InvalidToken(f"{word} is reserved and cannot be interned as a word")
        token_id = self.token_to_id.get(word)
        if token_id is not None:
            return token_id
        with self._lock:
            token_id = self.token_to_id.get(word)
            if token_id is None:
                token_id = len(self.id_to_token)
                self.id_to_token.append(word)
                self.token_to_id[word] = token_id
        return token_id

    def lookup(self, word):
        """Id of an already interned word, or None."""
        return self.token_to_id.get(word)

    def token(self, token_id):
        try:
            idx = operator.index(token_id)
        except TypeError:
            raise InvalidToken(f"unknown token id {token_id!r}") from None
        if idx < 0 or idx >= len(self.id_to_token):
            raise InvalidToken(f"unknown token id {token_id!r}")
        return self.id_to_token[idx]

    def word_ids(self):
        """All non-reserved ids in ascending order."""
        return range(len(RESERVED_TOKENS), len(self.id_to_token))

    def tokenize(self, text):
        """Deterministic word tokenization; every word is interned."""
        return tuple(self.intern(word) for word in split_words(text, self.word_pattern))

    def detokenize(self, seq):
        tokens = list(seq)
        if tokens and tokens[-1] == END_OF_KEY:
            tokens = tokens[:-1]
        words = []
        for token_id in tokens:
            if token_id in RESERVED_IDS:
                raise InvalidToken(f"reserved token {self.token(token_id)} inside a sequence")
            words.append(self.token(token_id))
        return " ".join(words)

    def to_list(self):
        return list(self.id_to_token)

    @classmethod
    def from_list(cls, tokens, word_pattern=DEFAULT_WORD_PATTERN):
        tokens = list(tokens)
        if tuple(tokens[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise InvalidToken("vocabulary does not start with the reserved tokens")
        if len(set(tokens)) != len(tokens):
            raise InvalidToken("vocabulary contains duplicate tokens")
        vocab = cls(word_pattern)
        for word in tokens[len(RESERVED_TOKENS):]:
            vocab.intern(word)
        return vocab


def has_reserved(seq):
    return any(token_id in RESERVED_IDS for token_id in seq)

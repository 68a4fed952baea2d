# memory/schema_trie.py
"""The cognitive schema: a prefix trie over concept keys.

The trie is the only authority on key validity. Every path from the root to an
end-marked node is a concept key; every path from the root is a valid prefix.
"""
import threading
from dataclasses import dataclass, field

from memory import get_logger
from memory.errors import EmptyKey, InvalidPrefix, InvalidToken, UnknownConcept
from memory.text_model import END_OF_KEY, RESERVED_IDS

logger = get_logger(__name__)


@dataclass
class TrieNode:
    children: dict = field(default_factory=dict)
    concept: int | None = None

    @property
    def is_key_end(self):
        return self.concept is not None


def _strip_end(seq):
    seq = tuple(seq)
    if seq and seq[-1] == END_OF_KEY:
        return seq[:-1]
    return seq


class CognitiveSchema:
    """Insert-only prefix trie with dense ConceptIds and a generation counter.

    Many readers or one writer. Writers serialize on an internal lock and bump
    `generation`, which searches compare between steps to detect mutation.
    """

    def __init__(self):
        self.root = TrieNode()
        self.key_index = []
        self.generation = 0
        self.max_key_length = 0
        self._write_lock = threading.Lock()

    def __len__(self):
        return len(self.key_index)

    def __iter__(self):
        return iter(self.enumerate_keys())

    def _walk(self, seq):
        node = self.root
        for token_id in seq:
            node = node.children.get(token_id)
            if node is None:
                return None
        return node

    def insert_key(self, seq):
        seq = tuple(int(t) for t in seq)
        if not seq:
            raise EmptyKey("cannot insert an empty key")
        if any(t in RESERVED_IDS for t in seq):
            raise InvalidToken(f"reserved token inside key {seq}")
        with self._write_lock:
            node = self._walk(seq)
            if node is not None and node.is_key_end:
                return node.concept
            node = self.root
            for token_id in seq:
                node = node.children.setdefault(token_id, TrieNode())
            node.concept = len(self.key_index)
            self.key_index.append(seq)
            self.max_key_length = max(self.max_key_length, len(seq))
            self.generation += 1
            logger.debug(f"Inserted concept {node.concept} {seq} (generation {self.generation})")
            return node.concept

    def contains(self, seq):
        seq = _strip_end(seq)
        if not seq:
            return False
        node = self._walk(seq)
        return node is not None and node.is_key_end

    def lookup(self, seq):
        """ConceptId of a key, or None when the sequence is not in the schema."""
        seq = _strip_end(seq)
        node = self._walk(seq) if seq else None
        return node.concept if node is not None else None

    def is_valid_prefix(self, seq):
        seq = tuple(seq)
        if seq and seq[-1] == END_OF_KEY:
            return self.contains(seq)
        if not seq:
            return len(self.key_index) > 0
        return self._walk(seq) is not None

    def allowed_next(self, prefix):
        """Tokens that keep `prefix` inside the validity space, plus may_terminate."""
        prefix = tuple(prefix)
        if not self.is_valid_prefix(prefix) or (prefix and prefix[-1] == END_OF_KEY):
            raise InvalidPrefix(f"{prefix} is not a valid prefix of any schema key")
        node = self._walk(prefix)
        return frozenset(node.children), node.is_key_end

    def concept_key(self, concept):
        if not 0 <= concept < len(self.key_index):
            raise UnknownConcept(concept)
        return self.key_index[concept]

    def has_concept(self, concept):
        return isinstance(concept, int) and 0 <= concept < len(self.key_index)

    def enumerate_keys(self):
        return list(enumerate(self.key_index))

    def check_dead_ends(self):
        """True when every reachable node leads to at least one end-marked node."""
        def live(node):
            below = [live(child) for child in node.children.values()]
            if not all(below):
                return False
            return node.is_key_end or bool(below)

        if not self.root.children:
            return True
        return all(live(child) for child in self.root.children.values())

    @classmethod
    def from_keys(cls, entries):
        """Rebuild a schema from (ConceptId, TokenSequence) pairs in id order."""
        schema = cls()
        for expected, (concept, seq) in enumerate(entries):
            if concept != expected:
                raise UnknownConcept(f"concept ids must be dense, got {concept} at position {expected}")
            if schema.insert_key(seq) != expected:
                raise ValueError(f"duplicate key {tuple(seq)} for concept {concept}")
        return schema

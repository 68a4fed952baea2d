# memory/state.py
from dataclasses import dataclass, field

from memory.associative_graph import AssociativeGraph
from memory.memory_store import MemoryStore
from memory.schema_trie import CognitiveSchema
from memory.text_model import DEFAULT_WORD_PATTERN, Vocabulary


@dataclass
class EngineState:
    """Everything a snapshot persists: vocabulary, schema, graph counts and turns."""
    vocab: Vocabulary
    schema: CognitiveSchema
    graph: AssociativeGraph = field(default=None)
    store: MemoryStore = field(default=None)

    def __post_init__(self):
        if self.graph is None:
            self.graph = AssociativeGraph(self.schema)
        if self.store is None:
            self.store = MemoryStore(self.schema)

    @classmethod
    def empty(cls, word_pattern=DEFAULT_WORD_PATTERN):
        return cls(Vocabulary(word_pattern), CognitiveSchema())

    def key_text(self, concept):
        return self.vocab.detokenize(self.schema.concept_key(concept))

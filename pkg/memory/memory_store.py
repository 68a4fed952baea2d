# memory/memory_store.py
"""Append-only dialogue turns and the concept -> turn links that ground recall."""
from dataclasses import asdict, dataclass

import pandas as pd

from memory import get_logger
from memory.errors import EmptyText, UnknownConcept, UnknownTurn

logger = get_logger(__name__)


@dataclass(frozen=True)
class Turn:
    turn_id: int
    session_id: str
    speaker: str
    text: str
    timestamp: str | None = None

    def to_record(self):
        return asdict(self)

    @classmethod
    def from_record(cls, record):
        return cls(
            turn_id=int(record["turn_id"]),
            session_id=str(record["session_id"]),
            speaker=str(record["speaker"]),
            text=str(record["text"]),
            timestamp=record.get("timestamp"),
        )


class MemoryStore:
    """Turns in ingestion order plus per-concept sorted turn-id lists."""

    def __init__(self, schema):
        self.schema = schema
        self.turns = []
        self.links = {}

    def __len__(self):
        return len(self.turns)

    def __iter__(self):
        return iter(self.turns)

    @property
    def next_turn_id(self):
        return len(self.turns)

    @staticmethod
    def check_text(text):
        if text is None or not str(text).strip():
            raise EmptyText("turn text must be non-empty")
        return str(text)

    def add_turn(self, session_id, speaker, text, timestamp=None):
        """Store a turn and return its dense id (the previous turn count)."""
        self.check_text(text)
        turn = Turn(len(self.turns), str(session_id), str(speaker), str(text), timestamp)
        self.turns.append(turn)
        return turn.turn_id

    def discard_last(self, turn_id):
        """Undo the most recent add_turn; links to it must not exist yet."""
        if not self.turns or self.turns[-1].turn_id != turn_id:
            raise UnknownTurn(turn_id)
        if any(turn_id in turn_ids for turn_ids in self.links.values()):
            raise ValueError(f"turn {turn_id} is already linked")
        self.turns.pop()

    def get_turn(self, turn_id):
        if not isinstance(turn_id, int) or not 0 <= turn_id < len(self.turns):
            raise UnknownTurn(turn_id)
        return self.turns[turn_id]

    def link(self, concept, turn_id):
        if not self.schema.has_concept(concept):
            raise UnknownConcept(concept)
        self.get_turn(turn_id)
        turn_ids = self.links.setdefault(concept, [])
        if turn_id in turn_ids:
            return
        turn_ids.append(turn_id)
        # turns are linked as they are ingested, so this is almost always a no-op
        turn_ids.sort()

    def turns_for(self, concept):
        if not self.schema.has_concept(concept):
            raise UnknownConcept(concept)
        return list(self.links.get(concept, ()))

    def entries_for(self, concepts):
        """Union of the turns linked to `concepts`, deduplicated and chronological."""
        turn_ids = set()
        for concept in concepts:
            turn_ids.update(self.turns_for(concept))
        return [self.turns[turn_id] for turn_id in sorted(turn_ids)]

    def turn_frame(self):
        columns = ["turn_id", "session_id", "speaker", "text", "timestamp"]
        return pd.DataFrame([turn.to_record() for turn in self.turns], columns=columns)

    # ----------------------------
    # Persistence helpers
    # ----------------------------
    def to_state(self):
        return {
            "turns": [turn.to_record() for turn in self.turns],
            "links": [[concept, list(turn_ids)] for concept, turn_ids in sorted(self.links.items()) if turn_ids],
        }

    @classmethod
    def from_state(cls, schema, state):
        store = cls(schema)
        for expected, record in enumerate(state["turns"]):
            turn = Turn.from_record(record)
            if turn.turn_id != expected:
                raise UnknownTurn(f"turn ids must be dense, got {turn.turn_id} at position {expected}")
            if not turn.text.strip():
                raise EmptyText(f"turn {turn.turn_id} has empty text")
            store.turns.append(turn)
        for concept, turn_ids in state["links"]:
            for turn_id in turn_ids:
                store.link(concept, turn_id)
        logger.debug(f"Restored {len(store.turns)} turns and {len(store.links)} linked concepts")
        return store

# memory/evolution.py
"""Assimilation / accommodation update loop.

For every incoming turn the existing schema is tried first (constrained
beam search over the turn text). When grounding is poor, the constraint is
relaxed, novel candidate keys are free-generated, validated and inserted.
The union of grounded and novel concepts then updates the graph and the
concept links.
"""
from dataclasses import dataclass, field

import numpy as np

from memory import get_logger
from memory.constrained_decoder import (
    SEARCH_STRATEGIES,
    constrained_beam_search,
    free_generate,
    sequence_perplexity,
    unknown_selected,
)
from memory.text_model import RESERVED_IDS

logger = get_logger(__name__)

DEFAULT_STOPWORDS = frozenset({
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at",
    "be", "been", "but", "by", "can", "could", "did", "do", "does", "for", "from",
    "had", "has", "have", "he", "her", "him", "his", "how", "i", "if", "in", "into",
    "is", "it", "its", "just", "me", "my", "no", "not", "of", "on", "or", "our",
    "she", "so", "some", "than", "that", "the", "their", "them", "then", "there",
    "they", "this", "to", "too", "up", "us", "was", "we", "were", "what", "when",
    "which", "who", "will", "with", "would", "you", "your",
})


@dataclass(frozen=True)
class EvolutionConfig:
    perplexity_threshold: float = 20.0
    assim_beam: int = 5
    max_novel_keys: int = 5
    max_key_len: int = 4
    min_key_len: int = 1
    stopwords: frozenset = field(default=DEFAULT_STOPWORDS)
    assimilation_enabled: bool = True
    search_strategy: str = "best_first"

    def __post_init__(self):
        if not self.perplexity_threshold > 1:
            raise ValueError("perplexity_threshold must be greater than 1")
        if self.assim_beam < 1:
            raise ValueError("assim_beam must be at least 1")
        if self.max_novel_keys < 1:
            raise ValueError("max_novel_keys must be at least 1")
        if self.min_key_len < 1:
            raise ValueError("min_key_len must be at least 1")
        if self.min_key_len > self.max_key_len:
            raise ValueError("min_key_len must not exceed max_key_len")
        if self.search_strategy not in SEARCH_STRATEGIES:
            raise ValueError(f"unknown search strategy {self.search_strategy!r}")
        object.__setattr__(self, "stopwords", frozenset(word.lower() for word in self.stopwords))


@dataclass(frozen=True)
class IngestReport:
    turn_id: int
    assimilated: frozenset
    accommodated: frozenset
    triggered_accommodation: bool
    perplexity: float | None = None
    unknown_selected: bool = False
    rejected: tuple = ()

    @property
    def concepts(self):
        return self.assimilated | self.accommodated

    def describe(self, key_text):
        """One-line summary with concept keys rendered by `key_text`."""
        assimilated = ", ".join(key_text(c) for c in sorted(self.assimilated)) or "-"
        accommodated = ", ".join(key_text(c) for c in sorted(self.accommodated)) or "-"
        ppl = "n/a" if self.perplexity is None else f"{self.perplexity:.4f}"
        flag = "yes" if self.triggered_accommodation else "no"
        return (
            f"turn {self.turn_id}: assimilated [{assimilated}] accommodated [{accommodated}] "
            f"perplexity {ppl} accommodation {flag}"
        )


def validate_candidate(seq, cfg, schema, vocab):
    """Length bounds, no stop words, no reserved ids, and not already a schema key."""
    seq = tuple(seq)
    if not cfg.min_key_len <= len(seq) <= cfg.max_key_len:
        return False
    if any(token_id in RESERVED_IDS for token_id in seq):
        return False
    for token_id in seq:
        if not 0 <= token_id < len(vocab):
            return False
        if vocab.token(token_id) in cfg.stopwords:
            return False
    return not schema.contains(seq)


def should_accommodate(perplexity, unknown_selected, schema_empty, cfg):
    if schema_empty or unknown_selected:
        return True
    return perplexity is not None and perplexity > cfg.perplexity_threshold


def _dedupe(candidates):
    seen = set()
    unique = []
    for seq in candidates:
        seq = tuple(seq)
        if seq not in seen:
            seen.add(seq)
            unique.append(seq)
    return unique


def assimilate(state, lm, text, cfg):
    """Ground `text` to existing keys; returns (concepts, perplexity, unknown_selected).

    Keys the model gives zero probability are not groundings and are dropped.
    """
    schema = state.schema
    keys = constrained_beam_search(
        lm, schema, text, cfg.assim_beam, schema.max_key_length, strategy=cfg.search_strategy
    )
    keys = [key for key in keys if np.isfinite(key.cum_logprob)]
    perplexity = sequence_perplexity(lm, schema, text, [keys[0].tokens]) if keys else None
    return frozenset(key.concept for key in keys), perplexity, unknown_selected(lm, schema, text)


def accommodate(state, lm, text, cfg):
    """Free-generate candidates and insert the valid ones; returns (new concepts, rejected)."""
    candidates = _dedupe(free_generate(lm, text, cfg.max_novel_keys, cfg.max_key_len))
    inserted = []
    rejected = []
    for seq in candidates:
        if validate_candidate(seq, cfg, state.schema, state.vocab):
            inserted.append(state.schema.insert_key(seq))
        else:
            rejected.append(seq)
    return frozenset(inserted), tuple(rejected)


def process_turn(state, record, lm, cfg):
    """Store one turn and evolve the schema, graph and links for it.

    `record` carries session_id, speaker, text and an optional timestamp. The
    engine calls this under its single-writer lock. Grounding runs before the
    turn is stored, so an LM failure leaves the store and graph untouched.
    """
    schema = state.schema
    store = state.store
    text = store.check_text(record.get("text"))
    turn_id = store.next_turn_id

    assimilated = frozenset()
    perplexity = None
    unknown = False
    schema_empty = len(schema) == 0
    if cfg.assimilation_enabled and not schema_empty:
        assimilated, perplexity, unknown = assimilate(state, lm, text, cfg)
        triggered = should_accommodate(perplexity, unknown, False, cfg)
    else:
        triggered = True

    accommodated = frozenset()
    rejected = ()
    if triggered:
        accommodated, rejected = accommodate(state, lm, text, cfg)
        if not accommodated:
            logger.warning(
                f"⚠️ Accommodation for turn {turn_id} produced no valid concept "
                f"({len(rejected)} candidates rejected)"
            )

    concepts = assimilated | accommodated
    turn_id = store.add_turn(
        record.get("session_id", ""),
        record.get("speaker", ""),
        text,
        record.get("timestamp"),
    )
    try:
        state.graph.record_turn(concepts)
    except Exception:
        store.discard_last(turn_id)
        raise
    for concept in sorted(concepts):
        store.link(concept, turn_id)

    report = IngestReport(
        turn_id=turn_id,
        assimilated=assimilated,
        accommodated=accommodated,
        triggered_accommodation=triggered,
        perplexity=perplexity,
        unknown_selected=unknown,
        rejected=rejected,
    )
    logger.debug(report.describe(state.key_text))
    return report

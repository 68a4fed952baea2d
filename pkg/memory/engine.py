# memory/engine.py
"""MemoryEngine: the single mutation path plus recall, stats, export and persistence."""
import threading
from dataclasses import dataclass, field

import pandas as pd
from tqdm import tqdm

from memory import get_logger
from memory.config import EngineConfig
from memory.data_loader import build_language_model, load_transcript
from memory.errors import TranscriptError
from memory.evolution import process_turn
from memory.recall_pipeline import recall, synthesis_hook
from memory.schema_trie import CognitiveSchema
from memory.snapshot import load_snapshot, save_snapshot
from memory.state import EngineState

logger = get_logger(__name__)

GRAPH_FORMATS = ("dot", "json")


@dataclass
class IngestSummary:
    reports: list = field(default_factory=list)
    n_turns: int = 0
    n_concepts: int = 0
    n_edges: int = 0

    @property
    def accommodations(self):
        return sum(1 for report in self.reports if report.triggered_accommodation)

    @property
    def accommodation_rate(self):
        return self.accommodations / len(self.reports) if self.reports else 0.0

    def describe(self):
        return (
            f"ingested {len(self.reports)} turns; total turns {self.n_turns}, "
            f"concepts {self.n_concepts}, edges {self.n_edges}, "
            f"accommodation rate {self.accommodation_rate:.3f}"
        )


@dataclass
class EngineStats:
    n_turns: int
    n_concepts: int
    n_edges: int
    vocabulary_size: int
    top_idf: pd.DataFrame

    def describe(self):
        lines = [
            f"turns: {self.n_turns}",
            f"concepts: {self.n_concepts}",
            f"edges: {self.n_edges}",
            f"vocabulary: {self.vocabulary_size}",
            "top idf:",
        ]
        for row in self.top_idf.itertuples(index=False):
            lines.append(f"  {row.concept}\t{row.key}\tdf={row.df}\tidf={row.idf:.6f}")
        return "\n".join(lines) + "\n"


class MemoryEngine:
    """Owns the engine state and serializes every mutation behind one lock.

    An explicit `lm` pins the language model; otherwise it is built from the
    config and rebuilt after each ingest (the unigram mock counts stored turns).
    """

    def __init__(self, config=None, state=None, lm=None):
        self.config = config or EngineConfig()
        if state is None:
            state = EngineState(lm.vocab, CognitiveSchema()) if lm is not None else EngineState.empty(
                self.config.tokenizer.word_pattern
            )
        if lm is not None and lm.vocab is not state.vocab:
            raise ValueError("a pinned language model must share the engine vocabulary")
        self.state = state
        self._lm = lm
        self._lm_pinned = lm is not None
        self._write_lock = threading.Lock()

    @property
    def vocab(self):
        return self.state.vocab

    @property
    def schema(self):
        return self.state.schema

    @property
    def graph(self):
        return self.state.graph

    @property
    def store(self):
        return self.state.store

    def key_text(self, concept):
        return self.state.key_text(concept)

    def language_model(self, extra_texts=()):
        if self._lm is None:
            texts = [turn.text for turn in self.store] + list(extra_texts)
            self._lm = build_language_model(self.config.language_model, self.vocab, texts)
        return self._lm

    # ----------------------------
    # Mutation path
    # ----------------------------
    def _check_turn_id(self, record, offset=0):
        expected = len(self.store) + offset
        given = record.get("turn_id")
        if given is not None and given != expected:
            raise TranscriptError(
                f"turn_id {given} is out of order (expected {expected})",
                path=record.get("source"),
                line_no=record.get("line_no"),
            )

    def ingest_record(self, record):
        with self._write_lock:
            self._check_turn_id(record)
            return process_turn(self.state, record, self.language_model(), self.config.evolution)

    def ingest(self, records, progress=False):
        """Process records in order; returns an IngestSummary."""
        records = list(records)
        with self._write_lock:
            for offset, record in enumerate(records):
                self._check_turn_id(record, offset)
            if not self._lm_pinned:
                self._lm = None
            lm = self.language_model(extra_texts=[record.get("text") or "" for record in records])
            summary = IngestSummary()
            for record in tqdm(records, desc="🧠 Ingesting turns", unit="turn", disable=not progress):
                summary.reports.append(process_turn(self.state, record, lm, self.config.evolution))
            if not self._lm_pinned:
                self._lm = None
            summary.n_turns = self.graph.n_turns
            summary.n_concepts = len(self.schema)
            summary.n_edges = self.graph.edge_count()
        logger.info(f"✅ {summary.describe()}")
        return summary

    def ingest_file(self, path, progress=False):
        return self.ingest(load_transcript(path, progress=progress), progress=progress)

    # ----------------------------
    # Queries
    # ----------------------------
    def recall(self, query, recall_config=None):
        return recall(self.state, query, self.language_model(), recall_config or self.config.recall)

    def answer(self, query, recall_config=None):
        """Recall plus the synthesis hook; returns (RecallResult, answer text)."""
        result = self.recall(query, recall_config)
        return result, synthesis_hook(result.context_text, query, self.language_model())

    def stats(self, top_n=10):
        return EngineStats(
            n_turns=self.graph.n_turns,
            n_concepts=len(self.schema),
            n_edges=self.graph.edge_count(),
            vocabulary_size=len(self.vocab),
            top_idf=self.graph.top_idf(self.key_text, n=top_n),
        )

    def export_graph(self, fmt="json"):
        if fmt == "dot":
            return self.graph.to_dot(self.key_text)
        if fmt == "json":
            return self.graph.to_json(self.key_text)
        raise ValueError(f"unknown graph format {fmt!r}; expected one of {GRAPH_FORMATS}")

    # ----------------------------
    # Persistence
    # ----------------------------
    def save(self, path=None):
        with self._write_lock:
            return save_snapshot(path or self.config.snapshot_path, self.state)

    @classmethod
    def load(cls, path=None, config=None):
        """Restore from a snapshot; the language model is rebuilt from `config` over the loaded vocabulary."""
        config = config or EngineConfig()
        state = load_snapshot(path or config.snapshot_path)
        return cls(config=config, state=state)

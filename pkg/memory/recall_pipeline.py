# memory/recall_pipeline.py
"""Constructive recall: schema activation, associative propagation, context assembly."""
from dataclasses import dataclass, field

from memory import get_logger
from memory.associative_graph import Sample, TopK
from memory.constrained_decoder import (
    SEARCH_STRATEGIES,
    constrained_beam_search,
    free_generate,
    key_logprob,
)
from memory.errors import EmptySchema

logger = get_logger(__name__)

SEED_STRATEGIES = ("constrained", "unconstrained")
SYNTHESIS_MARKER = "[no synthesis model available; assembled context follows]"


@dataclass(frozen=True)
class RecallConfig:
    beam: int = 5
    hops: int = 1
    temperature: float = 1.0
    mode: object = field(default=TopK(3))
    k_max: int = 35
    char_budget: int = 4000
    seed_strategy: str = "constrained"
    search_strategy: str = "best_first"

    def __post_init__(self):
        if self.beam < 1:
            raise ValueError("beam must be at least 1")
        if self.hops < 0:
            raise ValueError("hops must be non-negative")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if not isinstance(self.mode, (TopK, Sample)):
            raise ValueError(f"unknown propagation mode {self.mode!r}")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.beam > self.k_max:
            raise ValueError(f"beam ({self.beam}) must not exceed k_max ({self.k_max})")
        if self.char_budget < 0:
            raise ValueError("char_budget must be non-negative")
        if self.seed_strategy not in SEED_STRATEGIES:
            raise ValueError(f"unknown seed strategy {self.seed_strategy!r}")
        if self.search_strategy not in SEARCH_STRATEGIES:
            raise ValueError(f"unknown search strategy {self.search_strategy!r}")


@dataclass(frozen=True)
class Seed:
    concept: int
    key: str
    score: float


@dataclass(frozen=True)
class ContextConcept:
    concept: int
    key: str
    hop: int
    probability: float
    source: int


@dataclass(frozen=True)
class RecallResult:
    query: str
    seeds: tuple
    context_concepts: tuple
    evidence: tuple
    context_text: str
    truncated: bool
    hallucinated_keys: tuple = ()
    dropped_concepts: int = 0

    @property
    def concept_ids(self):
        return [seed.concept for seed in self.seeds] + [c.concept for c in self.context_concepts]

    def to_record(self):
        return {
            "query": self.query,
            "seeds": [{"concept": s.concept, "key": s.key, "score": s.score} for s in self.seeds],
            "context_concepts": [
                {"concept": c.concept, "key": c.key, "hop": c.hop,
                 "probability": c.probability, "source": c.source}
                for c in self.context_concepts
            ],
            "evidence": [turn.turn_id for turn in self.evidence],
            "context_text": self.context_text,
            "truncated": self.truncated,
            "hallucinated_keys": list(self.hallucinated_keys),
            "dropped_concepts": self.dropped_concepts,
        }

    def render(self):
        """Structured text record used by the CLI and the golden files."""
        lines = [f"query: {self.query}", "seeds:"]
        for seed in self.seeds:
            lines.append(f"  {seed.concept}\t{seed.key}\t{seed.score:.6f}")
        lines.append("context concepts:")
        for c in self.context_concepts:
            lines.append(f"  {c.concept}\t{c.key}\thop={c.hop}\tp={c.probability:.6f}\tfrom={c.source}")
        if self.hallucinated_keys:
            lines.append("hallucinated keys: " + ", ".join(self.hallucinated_keys))
        evidence = ", ".join(str(turn.turn_id) for turn in self.evidence) or "-"
        lines.append(f"evidence turns: {evidence}")
        lines.append(f"truncated: {'yes' if self.truncated else 'no'}")
        lines.append("context:")
        lines.append(self.context_text)
        return "\n".join(lines) + "\n"


def render_turn(turn):
    return f"[{turn.session_id}/{turn.turn_id} {turn.speaker}] {turn.text}"


def assemble_context(evidence, budget):
    """Render turns chronologically, dropping the oldest whole turns to fit `budget` chars."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    lines = [render_turn(turn) for turn in evidence]
    start = 0
    # total length of lines[start:] joined with newlines
    size = sum(len(line) for line in lines) + max(len(lines) - 1, 0)
    while start < len(lines) and size > budget:
        size -= len(lines[start]) + (1 if start < len(lines) - 1 else 0)
        start += 1
    return "\n".join(lines[start:]), start > 0


def synthesis_hook(context, query, lm):
    answer = lm.synthesize(context, query) if lm is not None else None
    if answer is None:
        return f"{SYNTHESIS_MARKER}\n{context}"
    return answer


def _constrained_seeds(state, query, lm, cfg):
    keys = constrained_beam_search(
        lm, state.schema, query, cfg.beam, state.schema.max_key_length, strategy=cfg.search_strategy
    )
    return [Seed(k.concept, state.key_text(k.concept), k.cum_logprob) for k in keys], []


def _unconstrained_seeds(state, query, lm, cfg):
    """Free-generate keys from the query and keep only exact schema hits."""
    seeds = []
    hallucinated = []
    for seq in free_generate(lm, query, cfg.beam, max(state.schema.max_key_length, 1)):
        concept = state.schema.lookup(seq)
        if concept is None:
            hallucinated.append(state.vocab.detokenize(seq))
        elif all(seed.concept != concept for seed in seeds):
            score = key_logprob(lm, state.schema, query, seq)
            seeds.append(Seed(concept, state.key_text(concept), score))
    if hallucinated:
        logger.info(f"⚠️ {len(hallucinated)} generated keys are not in the schema: {hallucinated}")
    return seeds, hallucinated


def recall(state, query, lm, cfg):
    """Seeds from the schema, context concepts from the graph, evidence from the store."""
    if len(state.schema) == 0:
        raise EmptySchema("schema is empty; ingest turns before querying")
    if cfg.seed_strategy == "constrained":
        seeds, hallucinated = _constrained_seeds(state, query, lm, cfg)
    else:
        seeds, hallucinated = _unconstrained_seeds(state, query, lm, cfg)

    seed_ids = [seed.concept for seed in seeds]
    activations = state.graph.propagate(seed_ids, cfg.hops, cfg.temperature, cfg.mode)
    ranked = sorted(activations.items(), key=lambda item: (item[1].hop, -item[1].probability, item[0]))
    room = max(cfg.k_max - len(seeds), 0)
    kept = ranked[:room]
    context_concepts = tuple(
        ContextConcept(concept, state.key_text(concept), a.hop, a.probability, a.source)
        for concept, a in kept
    )

    evidence = state.store.entries_for(seed_ids + [c.concept for c in context_concepts])
    context_text, truncated = assemble_context(evidence, cfg.char_budget)
    result = RecallResult(
        query=query,
        seeds=tuple(seeds),
        context_concepts=context_concepts,
        evidence=tuple(evidence),
        context_text=context_text,
        truncated=truncated,
        hallucinated_keys=tuple(hallucinated),
        dropped_concepts=len(ranked) - len(kept),
    )
    logger.debug(
        f"Recall for {query!r}: {len(seeds)} seeds, {len(context_concepts)} context concepts, "
        f"{len(evidence)} evidence turns"
    )
    return result

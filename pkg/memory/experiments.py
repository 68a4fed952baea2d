# memory/experiments.py
"""Parameter sweeps and seed-strategy comparisons over an ingested engine."""
import dataclasses

import pandas as pd

from memory import get_logger
from memory.recall_pipeline import SEED_STRATEGIES

logger = get_logger(__name__)

SWEEP_COLUMNS = [
    "query", "param", "value", "n_seeds", "n_context", "evidence_turns",
    "truncated", "dropped_concepts", "hit_rate",
]


def _hit_rate(result, gold_turns):
    if not gold_turns:
        return float("nan")
    found = {turn.turn_id for turn in result.evidence}
    return len(found & set(gold_turns)) / len(set(gold_turns))


def sweep(engine, queries, param, values, gold=None):
    """
    Recall every query once per value of one RecallConfig field.
    `gold` optionally maps a query to the turn ids that answer it; hit_rate is
    the fraction of those turns present in the evidence.
    """
    fields = {f.name for f in dataclasses.fields(engine.config.recall)}
    if param not in fields:
        raise ValueError(f"unknown recall parameter {param!r}")
    gold = gold or {}
    rows = []
    for query in queries:
        for value in values:
            overrides = {param: value}
            # the cap must still admit every seed
            if param == "k_max" and engine.config.recall.beam > value:
                overrides["beam"] = value
            cfg = dataclasses.replace(engine.config.recall, **overrides)
            result = engine.recall(query, cfg)
            rows.append({
                "query": query,
                "param": param,
                "value": value,
                "n_seeds": len(result.seeds),
                "n_context": len(result.context_concepts),
                "evidence_turns": len(result.evidence),
                "truncated": result.truncated,
                "dropped_concepts": result.dropped_concepts,
                "hit_rate": _hit_rate(result, gold.get(query)),
            })
    logger.info(f"✅ Sweep over {param} finished: {len(rows)} recalls")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def hallucination_report(engine, queries):
    """Seeds and out-of-schema keys per query for constrained and unconstrained seeding."""
    rows = []
    for query in queries:
        for strategy in SEED_STRATEGIES:
            cfg = dataclasses.replace(engine.config.recall, seed_strategy=strategy)
            result = engine.recall(query, cfg)
            generated = len(result.seeds) + len(result.hallucinated_keys)
            rows.append({
                "query": query,
                "seed_strategy": strategy,
                "n_seeds": len(result.seeds),
                "hallucinated": len(result.hallucinated_keys),
                "hallucination_rate": len(result.hallucinated_keys) / generated if generated else 0.0,
                "evidence_turns": len(result.evidence),
            })
    return pd.DataFrame(rows)


def summarize(frame, by="value"):
    """Mean of the numeric sweep columns per parameter value."""
    numeric = ["n_seeds", "n_context", "evidence_turns", "hit_rate"]
    return frame.groupby(by, sort=True)[numeric].mean().reset_index()

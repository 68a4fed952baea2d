# memory/associative_graph.py
"""Associative topology over schema concepts.

Only raw counts are stored: the turn count N, per-concept document frequency
and per-pair co-occurrence. Edge weights cooc(u, v) * idf(u) * idf(v) and the
softmax transition probabilities are evaluated on demand with current counts.
"""
import itertools
import json
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import pandas as pd

from memory import get_logger
from memory.errors import ConceptNeverObserved, IsolatedConcept, UnknownConcept

logger = get_logger(__name__)


@dataclass(frozen=True)
class TopK:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("topk needs m >= 1")


@dataclass(frozen=True)
class Sample:
    count: int
    rng_seed: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample needs count >= 1")


@dataclass(frozen=True)
class Activation:
    hop: int
    probability: float
    source: int


def _pair(u, v):
    return (u, v) if u < v else (v, u)


class AssociativeGraph:
    """Co-occurrence store plus the weight, softmax and propagation queries over it.

    record_turn is the only mutator; the engine serializes it with schema writes.
    """

    def __init__(self, schema):
        self.schema = schema
        self.n_turns = 0
        self.df = defaultdict(int)
        self.cooc = {}
        self.adjacency = defaultdict(set)

    def _require(self, concept):
        if not self.schema.has_concept(concept):
            raise UnknownConcept(concept)

    def record_turn(self, concepts):
        concepts = sorted(set(concepts))
        for concept in concepts:
            self._require(concept)
        self.n_turns += 1
        for concept in concepts:
            self.df[concept] += 1
        for u, v in itertools.combinations(concepts, 2):
            self.cooc[(u, v)] = self.cooc.get((u, v), 0) + 1
            self.adjacency[u].add(v)
            self.adjacency[v].add(u)

    def cooccurrence(self, u, v):
        return self.cooc.get(_pair(u, v), 0)

    def edge_count(self):
        return len(self.cooc)

    def idf(self, concept):
        self._require(concept)
        df = self.df.get(concept, 0)
        if df == 0 or self.n_turns == 0:
            raise ConceptNeverObserved(f"concept {concept} has not been observed in any turn")
        return float(np.log(self.n_turns / df))

    def edge_weight(self, u, v):
        if u == v:
            raise ValueError("self-loops are not part of the graph")
        self._require(u)
        self._require(v)
        count = self.cooccurrence(u, v)
        if count == 0:
            return 0.0
        return count * self.idf(u) * self.idf(v)

    def neighbors(self, concept):
        self._require(concept)
        return sorted(self.adjacency.get(concept, ()))

    def transition_probs(self, concept, temperature):
        """Softmax over edge weights to the neighbors of `concept`, in ConceptId order."""
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        neighbors = self.neighbors(concept)
        if not neighbors:
            raise IsolatedConcept(f"concept {concept} has no neighbors")
        weights = np.array([self.edge_weight(concept, v) for v in neighbors], dtype=np.float64)
        scaled = (weights - weights.max()) / temperature
        probs = np.exp(scaled)
        probs /= probs.sum()
        return dict(zip(neighbors, probs.tolist()))

    def propagate(self, seeds, hops, temperature, mode):
        """Spread activation from the seeds for `hops` rounds.

        Each hop expands only the concepts discovered in the previous hop. TopK
        takes the m most probable neighbors per node (ConceptId breaks ties);
        Sample draws `count` distinct neighbors per node from one seeded
        generator. Returns {concept: Activation} for non-seed concepts in
        discovery order.
        """
        if hops < 0:
            raise ValueError("hops must be non-negative")
        seeds = sorted(set(seeds))
        for seed in seeds:
            self._require(seed)
        rng = np.random.default_rng(mode.rng_seed) if isinstance(mode, Sample) else None

        visited = set(seeds)
        activated = {}
        frontier = seeds
        for hop in range(1, hops + 1):
            discovered = {}
            for u in frontier:
                try:
                    probs = self.transition_probs(u, temperature)
                except IsolatedConcept:
                    logger.debug(f"Skipping isolated concept {u} at hop {hop}")
                    continue
                for v in self._choose(probs, mode, rng):
                    p = probs[v]
                    if v in visited:
                        continue
                    best = discovered.get(v)
                    if best is None or p > best.probability:
                        discovered[v] = Activation(hop, p, u)
            for v in sorted(discovered, key=lambda c: (-discovered[c].probability, c)):
                activated[v] = discovered[v]
                visited.add(v)
            frontier = sorted(discovered)
            if not frontier:
                break
        return activated

    @staticmethod
    def _choose(probs, mode, rng):
        neighbors = list(probs)
        if isinstance(mode, TopK):
            ranked = sorted(neighbors, key=lambda v: (-probs[v], v))
            return ranked[: mode.m]
        if isinstance(mode, Sample):
            p = np.array([probs[v] for v in neighbors])
            size = min(mode.count, int(np.count_nonzero(p)))
            if size == 0:
                return []
            picks = rng.choice(len(neighbors), size=size, replace=False, p=p)
            return [neighbors[i] for i in sorted(picks)]
        raise ValueError(f"unknown propagation mode {mode!r}")

    # ----------------------------
    # Tables and exports
    # ----------------------------
    def concept_frame(self, key_text):
        """One row per concept: key, df, idf (NaN when never observed) and degree."""
        rows = []
        for concept, _ in self.schema.enumerate_keys():
            df = self.df.get(concept, 0)
            idf = float(np.log(self.n_turns / df)) if df and self.n_turns else np.nan
            rows.append({
                "concept": concept,
                "key": key_text(concept),
                "df": df,
                "idf": idf,
                "degree": len(self.adjacency.get(concept, ())),
            })
        return pd.DataFrame(rows, columns=["concept", "key", "df", "idf", "degree"])

    def edge_frame(self, key_text):
        rows = []
        for (u, v), count in sorted(self.cooc.items()):
            rows.append({
                "u": u,
                "v": v,
                "u_key": key_text(u),
                "v_key": key_text(v),
                "cooc": count,
                "weight": self.edge_weight(u, v),
            })
        return pd.DataFrame(rows, columns=["u", "v", "u_key", "v_key", "cooc", "weight"])

    def top_idf(self, key_text, n=10):
        frame = self.concept_frame(key_text).dropna(subset=["idf"])
        return frame.sort_values(["idf", "concept"], ascending=[False, True]).head(n).reset_index(drop=True)

    def to_json(self, key_text):
        nodes = [{"id": concept, "key": key_text(concept)} for concept, _ in self.schema.enumerate_keys()]
        edges = [
            {"u": u, "v": v, "cooc": count, "weight": round(self.edge_weight(u, v), 12)}
            for (u, v), count in sorted(self.cooc.items())
        ]
        document = {"n_turns": self.n_turns, "nodes": nodes, "edges": edges}
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"

    def to_dot(self, key_text):
        lines = ["graph associative_memory {"]
        for concept, _ in self.schema.enumerate_keys():
            label = key_text(concept).replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  c{concept} [label="{label}"];')
        for (u, v), count in sorted(self.cooc.items()):
            lines.append(f'  c{u} -- c{v} [cooc={count}, weight="{self.edge_weight(u, v):.6f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    # ----------------------------
    # Persistence helpers
    # ----------------------------
    def to_state(self):
        return {
            "n_turns": self.n_turns,
            "df": [[concept, count] for concept, count in sorted(self.df.items()) if count],
            "cooc": [[u, v, count] for (u, v), count in sorted(self.cooc.items())],
        }

    @classmethod
    def from_state(cls, schema, state):
        graph = cls(schema)
        graph.n_turns = int(state["n_turns"])
        for concept, count in state["df"]:
            graph._require(concept)
            graph.df[concept] = int(count)
        for u, v, count in state["cooc"]:
            graph._require(u)
            graph._require(v)
            if u >= v:
                raise ValueError(f"co-occurrence pair ({u}, {v}) is not ordered")
            graph.cooc[(u, v)] = int(count)
            graph.adjacency[u].add(v)
            graph.adjacency[v].add(u)
        return graph

# memory/constrained_decoder.py
"""Schema-constrained decoding.

The base model distribution is masked to the actions that keep the decoded
prefix inside the schema's validity space and renormalized, so a completed
key can only ever be a schema key.
"""
import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from memory import get_logger
from memory.errors import EmptyInput, EmptySchema, InvalidPrefix, StaleSchema
from memory.text_model import END_OF_KEY, RESERVED_IDS, UNKNOWN

logger = get_logger(__name__)

SEARCH_STRATEGIES = ("best_first", "stepwise")


@dataclass(frozen=True)
class ConstrainedDistribution:
    """Renormalized distribution over the allowed actions, actions in ascending id order."""
    actions: tuple
    probs: np.ndarray
    logprobs: np.ndarray
    all_mass_pruned: bool = False

    def as_dict(self):
        return {action: float(p) for action, p in zip(self.actions, self.probs)}

    def logprob(self, action):
        try:
            return float(self.logprobs[self.actions.index(action)])
        except ValueError:
            return -np.inf

    def argmax(self):
        """Highest-probability action, lowest id on ties."""
        return self.actions[int(np.argmax(self.probs))]


@dataclass(frozen=True)
class BeamHypothesis:
    tokens: tuple
    cum_logprob: float
    finished: bool = False
    fallback: bool = False


@dataclass(frozen=True)
class ScoredKey:
    concept: int
    tokens: tuple
    cum_logprob: float
    fallback: bool = False


def constrained_distribution(lm, schema, context, prefix, allow_unknown=False):
    """Mask the model distribution to the schema and renormalize it.

    The support is allowed_next(prefix) plus END_OF_KEY when the prefix is a
    complete key. With `allow_unknown`, UNKNOWN is added as an escape action at
    the empty prefix only. If the model puts -inf on every allowed action the
    result is uniform over them and `all_mass_pruned` is set.
    """
    prefix = tuple(prefix)
    children, may_terminate = schema.allowed_next(prefix)
    actions = set(children)
    if may_terminate:
        actions.add(END_OF_KEY)
    if allow_unknown and not prefix:
        actions.add(UNKNOWN)
    actions = tuple(sorted(actions))

    base = lm.next_logprobs(context, prefix)
    selected = np.asarray(base, dtype=np.float64)[list(actions)]
    top = selected.max()
    if top == -np.inf:
        logger.warning(
            f"⚠️ Model assigned -inf to all {len(actions)} allowed actions after prefix {prefix}; "
            "falling back to uniform"
        )
        logprobs = np.full(len(actions), -np.log(len(actions)))
        return ConstrainedDistribution(actions, np.exp(logprobs), logprobs, all_mass_pruned=True)

    shifted = selected - top
    log_z = np.log(np.exp(shifted).sum())
    logprobs = shifted - log_z
    probs = np.exp(logprobs)
    probs = probs / probs.sum()
    return ConstrainedDistribution(actions, probs, logprobs)


def _check_generation(schema, generation):
    if schema.generation != generation:
        raise StaleSchema(
            f"schema changed during search (generation {generation} -> {schema.generation})"
        )


def _expand(lm, schema, context, hyp, max_len):
    """Children of a live hypothesis: finished keys and longer live prefixes."""
    dist = constrained_distribution(lm, schema, context, hyp.tokens)
    fallback = hyp.fallback or dist.all_mass_pruned
    children = []
    for action, logprob in zip(dist.actions, dist.logprobs):
        score = hyp.cum_logprob + float(logprob)
        if action == END_OF_KEY:
            children.append(BeamHypothesis(hyp.tokens, score, finished=True, fallback=fallback))
        elif len(hyp.tokens) < max_len:
            children.append(BeamHypothesis(hyp.tokens + (int(action),), score, fallback=fallback))
    return children


def _rank(hyp):
    # finished before live on equal (score, tokens)
    return (-hyp.cum_logprob, hyp.tokens, not hyp.finished)


def _best_first(lm, schema, context, beam_width, max_len, generation):
    order = itertools.count()
    start = BeamHypothesis((), 0.0)
    frontier = [(_rank(start), next(order), start)]
    results = []
    while frontier and len(results) < beam_width:
        _, _, hyp = heapq.heappop(frontier)
        if hyp.finished:
            results.append(hyp)
            continue
        _check_generation(schema, generation)
        for child in _expand(lm, schema, context, hyp, max_len):
            heapq.heappush(frontier, (_rank(child), next(order), child))
    return results


def _stepwise(lm, schema, context, beam_width, max_len, generation):
    pool = [BeamHypothesis((), 0.0)]
    while any(not hyp.finished for hyp in pool):
        _check_generation(schema, generation)
        candidates = [hyp for hyp in pool if hyp.finished]
        for hyp in pool:
            if not hyp.finished:
                candidates.extend(_expand(lm, schema, context, hyp, max_len))
        pool = sorted(candidates, key=_rank)[:beam_width]
    return pool


def constrained_beam_search(lm, schema, context, beam_width, max_len, strategy="best_first"):
    """Decode up to `beam_width` distinct schema keys ranked by cumulative log-probability.

    `best_first` pops hypotheses from a priority frontier; because masked
    log-probabilities are never positive, keys come out in exact rank order.
    `stepwise` keeps the top-`beam_width` partial sequences per step, finished
    keys staying in the pool with frozen scores. Ties break on token ids.
    """
    if len(schema) == 0:
        raise EmptySchema("schema is empty; accommodate before searching")
    if beam_width < 1:
        raise ValueError("beam width must be at least 1")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if strategy not in SEARCH_STRATEGIES:
        raise ValueError(f"unknown search strategy {strategy!r}")

    generation = schema.generation
    search = _best_first if strategy == "best_first" else _stepwise
    finished = search(lm, schema, context, beam_width, max_len, generation)
    _check_generation(schema, generation)

    keys = []
    for hyp in sorted(finished, key=_rank):
        concept = schema.lookup(hyp.tokens)
        # unreachable under the mask
        if concept is None:
            raise InvalidPrefix(f"decoder produced {hyp.tokens}, which is not a schema key")
        keys.append(ScoredKey(concept, hyp.tokens, hyp.cum_logprob, hyp.fallback))
    return keys


def unknown_selected(lm, schema, context):
    """True when UNKNOWN strictly outweighs every schema action at the first step."""
    if len(schema) == 0:
        return False
    dist = constrained_distribution(lm, schema, context, (), allow_unknown=True)
    if dist.all_mass_pruned:
        return False
    unknown_p = dist.probs[dist.actions.index(UNKNOWN)]
    others = [p for action, p in zip(dist.actions, dist.probs) if action != UNKNOWN]
    return bool(others) and unknown_p > max(others)


def free_generate(lm, context, max_keys, max_len):
    """Greedy decoding without the schema mask (the accommodation pathway).

    Each key starts from the empty prefix and ends at END_OF_KEY or `max_len`
    tokens. A key's first token is banned for later keys so repeated greedy
    passes yield distinct keys. UNKNOWN is never generated. END_OF_KEY as a
    first action, or no action with finite mass, ends generation.
    """
    if max_keys < 1:
        raise ValueError("max_keys must be at least 1")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")

    keys = []
    banned_first = set()
    while len(keys) < max_keys:
        prefix = ()
        while len(prefix) < max_len:
            logprobs = np.array(lm.next_logprobs(context, prefix), dtype=np.float64)
            logprobs[UNKNOWN] = -np.inf
            if not prefix and banned_first:
                logprobs[list(banned_first)] = -np.inf
            action = int(np.argmax(logprobs))
            if logprobs[action] == -np.inf or action == END_OF_KEY:
                break
            prefix = prefix + (action,)
        if not prefix:
            break
        banned_first.add(prefix[0])
        keys.append(prefix)
    return keys


def _step_logprobs(lm, schema, context, key):
    key = tuple(key)
    if key and key[-1] == END_OF_KEY:
        key = key[:-1]
    if not schema.contains(key) or any(t in RESERVED_IDS for t in key):
        raise InvalidPrefix(f"{key} is not a schema key")
    steps = []
    for position, action in enumerate(key + (END_OF_KEY,)):
        dist = constrained_distribution(lm, schema, context, key[:position])
        steps.append(dist.logprob(action))
    return steps


def key_logprob(lm, schema, context, key):
    """Cumulative constrained log-probability of a schema key, END_OF_KEY included."""
    total = 0.0
    for logprob in _step_logprobs(lm, schema, context, key):
        total += logprob
    return total


def sequence_perplexity(lm, schema, context, keys):
    """exp of the negative mean constrained log-probability over every decoding step.

    Steps include each key's END_OF_KEY decision.
    """
    keys = [tuple(key) for key in keys]
    if not keys:
        raise EmptyInput("perplexity needs at least one key")
    steps = []
    for key in keys:
        steps.extend(_step_logprobs(lm, schema, context, key))
    return float(np.exp(-sum(steps) / len(steps)))

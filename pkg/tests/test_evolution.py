import json
import logging
import math

import pytest

from conftest import FIXTURES, make_vocab, table_lm
from memory.errors import EmptyText, LanguageModelError
from memory.evolution import (
    EvolutionConfig,
    process_turn,
    should_accommodate,
    validate_candidate,
)
from memory.language_model import TableEntry, TableLM, UniformLM
from memory.schema_trie import CognitiveSchema
from memory.snapshot import render_snapshot
from memory.state import EngineState
from memory.text_model import END_OF_KEY, UNKNOWN, Vocabulary

TRACE_CONFIG = EvolutionConfig(perplexity_threshold=1.5, assim_beam=2)


def _replay(records, lm, cfg=TRACE_CONFIG):
    state = EngineState(lm.vocab, CognitiveSchema())
    reports, sizes, generations = [], [], []
    for record in records:
        reports.append(process_turn(state, record, lm, cfg))
        sizes.append(len(state.schema))
        generations.append(state.schema.generation)
    return state, reports, sizes, generations


def _fresh_lm():
    return TableLM.from_file(Vocabulary(), FIXTURES / "garden_jazz_lm.toml")


def test_garden_jazz_trace(garden_jazz_records, garden_jazz_lm):
    trace = json.loads((FIXTURES / "garden_jazz_trace.json").read_text(encoding="utf-8"))
    state, reports, sizes, _ = _replay(garden_jazz_records, garden_jazz_lm)

    assert sizes == trace["schema_sizes"]
    assert [state.key_text(c) for c in range(len(state.schema))] == trace["keys"]
    for report, expected in zip(reports, trace["reports"], strict=True):
        assert report.turn_id == expected["turn_id"]
        assert sorted(report.assimilated) == expected["assimilated"]
        assert sorted(report.accommodated) == expected["accommodated"]
        assert report.triggered_accommodation == expected["triggered"]
        assert report.unknown_selected == expected["unknown_selected"]
        if expected["perplexity"] is None:
            assert report.perplexity is None
        else:
            assert report.perplexity == pytest.approx(expected["perplexity"])

    assert state.graph.n_turns == trace["n_turns"]
    assert {str(c): n for c, n in state.graph.df.items()} == trace["df"]
    assert state.graph.to_state()["cooc"] == trace["cooc"]
    assert {str(c): ids for c, ids in state.store.links.items()} == trace["links"]


def test_trace_rejections(garden_jazz_records, garden_jazz_lm):
    state, reports, _, _ = _replay(garden_jazz_records, garden_jazz_lm)
    rejected = [[state.vocab.detokenize(seq) for seq in report.rejected] for report in reports]
    assert rejected == [[], [], ["garden"], ["vegetable"], [], ["jazz", "concerts", "garden"]]


def test_report_description(garden_jazz_records, garden_jazz_lm):
    state, reports, _, _ = _replay(garden_jazz_records[:2], garden_jazz_lm)
    assert reports[0].describe(state.key_text) == (
        "turn 0: assimilated [-] accommodated [garden, vegetable] perplexity n/a accommodation yes"
    )
    assert reports[1].describe(state.key_text) == (
        "turn 1: assimilated [garden, vegetable] accommodated [-] perplexity 1.0308 accommodation no"
    )


def test_schema_untouched_on_assimilation_only_turns(garden_jazz_records, garden_jazz_lm):
    _, reports, _, generations = _replay(garden_jazz_records, garden_jazz_lm)
    for i, report in enumerate(reports[1:], start=1):
        if not report.triggered_accommodation:
            assert generations[i] == generations[i - 1]


def test_replay_is_deterministic(garden_jazz_records):
    first, _, _, _ = _replay(garden_jazz_records, _fresh_lm())
    second, _, _, _ = _replay(garden_jazz_records, _fresh_lm())
    assert render_snapshot(first) == render_snapshot(second)


def test_assimilation_ablation_always_accommodates(garden_jazz_records, garden_jazz_lm):
    cfg = EvolutionConfig(perplexity_threshold=1.5, assim_beam=2, assimilation_enabled=False)
    state, reports, _, _ = _replay(garden_jazz_records, garden_jazz_lm, cfg)
    assert all(r.triggered_accommodation for r in reports)
    assert all(not r.assimilated and r.perplexity is None for r in reports)
    assert [state.key_text(c) for c in range(len(state.schema))] == [
        "garden", "vegetable", "compost", "tomatoes", "jazz", "concerts", "weeding", "festival",
    ]


@pytest.mark.parametrize("perplexity,unknown,empty,expected", [
    (None, False, True, True),
    (1.2, False, True, True),
    (1.2, False, False, False),
    (1.5, False, False, False),
    (1.5000001, False, False, True),
    (1.0, True, False, True),
    (None, False, False, False),
])
def test_accommodation_truth_table(perplexity, unknown, empty, expected):
    assert should_accommodate(perplexity, unknown, empty, TRACE_CONFIG) is expected


def test_validate_candidate_rules():
    vocab = make_vocab(["the", "garden", "vegetable", "patch", "big"])
    schema = CognitiveSchema()
    schema.insert_key((vocab.lookup("garden"),))
    cfg = EvolutionConfig(max_key_len=2, min_key_len=1)
    ids = vocab.lookup
    assert validate_candidate((ids("vegetable"),), cfg, schema, vocab)
    assert validate_candidate((ids("vegetable"), ids("patch")), cfg, schema, vocab)
    assert not validate_candidate((ids("garden"),), cfg, schema, vocab)
    assert not validate_candidate((ids("the"),), cfg, schema, vocab)
    assert not validate_candidate((ids("vegetable"), ids("the")), cfg, schema, vocab)
    assert not validate_candidate((ids("big"), ids("vegetable"), ids("patch")), cfg, schema, vocab)
    assert not validate_candidate((), cfg, schema, vocab)
    assert not validate_candidate((UNKNOWN,), cfg, schema, vocab)
    assert not validate_candidate((99,), cfg, schema, vocab)
    strict = EvolutionConfig(max_key_len=2, min_key_len=2)
    assert not validate_candidate((ids("vegetable"),), strict, schema, vocab)


def test_stopwords_are_case_insensitive():
    cfg = EvolutionConfig(stopwords={"Garden"})
    vocab = make_vocab(["garden"])
    assert not validate_candidate((2,), cfg, CognitiveSchema(), vocab)


@pytest.mark.parametrize("kwargs", [
    {"perplexity_threshold": 1.0},
    {"assim_beam": 0},
    {"max_novel_keys": 0},
    {"min_key_len": 0},
    {"min_key_len": 3, "max_key_len": 2},
    {"search_strategy": "greedy"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EvolutionConfig(**kwargs)


def test_stopword_candidates_are_rejected_on_first_turn():
    vocab = Vocabulary()
    lm = table_lm(vocab, [("*", {"the": 0.6, "garden": 0.3, "<eok>": 0.1})])
    state = EngineState(vocab, CognitiveSchema())
    report = process_turn(state, {"session_id": "s", "speaker": "u", "text": "the garden"}, lm, EvolutionConfig())
    assert [state.key_text(c) for c in report.accommodated] == ["garden"]
    assert [vocab.detokenize(seq) for seq in report.rejected] == ["the"]


def test_empty_text_leaves_state_untouched(garden_jazz_records, garden_jazz_lm):
    state, _, _, _ = _replay(garden_jazz_records[:2], garden_jazz_lm)
    before = render_snapshot(state)
    with pytest.raises(EmptyText):
        process_turn(state, {"session_id": "s", "speaker": "u", "text": "   "}, garden_jazz_lm, TRACE_CONFIG)
    assert render_snapshot(state) == before


def test_turn_without_any_valid_candidate_still_counts(caplog):
    vocab = make_vocab(["anything"])
    state = EngineState(vocab, CognitiveSchema())
    with caplog.at_level(logging.WARNING, logger="memory"):
        report = process_turn(state, {"session_id": "s", "speaker": "u", "text": "hello"}, UniformLM(vocab), TRACE_CONFIG)
    assert report.triggered_accommodation
    assert report.concepts == frozenset()
    assert state.graph.n_turns == 1
    assert len(state.store) == 1
    assert "produced no valid concept" in caplog.text


def test_accommodated_keys_respect_max_key_len():
    vocab = make_vocab(["alpha"])
    logprobs = {2: math.log(0.9), END_OF_KEY: math.log(0.1)}
    # same distribution after every prefix, so decoding only stops at the length bound
    lm = TableLM(vocab, [TableEntry("*", prefix, logprobs) for prefix in [(), (2,), (2, 2)]], default="none")
    state = EngineState(vocab, CognitiveSchema())
    report = process_turn(state, {"session_id": "s", "speaker": "u", "text": "alpha"}, lm, EvolutionConfig(max_key_len=3))
    assert [state.key_text(c) for c in report.accommodated] == ["alpha alpha alpha"]


class BrokenLM(UniformLM):
    def next_logprobs(self, context, prefix):
        raise LanguageModelError("model backend went away")


@pytest.mark.parametrize("n_before", [0, 2])
def test_lm_failure_does_not_store_the_turn(garden_jazz_records, garden_jazz_lm, n_before):
    state, _, _, _ = _replay(garden_jazz_records[:n_before], garden_jazz_lm)
    links = {concept: list(turn_ids) for concept, turn_ids in state.store.links.items()}
    with pytest.raises(LanguageModelError):
        process_turn(state, {"session_id": "s", "speaker": "u", "text": "jazz in the garden"},
                     BrokenLM(state.vocab), TRACE_CONFIG)
    assert len(state.store) == n_before
    assert state.graph.n_turns == n_before
    assert state.store.links == links

    report = process_turn(state, garden_jazz_records[n_before], garden_jazz_lm, TRACE_CONFIG)
    assert report.turn_id == n_before
    assert len(state.store) == state.graph.n_turns == n_before + 1

import pytest

from memory.errors import EmptyText, UnknownConcept, UnknownTurn
from memory.memory_store import MemoryStore, Turn
from memory.schema_trie import CognitiveSchema


@pytest.fixture
def store():
    schema = CognitiveSchema()
    for key in [(2,), (3,), (4,)]:
        schema.insert_key(key)
    return MemoryStore(schema)


def test_turn_ids_are_dense(store):
    assert store.add_turn("s1", "alice", "first") == 0
    assert store.add_turn("s1", "bob", "second", "2024-01-01T00:00:00") == 1
    assert store.get_turn(1) == Turn(1, "s1", "bob", "second", "2024-01-01T00:00:00")
    assert len(store) == 2


@pytest.mark.parametrize("text", ["", "   ", None])
def test_empty_text_is_rejected_without_mutation(store, text):
    with pytest.raises(EmptyText):
        store.add_turn("s1", "alice", text)
    assert len(store) == 0


def test_discard_last_only_undoes_an_unlinked_tail(store):
    store.add_turn("s", "u", "a")
    store.add_turn("s", "u", "b")
    assert store.next_turn_id == 2
    with pytest.raises(UnknownTurn):
        store.discard_last(0)
    store.link(1, 1)
    with pytest.raises(ValueError):
        store.discard_last(1)
    store.links.clear()
    store.discard_last(1)
    assert store.next_turn_id == 1
    assert store.add_turn("s", "u", "c") == 1


def test_get_unknown_turn(store):
    with pytest.raises(UnknownTurn):
        store.get_turn(0)
    with pytest.raises(UnknownTurn):
        store.get_turn("0")


def test_link_is_idempotent_and_sorted(store):
    for text in ["a", "b", "c"]:
        store.add_turn("s", "u", text)
    store.link(0, 2)
    store.link(0, 0)
    store.link(0, 2)
    assert store.turns_for(0) == [0, 2]
    assert store.turns_for(1) == []


def test_link_validates_both_ends(store):
    store.add_turn("s", "u", "a")
    with pytest.raises(UnknownConcept):
        store.link(9, 0)
    with pytest.raises(UnknownTurn):
        store.link(0, 5)
    with pytest.raises(UnknownConcept):
        store.turns_for(9)


def test_entries_for_is_a_chronological_union(store):
    for text in ["a", "b", "c", "d"]:
        store.add_turn("s", "u", text)
    store.link(0, 3)
    store.link(0, 1)
    store.link(1, 1)
    store.link(1, 0)
    assert [t.turn_id for t in store.entries_for([0, 1])] == [0, 1, 3]
    assert store.entries_for([]) == []
    assert store.entries_for([2]) == []


def test_turn_frame_columns(store):
    store.add_turn("s1", "alice", "hello")
    frame = store.turn_frame()
    assert frame.columns.tolist() == ["turn_id", "session_id", "speaker", "text", "timestamp"]
    assert frame.loc[0, "text"] == "hello"
    assert MemoryStore(store.schema).turn_frame().empty


def test_state_round_trip(store):
    store.add_turn("s1", "alice", "hello")
    store.add_turn("s1", "bob", "world", "2024-05-01T10:00:00")
    store.link(2, 1)
    store.link(0, 0)
    restored = MemoryStore.from_state(store.schema, store.to_state())
    assert restored.turns == store.turns
    assert restored.links == store.links


def test_state_with_gaps_is_rejected(store):
    state = {"turns": [{"turn_id": 1, "session_id": "s", "speaker": "u", "text": "x"}], "links": []}
    with pytest.raises(UnknownTurn):
        MemoryStore.from_state(store.schema, state)

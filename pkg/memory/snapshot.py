# memory/snapshot.py
"""Single-file engine snapshots.

The file is one UTF-8 JSON document::

    {"format": "schema-memory-snapshot", "version": 1,
     "checksum": "<sha256 of the canonical payload>", "payload": {...}}

written with sorted keys and a two-space indent, so saving the same state
twice gives byte-identical files. The payload holds the vocabulary, schema
keys as token strings, graph counts, turns and concept links.
"""
import hashlib
import json
import os
import tempfile
from pathlib import Path

import jsonschema

from memory import get_logger
from memory.associative_graph import AssociativeGraph
from memory.errors import CorruptSnapshot, MemoryEngineError, SnapshotIOError, VersionMismatch
from memory.memory_store import MemoryStore
from memory.schema_trie import CognitiveSchema
from memory.state import EngineState
from memory.text_model import Vocabulary

logger = get_logger(__name__)

SNAPSHOT_FORMAT = "schema-memory-snapshot"
SNAPSHOT_VERSION = 1

_INT_PAIR = {"type": "array", "items": {"type": "integer", "minimum": 0}}

PAYLOAD_SCHEMA = {
    "type": "object",
    "required": ["vocabulary", "word_pattern", "schema", "graph", "store"],
    "properties": {
        "vocabulary": {"type": "array", "items": {"type": "string"}},
        "word_pattern": {"type": "string"},
        "schema": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["concept", "key"],
                "properties": {
                    "concept": {"type": "integer", "minimum": 0},
                    "key": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                },
            },
        },
        "graph": {
            "type": "object",
            "required": ["n_turns", "df", "cooc"],
            "properties": {
                "n_turns": {"type": "integer", "minimum": 0},
                "df": {"type": "array", "items": {**_INT_PAIR, "minItems": 2, "maxItems": 2}},
                "cooc": {"type": "array", "items": {**_INT_PAIR, "minItems": 3, "maxItems": 3}},
            },
        },
        "store": {
            "type": "object",
            "required": ["turns", "links"],
            "properties": {
                "turns": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["turn_id", "session_id", "speaker", "text"],
                        "properties": {
                            "turn_id": {"type": "integer", "minimum": 0},
                            "session_id": {"type": "string"},
                            "speaker": {"type": "string"},
                            "text": {"type": "string", "minLength": 1},
                            "timestamp": {"type": ["string", "null"]},
                        },
                    },
                },
                "links": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "prefixItems": [{"type": "integer", "minimum": 0}, _INT_PAIR],
                    },
                },
            },
        },
    },
}


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _checksum(payload):
    return hashlib.sha256(_canonical(payload)).hexdigest()


def build_payload(state):
    vocab = state.vocab
    return {
        "vocabulary": vocab.to_list(),
        "word_pattern": vocab.word_pattern,
        "schema": [
            {"concept": concept, "key": [vocab.token(t) for t in seq]}
            for concept, seq in state.schema.enumerate_keys()
        ],
        "graph": state.graph.to_state(),
        "store": state.store.to_state(),
    }


def render_snapshot(state):
    payload = build_payload(state)
    document = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_snapshot(path, state):
    """Write the engine state to `path` atomically (temp file then rename)."""
    path = Path(path)
    text = render_snapshot(state)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        raise SnapshotIOError(f"cannot write snapshot {path}: {e}") from e
    logger.info(f"✅ Snapshot saved to {path} ({len(state.schema)} concepts, {len(state.store)} turns)")
    return path


def parse_snapshot(text, source="<snapshot>"):
    """Verify and decode snapshot text into an EngineState."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"❌ Snapshot {source} is not valid JSON: {e}")
        raise CorruptSnapshot(f"{source} is not a readable snapshot: {e}") from e
    if not isinstance(document, dict) or document.get("format") != SNAPSHOT_FORMAT:
        logger.error(f"❌ Snapshot {source} has no {SNAPSHOT_FORMAT!r} header")
        raise CorruptSnapshot(f"{source} is not a {SNAPSHOT_FORMAT} file")
    version = document.get("version")
    if version != SNAPSHOT_VERSION:
        logger.error(f"❌ Snapshot {source} has version {version!r}, expected {SNAPSHOT_VERSION}")
        raise VersionMismatch(f"{source} has snapshot version {version!r}; this engine reads {SNAPSHOT_VERSION}")
    payload = document.get("payload")
    if not isinstance(payload, dict) or document.get("checksum") != _checksum(payload):
        logger.error(f"❌ Snapshot {source} failed its checksum")
        raise CorruptSnapshot(f"{source} failed checksum verification")
    try:
        jsonschema.validate(payload, PAYLOAD_SCHEMA)
    except jsonschema.ValidationError as e:
        location = ".".join(str(part) for part in e.absolute_path) or "<root>"
        raise CorruptSnapshot(f"{source}: invalid payload at {location}: {e.message}") from e
    return _restore(payload, source)


def _restore(payload, source):
    try:
        vocab = Vocabulary.from_list(payload["vocabulary"], payload["word_pattern"])
        entries = []
        for row in payload["schema"]:
            seq = []
            for word in row["key"]:
                token_id = vocab.lookup(word)
                if token_id is None:
                    raise CorruptSnapshot(f"{source}: key token {word!r} missing from the vocabulary")
                seq.append(token_id)
            entries.append((row["concept"], tuple(seq)))
        schema = CognitiveSchema.from_keys(entries)
        graph = AssociativeGraph.from_state(schema, payload["graph"])
        store = MemoryStore.from_state(schema, payload["store"])
    except CorruptSnapshot:
        raise
    except (MemoryEngineError, ValueError, KeyError, TypeError) as e:
        raise CorruptSnapshot(f"{source}: inconsistent snapshot state: {e}") from e
    return EngineState(vocab, schema, graph, store)


def load_snapshot(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SnapshotIOError(f"snapshot not found: {path}") from e
    except UnicodeDecodeError as e:
        raise CorruptSnapshot(f"{path} is not UTF-8 text: {e}") from e
    except OSError as e:
        raise SnapshotIOError(f"cannot read snapshot {path}: {e}") from e
    state = parse_snapshot(text, source=str(path))
    logger.info(f"✅ Snapshot loaded from {path} ({len(state.schema)} concepts, {len(state.store)} turns)")
    return state

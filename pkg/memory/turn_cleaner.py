# memory/turn_cleaner.py
import re

from dateutil import parser as date_parser

from memory.errors import TranscriptError

REQUIRED_FIELDS = ("session_id", "speaker", "text")
KNOWN_FIELDS = frozenset(REQUIRED_FIELDS + ("turn_id", "timestamp"))


def clean_field(value):
    """Strip a string field and collapse internal runs of whitespace."""
    return re.sub(r"\s+", " ", str(value)).strip()


def clean_timestamp(value, path=None, line_no=None):
    """Normalize an ISO-8601 timestamp, or None when absent."""
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    try:
        return date_parser.isoparse(str(value).strip()).isoformat()
    except (ValueError, OverflowError) as e:
        raise TranscriptError(f"invalid ISO-8601 timestamp {value!r}: {e}", path=path, line_no=line_no) from e


def clean_turn_record(raw, path=None, line_no=None):
    """
    Validate and normalize one transcript record.
    Returns a dict with session_id, speaker, text, timestamp, turn_id (None if
    absent) and the source location used in later error messages.
    """
    if not isinstance(raw, dict):
        raise TranscriptError("record must be a JSON object", path=path, line_no=line_no)
    for name in REQUIRED_FIELDS:
        if name not in raw or raw[name] is None:
            raise TranscriptError(f"missing field {name!r}", path=path, line_no=line_no)
        if not isinstance(raw[name], (str, int)) or isinstance(raw[name], bool):
            raise TranscriptError(f"field {name!r} must be a string", path=path, line_no=line_no)
    unknown = sorted(set(raw) - KNOWN_FIELDS)
    if unknown:
        raise TranscriptError(f"unknown field(s) {', '.join(unknown)}", path=path, line_no=line_no)

    text = clean_field(raw["text"])
    if not text:
        raise TranscriptError("field 'text' is empty", path=path, line_no=line_no)

    turn_id = raw.get("turn_id")
    if turn_id is not None and (not isinstance(turn_id, int) or isinstance(turn_id, bool) or turn_id < 0):
        raise TranscriptError("field 'turn_id' must be a non-negative integer", path=path, line_no=line_no)

    return {
        "session_id": clean_field(raw["session_id"]),
        "speaker": clean_field(raw["speaker"]),
        "text": text,
        "timestamp": clean_timestamp(raw.get("timestamp"), path=path, line_no=line_no),
        "turn_id": turn_id,
        "source": str(path) if path is not None else None,
        "line_no": line_no,
    }

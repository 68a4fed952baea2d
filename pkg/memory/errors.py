# memory/errors.py


class MemoryEngineError(Exception):
    """Base class for every error raised by the memory engine."""


class InvalidToken(MemoryEngineError, ValueError):
    pass


class EmptyKey(MemoryEngineError, ValueError):
    pass


class InvalidPrefix(MemoryEngineError, ValueError):
    pass


class EmptySchema(MemoryEngineError):
    """The schema holds no keys yet; the caller must accommodate first."""


class StaleSchema(MemoryEngineError):
    """The schema changed while a search was reading it."""


class UnknownConcept(MemoryEngineError, KeyError):
    pass


class UnknownTurn(MemoryEngineError, KeyError):
    pass


class ConceptNeverObserved(MemoryEngineError):
    pass


class IsolatedConcept(MemoryEngineError):
    pass


class EmptyText(MemoryEngineError, ValueError):
    pass


class EmptyInput(MemoryEngineError, ValueError):
    pass


class LanguageModelError(MemoryEngineError):
    pass


class ConfigError(MemoryEngineError):
    def __init__(self, message, key_path=None):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class TranscriptError(MemoryEngineError):
    def __init__(self, message, path=None, line_no=None):
        self.path = path
        self.line_no = line_no
        location = ""
        if path is not None:
            location = f"{path}"
        if line_no is not None:
            location = f"{location}:{line_no}" if location else f"line {line_no}"
        super().__init__(f"{location}: {message}" if location else message)


class SnapshotError(MemoryEngineError):
    pass


class SnapshotIOError(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass


class CorruptSnapshot(SnapshotError):
    pass

# memory/config.py
"""Engine configuration: TOML on disk, validated with jsonschema, dataclasses in memory.

Resolution order is the explicit path, then the SCHEMA_MEMORY_CONFIG
environment variable, then built-in defaults.
"""
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import toml

from memory import get_logger
from memory.associative_graph import Sample, TopK
from memory.constrained_decoder import SEARCH_STRATEGIES
from memory.errors import ConfigError
from memory.evolution import DEFAULT_STOPWORDS, EvolutionConfig
from memory.recall_pipeline import SEED_STRATEGIES, RecallConfig
from memory.text_model import DEFAULT_WORD_PATTERN

logger = get_logger(__name__)

CONFIG_ENV_VAR = "SCHEMA_MEMORY_CONFIG"
DEFAULT_SNAPSHOT_PATH = "memory_snapshot.json"
LM_KINDS = ("uniform", "mock-unigram", "mock-table")

_POSITIVE_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "log_level": {"enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]},
        "snapshot_path": {"type": "string", "minLength": 1},
        "tokenizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"word_pattern": {"type": "string", "minLength": 1}},
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "perplexity_threshold": {"type": "number", "exclusiveMinimum": 1},
                "assim_beam": _POSITIVE_INT,
                "max_novel_keys": _POSITIVE_INT,
                "max_key_len": _POSITIVE_INT,
                "min_key_len": _POSITIVE_INT,
                "stopwords": {"type": "array", "items": {"type": "string"}},
                "extra_stopwords": {"type": "array", "items": {"type": "string"}},
                "assimilation_enabled": {"type": "boolean"},
                "search_strategy": {"enum": list(SEARCH_STRATEGIES)},
            },
        },
        "recall": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beam": _POSITIVE_INT,
                "hops": {"type": "integer", "minimum": 0},
                "temperature": {"type": "number", "exclusiveMinimum": 0},
                "mode": {"enum": ["topk", "sample"]},
                "topk": _POSITIVE_INT,
                "sample_count": _POSITIVE_INT,
                "seed": {"type": "integer"},
                "k_max": _POSITIVE_INT,
                "char_budget": {"type": "integer", "minimum": 0},
                "seed_strategy": {"enum": list(SEED_STRATEGIES)},
                "search_strategy": {"enum": list(SEARCH_STRATEGIES)},
            },
        },
        "language_model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(LM_KINDS)},
                "path": {"type": "string", "minLength": 1},
                "context_boost": {"type": "number", "minimum": 0},
                "stop_prob": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "if": {"properties": {"kind": {"const": "mock-table"}}},
            "then": {"required": ["path"]},
        },
    },
}


@dataclass(frozen=True)
class TokenizerConfig:
    word_pattern: str = DEFAULT_WORD_PATTERN


@dataclass(frozen=True)
class LanguageModelConfig:
    kind: str = "uniform"
    path: Path | None = None
    context_boost: float = 0.0
    stop_prob: float = 0.5


@dataclass(frozen=True)
class EngineConfig:
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    recall: RecallConfig = field(default_factory=RecallConfig)
    language_model: LanguageModelConfig = field(default_factory=LanguageModelConfig)
    snapshot_path: Path = Path(DEFAULT_SNAPSHOT_PATH)
    log_level: str | None = None
    source: Path | None = None

    def with_recall(self, **overrides):
        """Copy with RecallConfig fields replaced; None values are ignored."""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        if not overrides:
            return self
        return dataclasses.replace(self, recall=dataclasses.replace(self.recall, **overrides))


def _error_path(error):
    return ".".join(str(part) for part in error.absolute_path) or "<root>"


def validate_config(document):
    """Raise ConfigError naming every violation as `section.key: message`."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: [str(p) for p in e.absolute_path])
    if not errors:
        return
    if len(errors) == 1:
        raise ConfigError(errors[0].message, key_path=_error_path(errors[0]))
    raise ConfigError("\n".join(f"{_error_path(e)}: {e.message}" for e in errors))


def _resolve(base, value):
    path = Path(value)
    if base is not None and not path.is_absolute():
        path = base / path
    return path


def _build(section, factory, values):
    try:
        return factory(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), key_path=section) from e


def config_from_mapping(document, base_dir=None, source=None):
    validate_config(document)

    tokenizer = TokenizerConfig(**document.get("tokenizer", {}))

    evolution_values = dict(document.get("evolution", {}))
    extra = evolution_values.pop("extra_stopwords", [])
    stopwords = set(evolution_values.pop("stopwords", DEFAULT_STOPWORDS)) | set(extra)
    evolution = _build("evolution", EvolutionConfig, {**evolution_values, "stopwords": frozenset(stopwords)})

    recall_values = dict(document.get("recall", {}))
    mode = recall_values.pop("mode", "topk")
    topk = recall_values.pop("topk", 3)
    sample_count = recall_values.pop("sample_count", 1)
    seed = recall_values.pop("seed", 0)
    recall_values["mode"] = TopK(topk) if mode == "topk" else Sample(sample_count, seed)
    recall = _build("recall", RecallConfig, recall_values)

    lm_values = dict(document.get("language_model", {}))
    if "path" in lm_values:
        lm_values["path"] = _resolve(base_dir, lm_values["path"])
    language_model = LanguageModelConfig(**lm_values)

    return EngineConfig(
        tokenizer=tokenizer,
        evolution=evolution,
        recall=recall,
        language_model=language_model,
        snapshot_path=_resolve(base_dir, document.get("snapshot_path", DEFAULT_SNAPSHOT_PATH)),
        log_level=document.get("log_level"),
        source=source,
    )


def resolve_config_path(explicit=None):
    if explicit:
        return Path(explicit)
    env_path = os.environ.get(CONFIG_ENV_VAR)
    return Path(env_path) if env_path else None


def load_config(path=None):
    """Load the engine config from `path`, the environment override, or defaults."""
    path = resolve_config_path(path)
    if path is None:
        logger.debug("No config file given; using built-in defaults")
        return EngineConfig()
    try:
        document = toml.load(path)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except toml.TomlDecodeError as e:
        raise ConfigError(f"{path} is not valid TOML: {e}") from e
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    config = config_from_mapping(document, base_dir=path.resolve().parent, source=path)
    logger.info(f"✅ Config loaded from {path}")
    return config

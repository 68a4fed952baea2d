# memory/data_loader.py
from collections import Counter

from memory import get_logger
from memory.errors import ConfigError
from memory.language_model import TableLM, UniformLM, UnigramLM
from memory.text_model import split_words
from memory.transcript_reader import TranscriptReader

logger = get_logger(__name__)


def load_transcript(path, progress=False):
    """All cleaned turn records of a transcript file or folder."""
    reader = TranscriptReader(path)
    return reader.read_transcripts(progress=progress)


def corpus_counts(texts, word_pattern):
    counts = Counter()
    for text in texts:
        counts.update(split_words(text, word_pattern))
    return counts


def build_language_model(lm_config, vocab, corpus_texts=()):
    """
    Construct the configured mock model over `vocab`.
    mock-unigram without a path counts words over `corpus_texts` (the turns
    being ingested plus those already stored).
    """
    kind = lm_config.kind
    if kind == "uniform":
        return UniformLM(vocab)
    if kind == "mock-table":
        if lm_config.path is None:
            raise ConfigError("mock-table needs a path", key_path="language_model.path")
        return TableLM.from_file(vocab, lm_config.path)
    if kind == "mock-unigram":
        options = {"stop_prob": lm_config.stop_prob, "context_boost": lm_config.context_boost}
        if lm_config.path is not None:
            return UnigramLM.from_corpus(vocab, lm_config.path, **options)
        counts = corpus_counts(corpus_texts, vocab.word_pattern)
        logger.info(f"✅ Unigram counts built from {len(counts)} distinct words of the dialogue itself")
        return UnigramLM(vocab, counts, **options)
    raise ConfigError(f"unknown language model kind {kind!r}", key_path="language_model.kind")

# memory/transcript_reader.py
"""Line-delimited JSON transcripts: one turn record per line."""
import glob
import json
import os
from pathlib import Path

import pandas as pd
from tqdm import tqdm

from memory import get_logger
from memory.errors import TranscriptError
from memory.turn_cleaner import clean_turn_record

logger = get_logger(__name__)


class TranscriptReader:
    """Reads one transcript file or every `*.jsonl` file in a folder, in name order."""

    def __init__(self, path):
        self.path = Path(path)
        self.records = []
        self.loaded_files = []

    def list_transcript_files(self):
        if self.path.is_dir():
            return sorted(Path(p) for p in glob.glob(os.path.join(self.path, "*.jsonl")))
        return [self.path]

    def iter_records(self, progress=False):
        """Yield cleaned records lazily; TranscriptError names the file and 1-based line."""
        for file in self.list_transcript_files():
            try:
                handle = open(file, "rb")
            except OSError as e:
                raise TranscriptError(f"cannot open transcript: {e}", path=file) from e
            with handle:
                lines = tqdm(handle, desc=f"📖 {file.name}", unit="turn", disable=not progress)
                for line_no, raw_line in enumerate(lines, start=1):
                    try:
                        line = raw_line.decode("utf-8")
                    except UnicodeDecodeError as e:
                        raise TranscriptError(f"invalid UTF-8: {e.reason}", path=file, line_no=line_no) from e
                    if not line.strip():
                        continue
                    try:
                        raw = json.loads(line)
                    except json.JSONDecodeError as e:
                        raise TranscriptError(f"malformed JSON: {e.msg}", path=file, line_no=line_no) from e
                    yield clean_turn_record(raw, path=file, line_no=line_no)
            self.loaded_files.append(file.name)

    def read_transcripts(self, progress=False):
        self.records = []
        self.loaded_files = []
        files = self.list_transcript_files()
        logger.info(f"📂 Loading {len(files)} transcript file(s)...")
        self.records = list(self.iter_records(progress=progress))
        logger.info(f"✅ {len(self.records)} turns read from {len(self.loaded_files)} file(s)")
        return self.records

    def get_dataframe(self):
        if not self.records:
            logger.warning("⚠️ No transcript records loaded. Call `read_transcripts()` first.")
            return None
        return pd.DataFrame(self.records)

import os
import sys
import tempfile

import streamlit as st

# Add this folder to sys.path so `memory` and `dashboard` import when run via streamlit
sys.path.append(os.path.abspath(os.path.dirname(__file__)))

from dashboard.reports import (
    display_concept_report,
    display_edge_report,
    display_overview_metrics,
    display_turn_browser,
)
from memory.config import load_config
from memory.engine import MemoryEngine
from memory.errors import MemoryEngineError


def load_engine_from_upload(uploaded_file):
    """Verify an uploaded snapshot by round-tripping it through a temp file."""
    with tempfile.TemporaryDirectory() as tmp_dir:
        path = os.path.join(tmp_dir, uploaded_file.name)
        with open(path, "wb") as handle:
            handle.write(uploaded_file.getvalue())
        return MemoryEngine.load(path, load_config())


def main():
    st.set_page_config(layout="wide")
    st.title("🧠 Memory Inspector")

    if "engine" not in st.session_state:
        st.session_state.engine = None

    config = load_config()
    if st.session_state.engine is None and os.path.exists(config.snapshot_path):
        try:
            st.session_state.engine = MemoryEngine.load(config.snapshot_path, config)
        except MemoryEngineError as e:
            st.error(f"❌ Could not load {config.snapshot_path}: {e}")

    tabs = st.tabs(["📂 Load Snapshot", "🧩 Schema", "🕸️ Graph", "💬 Turns"])

    with tabs[0]:
        uploaded = st.file_uploader("Snapshot file", type=["json"])
        if uploaded is not None and st.button("Load"):
            try:
                st.session_state.engine = load_engine_from_upload(uploaded)
                st.success(f"✅ Loaded {uploaded.name}")
            except MemoryEngineError as e:
                st.error(f"❌ {e}")
        if st.session_state.engine is not None:
            display_overview_metrics(st.session_state.engine)

    engine = st.session_state.engine
    with tabs[1]:
        if engine is None:
            st.info("Load a snapshot first.")
        else:
            display_concept_report(engine)
    with tabs[2]:
        if engine is None:
            st.info("Load a snapshot first.")
        else:
            display_edge_report(engine)
    with tabs[3]:
        if engine is None:
            st.info("Load a snapshot first.")
        else:
            display_turn_browser(engine)


if __name__ == "__main__":
    main()

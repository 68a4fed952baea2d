import pandas as pd
import streamlit as st


def safe_unique_list(df, col):
    """Return a safe list of unique values (handles NaN)."""
    if df is None or col not in df.columns:
        return []
    return sorted(df[col].fillna("Unknown").astype(str).unique().tolist())


def filter_concepts(df, key_query=None, min_df=0, min_degree=0):
    """
    Filter the concept table.

    Parameters:
    - df: concept DataFrame (concept, key, df, idf, degree)
    - key_query: case-insensitive substring matched against the key
    - min_df: keep concepts observed in at least this many turns
    - min_degree: keep concepts with at least this many neighbors
    """
    filtered_df = df.copy()
    if key_query:
        filtered_df = filtered_df[filtered_df["key"].str.lower().str.contains(key_query.lower(), regex=False)]
    if min_df:
        filtered_df = filtered_df[filtered_df["df"] >= min_df]
    if min_degree:
        filtered_df = filtered_df[filtered_df["degree"] >= min_degree]
    return filtered_df.reset_index(drop=True)


def filter_edges(df, concept_keys=None, min_weight=0.0):
    """Edges touching any of `concept_keys` with weight at or above `min_weight`."""
    filtered_df = df.copy()
    if concept_keys:
        keys = [k.lower() for k in concept_keys]
        filtered_df = filtered_df[
            filtered_df["u_key"].str.lower().isin(keys) | filtered_df["v_key"].str.lower().isin(keys)
        ]
    if min_weight:
        filtered_df = filtered_df[filtered_df["weight"] >= min_weight]
    return filtered_df.reset_index(drop=True)


def _parse_timestamps(series):
    return pd.to_datetime(series, errors="coerce", utc=True, format="ISO8601")


def timestamp_range(df):
    """(first, last) calendar day among parseable turn timestamps, or None."""
    if df is None or "timestamp" not in df.columns:
        return None
    stamps = _parse_timestamps(df["timestamp"]).dropna()
    if stamps.empty:
        return None
    return stamps.min().date(), stamps.max().date()


def filter_turns(df, session_ids=None, speakers=None, text_query=None, date_filter=None):
    """Turns by session, speaker, text substring and an inclusive (start, end) day range."""
    filtered_df = df.copy()
    if session_ids:
        filtered_df = filtered_df[filtered_df["session_id"].isin(session_ids)]
    if speakers:
        filtered_df = filtered_df[filtered_df["speaker"].isin(speakers)]
    if text_query:
        filtered_df = filtered_df[filtered_df["text"].str.lower().str.contains(text_query.lower(), regex=False)]
    if date_filter and len(date_filter) == 2:
        days = _parse_timestamps(filtered_df["timestamp"]).dt.normalize()
        start = pd.to_datetime(date_filter[0], utc=True).normalize()
        end = pd.to_datetime(date_filter[1], utc=True).normalize()
        filtered_df = filtered_df[(days >= start) & (days <= end)]
    return filtered_df.reset_index(drop=True)


def turn_filter_ui(turn_df, tab_key="turns"):
    """Filter widgets for the turn browser; returns kwargs for filter_turns."""
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        session_ids = st.multiselect("Session", safe_unique_list(turn_df, "session_id"), key=f"session_{tab_key}")
    with col2:
        speakers = st.multiselect("Speaker", safe_unique_list(turn_df, "speaker"), key=f"speaker_{tab_key}")
    with col3:
        text_query = st.text_input("Text contains", key=f"text_{tab_key}")
    date_filter = None
    bounds = timestamp_range(turn_df)
    with col4:
        if bounds is None:
            st.caption("No timestamps to filter by.")
        else:
            date_range = st.date_input(
                "Date Range",
                value=bounds,
                format="YYYY-MM-DD",
                key=f"date_range_{tab_key}",
                help="Turns without a timestamp are hidden while a range is set",
            )
            if len(date_range) == 2 and tuple(date_range) != bounds:
                date_filter = (date_range[0].strftime("%Y-%m-%d"), date_range[1].strftime("%Y-%m-%d"))
    return {"session_ids": session_ids, "speakers": speakers, "text_query": text_query, "date_filter": date_filter}

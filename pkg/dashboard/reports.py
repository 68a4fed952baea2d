import streamlit as st

from dashboard.charts import degree_histogram, idf_bar, turns_per_session
from dashboard.filters import filter_concepts, filter_edges, filter_turns, turn_filter_ui
from dashboard.layouts import kpi_cards


def engine_overview(engine):
    """Headline numbers for a loaded engine."""
    n_turns = engine.graph.n_turns
    linked = sum(1 for turn_ids in engine.store.links.values() if turn_ids)
    return {
        "Turns": n_turns,
        "Concepts": len(engine.schema),
        "Edges": engine.graph.edge_count(),
        "Vocabulary": len(engine.vocab),
        "Linked Concepts": linked,
    }


def concept_table(engine):
    return engine.graph.concept_frame(engine.key_text)


def edge_table(engine):
    return engine.graph.edge_frame(engine.key_text)


def display_overview_metrics(engine):
    with st.container():
        kpi_cards(engine_overview(engine))


def display_concept_report(engine):
    """
    Concept table with df, IDF and degree, plus the IDF and degree charts.

    Parameters:
    - engine: loaded MemoryEngine
    """
    concepts = concept_table(engine)
    if concepts.empty:
        st.warning("The schema holds no concepts yet.")
        return

    col_filter1, col_filter2, col_filter3 = st.columns(3)
    with col_filter1:
        key_query = st.text_input("Key contains", key="concept_key_query")
    with col_filter2:
        min_df = st.number_input("Min df", min_value=0, value=0, step=1, key="concept_min_df")
    with col_filter3:
        min_degree = st.number_input("Min degree", min_value=0, value=0, step=1, key="concept_min_degree")
    filtered = filter_concepts(concepts, key_query=key_query, min_df=min_df, min_degree=min_degree)

    st.subheader("Concepts")
    st.dataframe(filtered, use_container_width=True)
    st.write(f"Total Concepts: {len(filtered)}")

    col_idf, col_degree = st.columns(2)
    with col_idf:
        st.plotly_chart(idf_bar(filtered), use_container_width=True)
    with col_degree:
        st.plotly_chart(degree_histogram(filtered), use_container_width=True)


def display_edge_report(engine):
    edges = edge_table(engine)
    if edges.empty:
        st.warning("No co-occurrence edges recorded yet.")
        return
    keys = sorted(set(edges["u_key"]) | set(edges["v_key"]))
    selected = st.multiselect("Touching concepts", keys, key="edge_concepts")
    min_weight = st.number_input("Min weight", min_value=0.0, value=0.0, step=0.1, key="edge_min_weight")
    filtered = filter_edges(edges, concept_keys=selected, min_weight=min_weight)
    st.subheader("Edges")
    st.dataframe(filtered.sort_values("weight", ascending=False), use_container_width=True)
    st.write(f"Total Edges: {len(filtered)}")


def display_turn_browser(engine):
    turns = engine.store.turn_frame()
    if turns.empty:
        st.warning("No turns stored yet.")
        return
    filters = turn_filter_ui(turns, tab_key="turns")
    filtered = filter_turns(turns, **filters)
    st.dataframe(filtered, use_container_width=True)
    st.write(f"Total Turns: {len(filtered)}")
    st.plotly_chart(turns_per_session(filtered), use_container_width=True)

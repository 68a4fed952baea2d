import plotly.express as px


def idf_bar(concept_df, n=10):
    top = concept_df.dropna(subset=["idf"]).sort_values(["idf", "concept"], ascending=[False, True]).head(n)
    return px.bar(top, x="key", y="idf", title=f"Top {n} Concepts by IDF")


def degree_histogram(concept_df):
    return px.histogram(concept_df, x="degree", title="Concept Degree Distribution")


def turns_per_session(turn_df):
    counts = turn_df.groupby("session_id").size().reset_index(name="Turns")
    return px.bar(counts, x="session_id", y="Turns", title="Turns per Session")

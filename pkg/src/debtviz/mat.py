"""Keyword-matching baseline: a text is flagged as debt when any token
equals one of a small set of marker words (todo, fixme, hack, xxx)."""

from .textproc import tokenize

DEFAULT_MARKERS = frozenset({"todo", "fixme", "hack", "xxx"})


def mat_baseline(text: str, markers=DEFAULT_MARKERS) -> bool:
    """True when any token of the lowercased text is a marker word."""
    marker_set = {m.lower() for m in markers}
    return any(tok in marker_set for tok in tokenize(text))

"""Keyword extraction by tracing pooled activations back to token windows.

Each pooled slot remembers which convolution window produced its maximum.
A slot's contribution to the predicted class is pooled value x head weight;
slots with positive contribution vote for their source window, overlapping
windows merge by summing scores, and the top-k surviving spans come back as
the explanation for the classification.
"""

from dataclasses import dataclass

import numpy as np

from .cnn import CnnModel, predict
from .labels import LABEL_INDEX, SatdLabel, TaskId
from .textproc import encode, tokenize


@dataclass(frozen=True)
class KeywordSpan:
    token_start: int  # inclusive token index
    token_end: int  # exclusive token index
    text: str
    score: float


def _positive_windows(model: CnnModel, ids, task: TaskId, class_idx: int,
                      n_real: int) -> list[tuple[int, int, float]]:
    """(start, end, score) for every pooled slot voting for class_idx.

    Windows are clipped to the real (non-pad) token range; windows that lie
    entirely in padding are dropped.
    """
    result = model.forward(ids, task)
    head = model.heads[task]
    contribs = result.pooled * head[:, class_idx]
    f = model.hp.filters_per_width
    out = []
    for j in np.flatnonzero(contribs > 0.0):
        w = model.hp.widths[j // f]
        start = int(result.argmax_pos[j])
        end = min(start + w, n_real)
        if start >= end:
            continue
        out.append((start, end, float(contribs[j])))
    return out


def _merge_overlaps(spans: list[tuple[int, int, float]]):
    """Union strictly overlapping [start, end) intervals, summing scores."""
    merged: list[list] = []
    for start, end, score in sorted(spans):
        if merged and start < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
            merged[-1][2] += score
        else:
            merged.append([start, end, score])
    return merged


def rank_spans(model: CnnModel, text: str, task: TaskId, class_idx: int,
               top_k: int) -> list[KeywordSpan]:
    """Top-k explanation spans for an arbitrary target class."""
    tokens = tokenize(text)
    n_real = min(len(tokens), model.hp.max_len)
    if n_real == 0:
        return []
    ids = encode(tokens, model.vocab, model.hp.max_len)
    windows = _positive_windows(model, ids, task, class_idx, n_real)
    merged = _merge_overlaps(windows)
    merged.sort(key=lambda s: (-s[2], s[0]))
    return [
        KeywordSpan(token_start=start, token_end=end,
                    text=" ".join(tokens[start:end]), score=score)
        for start, end, score in merged[:top_k]
    ]


def extract_keywords(model: CnnModel, text: str, task: TaskId,
                     top_k: int = 3) -> list[KeywordSpan]:
    """Spans explaining the model's own prediction; empty for NON_SATD."""
    pred = predict(model, text, task)
    if pred.label is SatdLabel.NON_SATD:
        return []
    return rank_spans(model, text, task, LABEL_INDEX[pred.label], top_k)

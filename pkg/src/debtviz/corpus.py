"""Training-corpus handling: the JSONL record format, a bundled starter
corpus, and a seeded synthetic generator used by tests and benchmarks."""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import EmptyCorpus
from .labels import LABELS, SatdLabel, TaskId, TASKS


@dataclass(frozen=True)
class CorpusExample:
    text: str
    task: TaskId
    label: SatdLabel


def read_corpus(path) -> list[CorpusExample]:
    """Parse a JSONL corpus ({"text", "task", "label"} per line).

    Blank lines are ignored; malformed lines raise ValueError naming the
    line number.  An empty result raises EmptyCorpus.
    """
    examples: list[CorpusExample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                examples.append(CorpusExample(
                    text=str(rec["text"]),
                    task=TaskId(rec["task"]),
                    label=SatdLabel(rec["label"]),
                ))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
    if not examples:
        raise EmptyCorpus(f"{path}: no corpus records")
    return examples


def write_corpus(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in examples:
            fh.write(json.dumps({"text": e.text, "task": e.task.value,
                                 "label": e.label.value},
                                ensure_ascii=False) + "\n")


def bundled_corpus() -> list[CorpusExample]:
    """The starter corpus shipped inside the package."""
    ref = resources.files("debtviz").joinpath("data/sample_corpus.jsonl")
    with resources.as_file(ref) as path:
        return read_corpus(path)


# One marker word per debt label.  The markers double as the keyword-baseline
# vocabulary, so on synthetic data the baseline is a perfect oracle for
# "debt vs not" and agreement measurements are meaningful.
_LABEL_MARKERS = {
    SatdLabel.CODE_DESIGN_DEBT: ("todo", "refactor"),
    SatdLabel.TEST_DEBT: ("fixme", "coverage"),
    SatdLabel.DOCUMENTATION_DEBT: ("hack", "javadoc"),
    SatdLabel.REQUIREMENT_DEBT: ("xxx", "requirement"),
}

_FILLER = (
    "the", "method", "value", "parse", "handle", "buffer", "index", "return",
    "update", "cache", "config", "stream", "file", "path", "line", "data",
    "count", "state", "init", "close", "open", "read", "write", "list",
    "map", "size", "result", "input", "output", "check",
)


def synthetic_corpus(n: int, seed: int = 0) -> list[CorpusExample]:
    """n seeded examples, labels round-robin over both tasks.

    Debt examples contain their label's marker pair at random positions in
    otherwise neutral filler text; non-debt examples are pure filler, so the
    classes are linearly separable and the marker baseline never disagrees
    with the planted truth.
    """
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n):
        label = LABELS[i % len(LABELS)]
        task = TASKS[(i // len(LABELS)) % len(TASKS)]
        words = list(rng.choice(_FILLER, size=rng.integers(4, 9)))
        if label is not SatdLabel.NON_SATD:
            marker, helper = _LABEL_MARKERS[label]
            words.insert(int(rng.integers(0, len(words) + 1)), helper)
            words.insert(int(rng.integers(0, len(words) + 1)), marker)
        examples.append(CorpusExample(" ".join(words), task, label))
    perm = rng.permutation(len(examples))
    return [examples[int(i)] for i in perm]

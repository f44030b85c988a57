"""Tokenization, vocabulary construction, and id encoding."""

import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus

PAD_ID = 0
OOV_ID = 1

# Runs of unicode alphanumerics; underscores split like any other symbol.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric; digits are tokens too."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocab:
    token_to_id: dict[str, int]
    min_freq: int = 1

    def __len__(self) -> int:
        return len(self.token_to_id) + 2  # PAD and OOV

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, OOV_ID)

    @property
    def size(self) -> int:
        return len(self)


def build_vocab(texts, min_freq: int = 1) -> Vocab:
    """Build a vocabulary from an iterable of texts.

    Tokens with frequency >= min_freq get dense ids starting at 2, assigned
    in descending-frequency order with lexicographic tie-break.  Ids 0 and 1
    are reserved for PAD and OOV.
    """
    counts: Counter[str] = Counter()
    n_texts = 0
    for text in texts:
        n_texts += 1
        counts.update(tokenize(text))
    if n_texts == 0:
        raise EmptyCorpus("no texts to build a vocabulary from")
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_freq),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocab({tok: i + 2 for i, tok in enumerate(kept)}, min_freq=min_freq)


def encode(tokens: list[str], vocab: Vocab, max_len: int) -> list[int]:
    """Map tokens to ids, truncate to max_len, right-pad with PAD."""
    ids = [vocab.id_for(t) for t in tokens[:max_len]]
    ids.extend([PAD_ID] * (max_len - len(ids)))
    return ids

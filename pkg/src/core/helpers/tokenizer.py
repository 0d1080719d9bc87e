import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.core.errors import UsageError

PAD, CLS, SEP, UNK = "[PAD]", "[CLS]", "[SEP]", "[UNK]"
RESERVED_TOKENS = (PAD, CLS, SEP, UNK)
PAD_ID, CLS_ID, SEP_ID, UNK_ID = 0, 1, 2, 3

_WHITESPACE = re.compile(r"\s+")
# a word is a run of letters/digits/underscore; every other visible char stands alone
_TOKEN = re.compile(r"\w+|[^\w\s]")


def normalize(text: str) -> str:
    """
    Uncased normalization of a question.

    Args:
        text (str): Raw text.

    Returns:
        str: Lowercased text with accents (combining marks) removed and
        whitespace collapsed to single spaces.
    """
    text = unicodedata.normalize("NFD", text.lower())
    text = "".join(ch for ch in text if unicodedata.category(ch) != "Mn")
    return _WHITESPACE.sub(" ", text).strip()


def tokenize(text: str) -> List[str]:
    """Split normalized text into words and standalone punctuation."""
    return _TOKEN.findall(normalize(text))


@dataclass(frozen=True)
class Vocab:
    """Immutable token ↔ id table. Ids 0..3 are [PAD], [CLS], [SEP], [UNK]."""

    tokens: Tuple[str, ...]

    def __post_init__(self):
        if self.tokens[: len(RESERVED_TOKENS)] != RESERVED_TOKENS:
            raise UsageError("vocab must start with the reserved tokens [PAD], [CLS], [SEP], [UNK]")
        if len(set(self.tokens)) != len(self.tokens):
            raise UsageError("vocab tokens must be unique")
        object.__setattr__(self, "_index", {tok: i for i, tok in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def to_list(self) -> List[str]:
        return list(self.tokens)

    @classmethod
    def from_list(cls, tokens: Sequence[str]) -> "Vocab":
        return cls(tuple(tokens))


def build_vocab(corpus: Iterable[str], min_freq: int = 1, max_size: int = 10_000) -> Vocab:
    """
    Build a vocabulary from a corpus of raw strings.

    Tokens with frequency >= min_freq are kept, ordered by frequency
    (descending) then token (ascending), and cut to max_size − 4 entries.

    Args:
        corpus (Iterable[str]): Raw texts.
        min_freq (int): Minimum token count.
        max_size (int): Vocabulary size including the four reserved tokens.

    Returns:
        Vocab: Deterministic for the same corpus and settings.
    """
    if max_size <= len(RESERVED_TOKENS):
        raise UsageError(f"max_size must exceed {len(RESERVED_TOKENS)}, got {max_size}")
    counts = Counter(tok for text in corpus for tok in tokenize(text))
    for reserved in RESERVED_TOKENS:
        counts.pop(reserved, None)
    kept = sorted(
        ((tok, n) for tok, n in counts.items() if n >= min_freq),
        key=lambda item: (-item[1], item[0]),
    )
    kept = kept[: max_size - len(RESERVED_TOKENS)]
    return Vocab(RESERVED_TOKENS + tuple(tok for tok, _ in kept))


@dataclass(frozen=True)
class Encoding:
    ids: Tuple[int, ...]
    mask: Tuple[int, ...]


def encode(text: str, vocab: Vocab, max_len: int) -> Encoding:
    """
    [CLS] t1 … tk [SEP] [PAD] … with right truncation to max_len − 2 tokens.
    """
    if max_len < 3:
        raise UsageError(f"max_len must be at least 3, got {max_len}")
    content = [vocab.id_of(tok) for tok in tokenize(text)][: max_len - 2]
    ids = [CLS_ID, *content, SEP_ID]
    mask = [1] * len(ids)
    padding = max_len - len(ids)
    return Encoding(ids=tuple(ids + [PAD_ID] * padding), mask=tuple(mask + [0] * padding))


def encode_batch(texts: Sequence[str], vocab: Vocab, max_len: int) -> Tuple[np.ndarray, np.ndarray]:
    """Encode texts into (ids, mask) integer arrays of shape [n x max_len]."""
    encodings = [encode(text, vocab, max_len) for text in texts]
    ids = np.array([e.ids for e in encodings], dtype=np.int64).reshape(len(encodings), max_len)
    mask = np.array([e.mask for e in encodings], dtype=np.int64).reshape(len(encodings), max_len)
    return ids, mask

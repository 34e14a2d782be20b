"""Multi-index sets for tensor-product (TP) and total-degree (TD) spaces.

Indices are kept in graded lexicographic order: lower total degree first,
ties broken by the first coordinate where two indices differ.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError

__all__ = [
    "SpaceKind",
    "IndexSet",
    "build_index_set",
    "compare_graded_lex",
    "graded_lex_key",
    "index_set_size",
]


class SpaceKind(str, Enum):
    TP = "tp"
    TD = "td"


def index_set_size(kind, q: int, d: int) -> int:
    """Cardinality of the TP or TD set, as an exact integer."""
    kind = SpaceKind(kind)
    if kind is SpaceKind.TP:
        return (q + 1) ** d
    return comb(q + d, d)


def compare_graded_lex(a: Sequence[int], b: Sequence[int]) -> int:
    """Three-way comparison in graded lexicographic order (-1, 0 or 1)."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    sa, sb = sum(a), sum(b)
    if sa != sb:
        return -1 if sa < sb else 1
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


def graded_lex_key(n: Sequence[int]) -> tuple:
    """Sort key equivalent to :func:`compare_graded_lex`."""
    return (sum(n), tuple(n))


def _compositions(total: int, d: int, cap: int) -> Iterator[tuple]:
    # lexicographically ascending compositions of `total` into d parts <= cap
    if d == 1:
        if total <= cap:
            yield (total,)
        return
    lo = max(0, total - cap * (d - 1))
    for first in range(lo, min(cap, total) + 1):
        for rest in _compositions(total - first, d - 1, cap):
            yield (first,) + rest


@dataclass(frozen=True)
class IndexSet:
    kind: SpaceKind
    q: int
    d: int
    indices: np.ndarray  # (N, d) int64, canonical order

    @property
    def cardinality(self) -> int:
        return self.indices.shape[0]

    def __len__(self):
        return self.cardinality

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.indices)

    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def position(self, n: Sequence[int]) -> int:
        """Position of multi-index ``n`` in the canonical order."""
        hits = np.flatnonzero((self.indices == np.asarray(n)).all(axis=1))
        if hits.size == 0:
            raise KeyError(tuple(n))
        return int(hits[0])


def build_index_set(kind, q: int, d: int) -> IndexSet:
    """Enumerate the TP (``max n_j <= q``) or TD (``|n| <= q``) set.

    Generation runs degree by degree, lexicographically within a degree, so
    the result is already in graded lexicographic order.
    """
    kind = SpaceKind(kind)
    if q < 0 or d < 1:
        raise ValueError(f"need q >= 0 and d >= 1, got q={q}, d={d}")
    size = index_set_size(kind, q, d)
    if size * d > sys.maxsize // 8:
        raise CapacityError(f"{kind.value.upper()}(q={q}, d={d}) has {size} indices; too large to store")

    max_degree = q if kind is SpaceKind.TD else q * d
    rows = [c for s in range(max_degree + 1) for c in _compositions(s, d, q)]
    indices = np.array(rows, dtype=np.int64).reshape(len(rows), d)
    assert indices.shape[0] == size
    indices.setflags(write=False)
    return IndexSet(kind, q, d, indices)

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence

import numpy as np

from utils.exceptions import ConfigurationError


@dataclass(frozen=True, order=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(int(entry) < 0 for entry in self.entries):
            raise ConfigurationError(f"Negative multi-index entry in {self.entries}")

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(tuple(int(entry) for entry in entries))

    @property
    def dimensions(self) -> int:
        return len(self.entries)

    @property
    def total_degree(self) -> int:
        return int(sum(self.entries))

    def __str__(self) -> str:
        return "(" + ",".join(str(entry) for entry in self.entries) + ")"


@dataclass(frozen=True)
class IndexSet:
    """Total-degree multi-indices |δ| <= N in graded order.

    Within one degree the entries are sorted in descending lexicographic
    order, so for L=3 the degree-one block reads (100),(010),(001).
    """

    dimensions: int
    max_degree: int
    indices: tuple[MultiIndex, ...]
    _positions: dict[MultiIndex, int] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        object.__setattr__(
            self,
            "_positions",
            {index: position for position, index in enumerate(self.indices)},
        )

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __getitem__(self, position: int) -> MultiIndex:
        return self.indices[position]

    def __contains__(self, delta: object) -> bool:
        return delta in self._positions

    def position_of(self, delta: MultiIndex | Sequence[int]) -> int:
        return position_of(self, delta)

    def as_array(self) -> np.ndarray:
        return np.array([index.entries for index in self.indices], dtype=int)

    def degrees(self) -> np.ndarray:
        return np.array([index.total_degree for index in self.indices], dtype=int)

    @property
    def key(self) -> tuple[int, int]:
        return self.dimensions, self.max_degree


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def build_index_set(dimensions: int, max_degree: int) -> IndexSet:
    if int(dimensions) < 1:
        raise ConfigurationError(f"Index set needs at least one dimension, got {dimensions}")
    if int(max_degree) < 0:
        raise ConfigurationError(f"Maximum degree must be nonnegative, got {max_degree}")
    dimensions = int(dimensions)
    max_degree = int(max_degree)

    indices = tuple(
        MultiIndex(entries)
        for degree in range(max_degree + 1)
        for entries in _compositions(degree, dimensions)
    )
    expected = comb(max_degree + dimensions, dimensions)
    assert len(indices) == expected, (len(indices), expected)
    return IndexSet(dimensions=dimensions, max_degree=max_degree, indices=indices)


def position_of(index_set: IndexSet, delta: MultiIndex | Sequence[int]) -> int:
    if not isinstance(delta, MultiIndex):
        delta = MultiIndex(tuple(int(entry) for entry in delta))
    if delta.dimensions != index_set.dimensions:
        raise ConfigurationError(
            f"Multi-index {delta} has {delta.dimensions} entries, "
            f"index set has {index_set.dimensions} dimensions"
        )
    try:
        return index_set._positions[delta]
    except KeyError:
        raise ConfigurationError(
            f"Multi-index {delta} exceeds total degree {index_set.max_degree}"
        ) from None

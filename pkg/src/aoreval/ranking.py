"""Per-tracker rank lists and the inversion-based Tracker Distance (TD)."""

from __future__ import annotations

import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from .errors import (
    DuplicateSequence,
    EmptyInput,
    MissingSequence,
    NotAPermutation,
    TaskSetMismatch,
    TooFewTasks,
)
from .metrics import SequenceScore

NORMALIZERS = ("paper", "max-inversions")


@dataclass(frozen=True)
class RankList:
    tracker_name: str
    tasks: Tuple[str, ...]
    scores: Tuple[float, ...]
    has_ties: bool = False

    @property
    def n(self) -> int:
        return len(self.tasks)

    def top(self, k: int):
        return list(zip(self.tasks[:k], self.scores[:k]))

    def bottom(self, k: int):
        if k <= 0:
            return []
        return list(zip(self.tasks[-k:], self.scores[-k:]))


@dataclass(frozen=True)
class TdMatrix:
    trackers: Tuple[str, ...]
    values: Tuple[Tuple[float, ...], ...]

    def __getitem__(self, key):
        i, j = key
        return self.values[self.trackers.index(i)][self.trackers.index(j)]


def rank_list(
    scores: Sequence[SequenceScore], expected: Optional[Sequence[str]] = None
) -> RankList:
    """Order one tracker's sequences by descending AOR.

    Equal AORs are ordered by ascending sequence name. When ``expected``
    is given, the scores must cover exactly those sequence names.
    """
    if not scores:
        raise EmptyInput("no scores to rank")
    names = [s.sequence_name for s in scores]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DuplicateSequence(f"duplicate sequences: {dupes}")
    if expected is not None:
        missing = sorted(set(expected) - set(names))
        extra = sorted(set(names) - set(expected))
        if missing:
            raise MissingSequence(f"no score for sequences: {missing}")
        if extra:
            raise TaskSetMismatch(f"unexpected sequences: {extra}")
    ordered = sorted(scores, key=lambda s: (-s.aor, s.sequence_name))
    values = [s.aor for s in ordered]
    has_ties = len(set(values)) != len(values)
    return RankList(
        scores[0].tracker_name,
        tuple(s.sequence_name for s in ordered),
        tuple(values),
        has_ties,
    )


def to_permutation(reference: RankList, other: RankList) -> List[int]:
    """Relabel ``other`` with 1-based ranks taken from ``reference``."""
    ids = {task: i for i, task in enumerate(reference.tasks, start=1)}
    if len(ids) != reference.n or set(ids) != set(other.tasks) or other.n != reference.n:
        raise TaskSetMismatch(
            f"{reference.tracker_name} and {other.tracker_name} rank different task sets"
        )
    return [ids[t] for t in other.tasks]


def _as_permutation(p: Sequence[int]) -> List[int]:
    n = len(p)
    seen = [False] * (n + 1)
    out = []
    for v in p:
        try:
            v = operator.index(v)
        except TypeError:
            raise NotAPermutation(f"non-integer entry {v!r}") from None
        if not 1 <= v <= n or seen[v]:
            raise NotAPermutation(f"not a permutation of 1..{n}: {list(p)[:20]}")
        seen[v] = True
        out.append(v)
    return out


def _sort_count(a: List[int]) -> Tuple[List[int], int]:
    if len(a) <= 1:
        return a, 0
    mid = len(a) // 2
    left, inv_l = _sort_count(a[:mid])
    right, inv_r = _sort_count(a[mid:])
    merged = []
    inv = inv_l + inv_r
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            # every remaining left element exceeds right[j]
            inv += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inv


def count_inversions(p: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``p[i] > p[j]``, by merge sort."""
    return _sort_count(_as_permutation(p))[1]


def tracker_distance(a: RankList, b: RankList, normalizer: str = "paper") -> float:
    """Inversions of ``b`` relabeled by ``a``'s ranks over ``n(n-1)``.

    With the default normalizer TD lies in [0, 0.5]; ``max-inversions``
    divides by ``n(n-1)/2`` instead, giving [0, 1].
    """
    if normalizer not in NORMALIZERS:
        raise ValueError(f"normalizer must be one of {NORMALIZERS}")
    perm = to_permutation(a, b)
    n = len(perm)
    if n < 2:
        raise TooFewTasks(f"tracker distance needs at least 2 tasks, got {n}")
    denom = n * (n - 1)
    if normalizer == "max-inversions":
        denom //= 2
    return count_inversions(perm) / denom


def td_matrix(
    lists: Sequence[RankList], normalizer: str = "paper", max_workers: Optional[int] = None
) -> TdMatrix:
    """Symmetric pairwise TD table with zero diagonal."""
    if len(lists) < 2:
        raise EmptyInput("TD matrix needs at least 2 trackers")
    k = len(lists)
    pairs = list(combinations(range(k), 2))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        upper = list(
            pool.map(lambda ij: tracker_distance(lists[ij[0]], lists[ij[1]], normalizer), pairs)
        )
    values = [[0.0] * k for _ in range(k)]
    for (i, j), d in zip(pairs, upper):
        values[i][j] = values[j][i] = d
    return TdMatrix(tuple(r.tracker_name for r in lists), tuple(tuple(r) for r in values))

"""Binary sum tree for O(log n) proportional sampling with point updates.

Layout: a flat array of length 2*cap where cap is the smallest power of two
holding all leaves; leaf i lives at index cap + i and internal node j holds
tree[2j] + tree[2j+1].  Parents are recomputed (not delta-adjusted) on every
update so float drift stays bounded; `rebuild` restores sums exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["SumTree", "capacity_for", "tree_rebuild", "tree_update", "tree_sample"]


def capacity_for(n: int) -> int:
    cap = 1
    while cap < n:
        cap *= 2
    return cap


@njit(cache=True)
def tree_rebuild(tree: np.ndarray, cap: int) -> None:
    for i in range(cap - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]


@njit(cache=True)
def tree_update(tree: np.ndarray, cap: int, leaf: int, value: float) -> None:
    i = cap + leaf
    tree[i] = value
    i >>= 1
    while i >= 1:
        tree[i] = tree[2 * i] + tree[2 * i + 1]
        i >>= 1


@njit(cache=True)
def tree_sample(tree: np.ndarray, cap: int, n: int, r: float) -> int:
    """Leaf index whose cumulative-rate interval contains r in [0, total).

    Float roundoff can land the descent on a zero leaf; fall back to a
    linear cumulative scan in that rare case.
    """
    i = 1
    while i < cap:
        left = tree[2 * i]
        if r < left:
            i = 2 * i
        else:
            r -= left
            i = 2 * i + 1
    leaf = i - cap
    if leaf < n and tree[i] > 0.0:
        return leaf
    # fallback: first leaf with positive rate scanning from the landing point
    for j in range(leaf - 1, -1, -1):
        if tree[cap + j] > 0.0:
            return j
    for j in range(leaf + 1, n):
        if tree[cap + j] > 0.0:
            return j
    return -1


class SumTree:
    """Convenience wrapper owning the flat tree array."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        self.n = values.size
        self.cap = capacity_for(self.n)
        self.tree = np.zeros(2 * self.cap, dtype=np.float64)
        self.tree[self.cap : self.cap + self.n] = values
        tree_rebuild(self.tree, self.cap)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    @property
    def leaves(self) -> np.ndarray:
        return self.tree[self.cap : self.cap + self.n]

    def update(self, leaf: int, value: float) -> None:
        tree_update(self.tree, self.cap, leaf, value)

    def sample(self, r: float) -> int:
        if not 0.0 <= r < self.total:
            raise ValueError("sample point must lie in [0, total)")
        return int(tree_sample(self.tree, self.cap, self.n, r))

    def rebuild(self) -> None:
        tree_rebuild(self.tree, self.cap)

"""Hard-decision renormalization-group decoder with defect-aware transport.

Charged faces are linked level by level (linking distance = level, Chebyshev
torus metric, chained through union-find), each cluster's members are
virtually transported to its root along canonical row-first minimal-image
paths, and clusters whose transported charge sums to zero are annihilated by
emitting those transport powers into the correction.  Linking stops once the
distance would exceed L/3; surviving charge at that point is a declared
failure rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .lattice import ErrorState, Lattice, logical_class, syndrome

__all__ = [
    "transport",
    "canonical_path",
    "decode",
    "attempt_recovery",
    "Cluster",
    "DecodeOutcome",
    "Recovery",
]


def transport(lat: Lattice, path, k: int, emit: bool = False):
    """Charge after carrying k along a face path, multiplying by M or M^-1
    at each defect crossing.

    With emit=True also returns the edge powers that physically realize the
    move (subtracting k from the first face and depositing the returned
    charge on the last).
    """
    k = int(k) % lat.N
    powers = np.zeros(lat.n_edges, dtype=np.int64) if emit else None
    faces = list(path)
    for f, g in zip(faces[:-1], faces[1:]):
        _, direction = lat.edge_between(f, g)  # raises on non-adjacent steps
        e, a, k = lat.hop(f, direction, k)
        if emit:
            powers[e] = (powers[e] + a) % lat.N
    return (k, powers) if emit else k


def _axis_steps(delta_raw: int, L: int) -> int:
    """Signed minimal-image displacement; exact antipodes resolve to +L/2."""
    d = delta_raw % L
    if 2 * d < L:
        return d
    if 2 * d > L:
        return d - L
    return d  # tie: positive direction


def canonical_path(lat: Lattice, src: int, dst: int) -> list[int]:
    """Row-first, then column, minimal-image face path from src to dst."""
    L = lat.L
    sx, sy = lat.face_xy(src)
    dx_, dy_ = lat.face_xy(dst)
    path = [src]
    x, y = sx, sy
    dx = _axis_steps(dx_ - sx, L)
    sgn = 1 if dx >= 0 else -1
    for _ in range(abs(dx)):
        x = (x + sgn) % L
        path.append(lat.face_id(x, y))
    dy = _axis_steps(dy_ - sy, L)
    sgn = 1 if dy >= 0 else -1
    for _ in range(abs(dy)):
        y = (y + sgn) % L
        path.append(lat.face_id(x, y))
    return path


def _cheb(lat: Lattice, f: int, g: int) -> int:
    L = lat.L
    fx, fy = lat.face_xy(f)
    gx, gy = lat.face_xy(g)
    dx = abs(fx - gx)
    dy = abs(fy - gy)
    return max(min(dx, L - dx), min(dy, L - dy))


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        p = self.parent.setdefault(a, a)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[a] = p
        return p

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically least face as representative
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            self.parent[hi] = lo


@dataclass
class Cluster:
    """Charged faces linked at the current level, referenced to their root."""

    root: int
    members: list[int]
    charges: list[int]
    level: int

    def diameter(self, lat: Lattice) -> int:
        return max((_cheb(lat, a, b) for a in self.members for b in self.members), default=0)


@dataclass
class DecodeOutcome:
    success: bool
    correction: np.ndarray | None
    levels_used: int
    max_cluster_diameter: int
    trace: list[str] = field(default_factory=list)


def decode(lat: Lattice, charges: np.ndarray, trace: bool = False) -> DecodeOutcome:
    """Cluster-and-annihilate the given face charges.

    Returns a correction whose application cancels every charge, or a
    declared failure once the linking distance would exceed L/3.
    """
    N, L = lat.N, lat.L
    q = np.asarray(charges, dtype=np.int64).copy() % N
    correction = np.zeros(lat.n_edges, dtype=np.int64)
    uf = _UnionFind()
    gauge, ginv = lat.gauge, lat.inv
    log: list[str] = []
    max_diam = 0
    max_level = L // 3
    if not np.any(q):
        return DecodeOutcome(True, correction, 0, 0, log)
    for level in range(1, max_level + 1):
        charged = np.nonzero(q)[0]
        xs, ys = charged % L, charged // L
        dx = np.abs(xs[:, None] - xs[None, :])
        dy = np.abs(ys[:, None] - ys[None, :])
        dist = np.maximum(np.minimum(dx, L - dx), np.minimum(dy, L - dy))
        for f in charged:
            uf.find(int(f))
        for i, j in zip(*np.nonzero(np.triu(dist <= level, k=1))):
            uf.union(int(charged[i]), int(charged[j]))
        groups: dict[int, list[int]] = {}
        for f in charged:
            groups.setdefault(uf.find(int(f)), []).append(int(f))
        for members in groups.values():
            root = min(members)
            cluster = Cluster(root=root, members=members, charges=[int(q[f]) for f in members], level=level)
            max_diam = max(max_diam, cluster.diameter(lat))
            # transported charge referenced at the root via the flat gauge
            total = 0
            for f, k in zip(cluster.members, cluster.charges):
                total = (total + k * gauge[root] * ginv[gauge[f]]) % N
            if trace:
                log.append(
                    "level %d: cluster root=%d size=%d transported-charge=%d %s"
                    % (level, root, len(members), total, "annihilate" if total == 0 else "keep")
                )
            if total == 0:
                for f in cluster.members:
                    if f == root:
                        continue
                    k = int(q[f])
                    arrived, powers = transport(lat, canonical_path(lat, f, root), k, emit=True)
                    correction = (correction + powers) % N
                    q[f] = 0
                    q[root] = (q[root] + arrived) % N
                assert q[root] == 0
        if not np.any(q):
            return DecodeOutcome(True, correction, level, max_diam, log)
    return DecodeOutcome(False, None, max_level, max_diam, log)


class Recovery(Enum):
    SUCCESS = "success"
    LOGICAL_FAILURE = "logical-failure"
    DECODER_FAILURE = "decoder-failure"


def attempt_recovery(lat: Lattice, state: ErrorState) -> Recovery:
    """Decode a copy of the current syndrome and classify the result.

    The trajectory state is never mutated; both failure kinds count against
    the recovery probability.
    """
    outcome = decode(lat, state.q)
    if not outcome.success:
        return Recovery.DECODER_FAILURE
    corrected = (state.s + outcome.correction) % lat.N
    residual_syndrome = syndrome(lat, corrected)
    assert not np.any(residual_syndrome), "decoder returned a non-annihilating correction"
    if logical_class(lat, corrected) == (0, 0):
        return Recovery.SUCCESS
    return Recovery.LOGICAL_FAILURE

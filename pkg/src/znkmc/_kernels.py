"""Numba kernels for the event-indexed Gillespie loop.

All hot state lives in flat numpy arrays owned by the Python-side engine;
every kernel here is deterministic given the RNG state word.  The RNG is a
splitmix64 stream so each trial can carry its own counter-derived seed and
replay identically under any scheduling.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .sumtree import tree_rebuild, tree_sample, tree_update

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

# status codes
REACHED_TARGET = 0
ABSORBED = 1
MAX_EVENTS = 2
APPLIED = 3


@njit(cache=True, inline="always")
def _rng_next(rng: np.ndarray) -> np.uint64:
    rng[0] = rng[0] + _GAMMA
    z = rng[0]
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _rng_uniform(rng: np.ndarray) -> float:
    # open interval (0, 1): keeps -log(u) finite and waiting times positive
    return (np.float64(_rng_next(rng) >> U64(11)) + 0.5) * (2.0**-53)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed word (pure Python, for trial ids)."""
    z = 0x243F6A8885A308D3
    for p in parts:
        z = (z + (int(p) & 0xFFFFFFFFFFFFFFFF) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z ^= z >> 30
        z = (z * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z ^= z >> 27
        z = (z * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        z ^= z >> 31
    return z


@njit(cache=True, inline="always")
def davies(omega: float, beta: float) -> float:
    """Ohmic weak-coupling rate omega / (1 - exp(-beta*omega)).

    The omega -> 0 limit is 1/beta; the two branches avoid overflow for
    beta*|omega| large and keep detailed balance exact to rounding.
    """
    if omega == 0.0:
        return 1.0 / beta
    x = beta * omega
    if x > 0.0:
        return omega / (-math.expm1(-x))
    return omega * math.exp(x) / math.expm1(x)


@njit(cache=True, inline="always")
def _event_rate(
    eid, edge_tail, edge_head, w_tail, w_head, q, jl, N, n_powers, beta, restricted
):
    e = eid // n_powers
    a = eid % n_powers + 1
    u = edge_tail[e]
    v = edge_head[e]
    qu = q[u]
    qv = q[v]
    if restricted and qu == 0 and qv == 0:
        return 0.0
    qu2 = (qu + a * w_tail[e]) % N
    qv2 = (qv + a * w_head[e]) % N
    omega = jl[qu] + jl[qv] - jl[qu2] - jl[qv2]
    return davies(omega, beta)


@njit(cache=True)
def recompute_all_rates(
    tree, cap, edge_tail, edge_head, w_tail, w_head, q, jl, N, n_powers, beta, restricted
):
    n_events = edge_tail.shape[0] * n_powers
    for eid in range(n_events):
        tree[cap + eid] = _event_rate(
            eid, edge_tail, edge_head, w_tail, w_head, q, jl, N, n_powers, beta, restricted
        )
    tree_rebuild(tree, cap)


@njit(cache=True, inline="always")
def _refresh_faces(
    u, v, tree, cap, face_edges, edge_tail, edge_head, w_tail, w_head, q, jl, N, n_powers, beta, restricted
):
    # edges incident to either changed face; <= 8 slots with duplicates
    touched = np.empty(8, dtype=np.int64)
    cnt = 0
    for k in range(4):
        for e in (face_edges[u, k], face_edges[v, k]):
            seen = False
            for j in range(cnt):
                if touched[j] == e:
                    seen = True
                    break
            if not seen:
                touched[cnt] = e
                cnt += 1
    for j in range(cnt):
        e = touched[j]
        base = e * n_powers
        for a1 in range(n_powers):
            eid = base + a1
            tree_update(
                tree,
                cap,
                eid,
                _event_rate(
                    eid, edge_tail, edge_head, w_tail, w_head, q, jl, N, n_powers, beta, restricted
                ),
            )


@njit(cache=True, inline="always")
def _apply_eid(
    eid, s, q, edge_tail, edge_head, w_tail, w_head, jl, N, n_powers
):
    """Apply the event and return (u, v, omega)."""
    e = eid // n_powers
    a = eid % n_powers + 1
    u = edge_tail[e]
    v = edge_head[e]
    qu = q[u]
    qv = q[v]
    qu2 = (qu + a * w_tail[e]) % N
    qv2 = (qv + a * w_head[e]) % N
    omega = jl[qu] + jl[qv] - jl[qu2] - jl[qv2]
    s[e] = (s[e] + a) % N
    q[u] = qu2
    q[v] = qv2
    return u, v, omega


@njit(cache=True)
def kmc_step(
    t_target,
    s, q, tree, cap,
    edge_tail, edge_head, w_tail, w_head, face_edges,
    jl, N, n_powers, beta, restricted,
    rng, clock, counters, rebuild_every,
):
    """Advance at most one event, never past t_target.

    clock = [t, E_incremental]; counters = [events_applied, updates_since_rebuild].
    Returns (status, edge, power, omega, dt): APPLIED after an event,
    REACHED_TARGET when the next event falls past the bound (clock moved to
    it; the discarded waiting time is memoryless), ABSORBED on total rate 0.
    """
    total = tree[1]
    if total <= 0.0:
        if t_target < math.inf:
            clock[0] = t_target
        return ABSORBED, -1, 0, 0.0, 0.0
    dt = -math.log(_rng_uniform(rng)) / total
    if clock[0] + dt > t_target:
        clock[0] = t_target
        return REACHED_TARGET, -1, 0, 0.0, 0.0
    r = _rng_uniform(rng) * total
    eid = tree_sample(tree, cap, edge_tail.shape[0] * n_powers, r)
    if eid < 0:
        return ABSORBED, -1, 0, 0.0, 0.0
    u, v, omega = _apply_eid(eid, s, q, edge_tail, edge_head, w_tail, w_head, jl, N, n_powers)
    clock[0] += dt
    clock[1] -= omega
    counters[0] += 1
    counters[1] += 1
    _refresh_faces(
        u, v, tree, cap, face_edges, edge_tail, edge_head, w_tail, w_head,
        q, jl, N, n_powers, beta, restricted,
    )
    if counters[1] >= rebuild_every:
        counters[1] = 0
        e_full = 0.0
        for f in range(q.shape[0]):
            e_full += jl[q[f]]
        clock[1] = e_full
        tree_rebuild(tree, cap)
    return APPLIED, eid // n_powers, eid % n_powers + 1, omega, dt


@njit(cache=True)
def kmc_run_until(
    t_target, max_events,
    s, q, tree, cap,
    edge_tail, edge_head, w_tail, w_head, face_edges,
    jl, N, n_powers, beta, restricted,
    rng, clock, counters, rebuild_every,
):
    """Run events until the clock passes t_target (state is left at the last
    event <= t_target; by memorylessness the discarded residual is fresh).
    """
    applied = 0
    while True:
        total = tree[1]
        if total <= 0.0:
            clock[0] = t_target
            return ABSORBED
        dt = -math.log(_rng_uniform(rng)) / total
        if clock[0] + dt > t_target:
            clock[0] = t_target
            return REACHED_TARGET
        if applied >= max_events:
            return MAX_EVENTS
        r = _rng_uniform(rng) * total
        eid = tree_sample(tree, cap, edge_tail.shape[0] * n_powers, r)
        if eid < 0:
            clock[0] = t_target
            return ABSORBED
        u, v, omega = _apply_eid(eid, s, q, edge_tail, edge_head, w_tail, w_head, jl, N, n_powers)
        clock[0] += dt
        clock[1] -= omega
        counters[0] += 1
        counters[1] += 1
        applied += 1
        _refresh_faces(
            u, v, tree, cap, face_edges, edge_tail, edge_head, w_tail, w_head,
            q, jl, N, n_powers, beta, restricted,
        )
        if counters[1] >= rebuild_every:
            counters[1] = 0
            e_full = 0.0
            for f in range(q.shape[0]):
                e_full += jl[q[f]]
            clock[1] = e_full
            tree_rebuild(tree, cap)


@njit(cache=True)
def kmc_run_occupation(
    n_events, class_of, table,
    s, q, tree, cap,
    edge_tail, edge_head, w_tail, w_head, face_edges,
    jl, N, n_powers, beta, restricted,
    rng, clock, counters, rebuild_every,
):
    """Run n_events and accumulate time-weighted occupation of charge-class
    count vectors (table index: mixed radix, base n_faces + 1).

    Used by the Gibbs-convergence oracle: the time-weighted occupation of a
    reversible chain converges to the Boltzmann distribution.
    """
    n_faces = q.shape[0]
    n_classes = int(class_of.max()) + 1
    counts = np.zeros(n_classes, dtype=np.int64)
    for f in range(n_faces):
        counts[class_of[q[f]]] += 1
    base = n_faces + 1
    applied = 0
    while applied < n_events:
        total = tree[1]
        if total <= 0.0:
            return ABSORBED
        dt = -math.log(_rng_uniform(rng)) / total
        idx = 0
        stride = 1
        for j in range(1, n_classes):
            idx += counts[j] * stride
            stride *= base
        table[idx] += dt
        r = _rng_uniform(rng) * total
        eid = tree_sample(tree, cap, edge_tail.shape[0] * n_powers, r)
        if eid < 0:
            return ABSORBED
        e = eid // n_powers
        u = edge_tail[e]
        v = edge_head[e]
        counts[class_of[q[u]]] -= 1
        counts[class_of[q[v]]] -= 1
        u, v, omega = _apply_eid(eid, s, q, edge_tail, edge_head, w_tail, w_head, jl, N, n_powers)
        counts[class_of[q[u]]] += 1
        counts[class_of[q[v]]] += 1
        clock[0] += dt
        clock[1] -= omega
        counters[0] += 1
        counters[1] += 1
        applied += 1
        _refresh_faces(
            u, v, tree, cap, face_edges, edge_tail, edge_head, w_tail, w_head,
            q, jl, N, n_powers, beta, restricted,
        )
        if counters[1] >= rebuild_every:
            counters[1] = 0
            e_full = 0.0
            for f in range(n_faces):
                e_full += jl[q[f]]
            clock[1] = e_full
            tree_rebuild(tree, cap)
    return REACHED_TARGET

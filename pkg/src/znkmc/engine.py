"""Continuous-time kinetic Monte Carlo over all single-qudit events.

Every (edge, power) pair is one candidate event whose Davies rate is cached
in a sum tree; a Gillespie step draws an exponential waiting time from the
total rate, picks an event proportionally, applies it and refreshes only the
<= 8 edges incident to the two changed faces.  In restricted mode events with
both endpoint faces uncharged are frozen out, so existing excitations can
propagate, split and fuse but no new pair can nucleate from the vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .energy import MassVector
from .lattice import ErrorState, Lattice
from .sumtree import capacity_for, tree_rebuild

__all__ = [
    "davies_rate",
    "EventIndex",
    "Trajectory",
    "EventRecord",
    "init",
    "step",
    "run_until",
    "observables",
    "spread_from_charges",
]

FULL, RESTRICTED = "full", "restricted"
DEFAULT_REBUILD_EVERY = 1_000_000


def davies_rate(omega: float, beta: float) -> float:
    """Thermal rate omega / (1 - e^(-beta*omega)); 1/beta at omega = 0."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(_kernels.davies(float(omega), float(beta)))


@dataclass
class EventIndex:
    """All candidate events with cached rates in a sum tree."""

    lat: Lattice
    jl: np.ndarray
    beta: float
    restricted: bool
    tree: np.ndarray
    cap: int

    @property
    def n_events(self) -> int:
        return self.lat.n_edges * (self.lat.N - 1)

    @property
    def total_rate(self) -> float:
        return float(self.tree[1])

    @property
    def rates(self) -> np.ndarray:
        return self.tree[self.cap : self.cap + self.n_events]

    def rate_of(self, edge: int, a: int) -> float:
        return float(self.rates[edge * (self.lat.N - 1) + (a - 1)])

    def recompute_from(self, q: np.ndarray) -> None:
        """Recompute every cached rate from the given charges and rebuild sums."""
        _kernels.recompute_all_rates(
            self.tree, self.cap,
            self.lat.edge_tail, self.lat.edge_head, self.lat.w_tail, self.lat.w_head,
            q, self.jl, self.lat.N, self.lat.N - 1, self.beta, self.restricted,
        )

    def fresh_rates(self, q: np.ndarray) -> np.ndarray:
        """Rates recomputed into a scratch tree (cache left untouched)."""
        scratch = np.zeros_like(self.tree)
        _kernels.recompute_all_rates(
            scratch, self.cap,
            self.lat.edge_tail, self.lat.edge_head, self.lat.w_tail, self.lat.w_head,
            q, self.jl, self.lat.N, self.lat.N - 1, self.beta, self.restricted,
        )
        return scratch[self.cap : self.cap + self.n_events]


@dataclass
class EventRecord:
    time: float
    edge: int
    power: int
    omega: float
    dt: float


@dataclass
class Trajectory:
    """One trial-owned realization of the thermal dynamics."""

    lat: Lattice
    state: ErrorState
    J: MassVector
    beta: float
    mode: str
    index: EventIndex
    rng: np.ndarray
    clock: np.ndarray  # [t, incrementally maintained energy]
    counters: np.ndarray  # [events applied, updates since rebuild]
    rebuild_every: int = DEFAULT_REBUILD_EVERY
    absorbed: bool = field(default=False)

    @property
    def t(self) -> float:
        return float(self.clock[0])

    @property
    def n_events(self) -> int:
        return int(self.counters[0])

    @property
    def energy(self) -> float:
        return float(self.clock[1])


def init(
    lat: Lattice,
    state: ErrorState,
    beta: float,
    J,
    mode: str = FULL,
    seed: int = 0,
    rebuild_every: int = DEFAULT_REBUILD_EVERY,
) -> Trajectory:
    """Build the event index for `state` and wrap it in a fresh trajectory."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if mode not in (FULL, RESTRICTED):
        raise ValueError("mode must be 'full' or 'restricted'")
    J = MassVector.coerce(J, lat.N)
    jl = J.lookup()
    n_events = lat.n_edges * (lat.N - 1)
    cap = capacity_for(n_events)
    index = EventIndex(lat=lat, jl=jl, beta=float(beta), restricted=(mode == RESTRICTED), tree=np.zeros(2 * cap), cap=cap)
    index.recompute_from(state.q)
    rng = np.array([_kernels.mix_seed(seed)], dtype=np.uint64)
    clock = np.array([0.0, float(jl[state.q].sum())])
    counters = np.zeros(2, dtype=np.int64)
    return Trajectory(
        lat=lat, state=state, J=J, beta=float(beta), mode=mode, index=index,
        rng=rng, clock=clock, counters=counters, rebuild_every=int(rebuild_every),
    )


def _kernel_args(traj: Trajectory):
    lat, idx = traj.lat, traj.index
    return (
        traj.state.s, traj.state.q, idx.tree, idx.cap,
        lat.edge_tail, lat.edge_head, lat.w_tail, lat.w_head, lat.face_edges,
        idx.jl, lat.N, lat.N - 1, traj.beta, idx.restricted,
        traj.rng, traj.clock, traj.counters, traj.rebuild_every,
    )


def step(traj: Trajectory, t_target: float = math.inf) -> EventRecord | None:
    """One Gillespie event; None when absorbing or when the next event would
    land past t_target (then the clock just moves to the bound)."""
    status, edge, power, omega, dt = _kernels.kmc_step(float(t_target), *_kernel_args(traj))
    if status == _kernels.ABSORBED:
        traj.absorbed = True
        return None
    if status == _kernels.REACHED_TARGET:
        return None
    return EventRecord(time=traj.t, edge=int(edge), power=int(power), omega=float(omega), dt=float(dt))


def run_until(traj: Trajectory, t_target: float, max_events: int = 2**62, event_log=None) -> str:
    """Advance the trajectory clock to t_target (or absorb on total rate 0).

    `event_log` is a debugging hook: a writable text stream receiving one
    "time,edge,power,omega" line per event (much slower; stepping leaves the
    fast kernel loop).
    """
    if t_target < traj.t:
        raise ValueError("cannot run backwards: target %g < current %g" % (t_target, traj.t))
    if event_log is not None:
        applied = 0
        while applied < max_events:
            rec = step(traj, t_target)
            if rec is None:
                return "absorbed" if traj.absorbed else "ok"
            event_log.write("%.12g,%d,%d,%.12g\n" % (rec.time, rec.edge, rec.power, rec.omega))
            applied += 1
        return "max-events"
    status = _kernels.kmc_run_until(float(t_target), int(max_events), *_kernel_args(traj))
    if status == _kernels.ABSORBED:
        traj.absorbed = True
        return "absorbed"
    if status == _kernels.MAX_EVENTS:
        return "max-events"
    return "ok"


def run_occupation(traj: Trajectory, n_events: int, class_of: np.ndarray, table: np.ndarray) -> str:
    """Drive n_events while accumulating time-weighted charge-class occupation."""
    status = _kernels.kmc_run_occupation(
        int(n_events), class_of, table, *_kernel_args(traj)
    )
    return "absorbed" if status == _kernels.ABSORBED else "ok"


def spread_from_charges(q: np.ndarray, L: int, jl: np.ndarray) -> float:
    """Mass-weighted mean torus distance from the mass-weighted centroid.

    The centroid is taken per axis as a circular mean; distances use the
    minimal image on each axis.  Zero when nothing is charged.
    """
    faces = np.nonzero(q)[0]
    if faces.size == 0:
        return 0.0
    m = jl[q[faces]]
    xs = (faces % L).astype(np.float64)
    ys = (faces // L).astype(np.float64)
    total = m.sum()
    centroid = []
    for pos in (xs, ys):
        ang = pos * (2.0 * math.pi / L)
        cx = float(np.sum(m * np.cos(ang)))
        sx = float(np.sum(m * np.sin(ang)))
        centroid.append((math.atan2(sx, cx) % (2.0 * math.pi)) * L / (2.0 * math.pi))
    dx = np.remainder(xs - centroid[0] + L / 2.0, L) - L / 2.0
    dy = np.remainder(ys - centroid[1] + L / 2.0, L) - L / 2.0
    return float(np.sum(m * np.hypot(dx, dy)) / total)


def observables(traj: Trajectory) -> tuple[float, float]:
    """(total mass, spread) of the current charge configuration."""
    q = traj.state.q
    jl = traj.index.jl
    total_mass = float(jl[q].sum())
    return total_mass, spread_from_charges(q, traj.lat.L, jl)

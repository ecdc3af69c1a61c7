"""Charge masses and the energy bookkeeping of single-qudit events.

A charge-k excitation on a face costs J[k]; the vacuum charge costs nothing.
Energies are quoted in units where the heavy mass is 1, so inverse
temperatures are dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ErrorState, Lattice

__all__ = ["MassVector", "energy", "delta_energy"]


@dataclass(frozen=True)
class MassVector:
    """Masses J[k] of the charge-k excitations, k = 1..N-1."""

    J: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))
        if any(j <= 0 for j in self.J):
            raise ValueError("all masses must be positive")

    @property
    def N(self) -> int:
        return len(self.J) + 1

    def lookup(self) -> np.ndarray:
        """Length-N table mapping a charge value to its mass; entry 0 is 0."""
        return np.concatenate([[0.0], np.asarray(self.J, dtype=np.float64)])

    @classmethod
    def coerce(cls, J, N: int) -> "MassVector":
        mv = J if isinstance(J, MassVector) else cls(tuple(J))
        if mv.N != N:
            raise ValueError("mass vector has %d entries, lattice needs %d" % (mv.N - 1, N - 1))
        return mv


def energy(q: np.ndarray, J: MassVector) -> float:
    """Total mass of a charge configuration."""
    q = np.asarray(q, dtype=np.int64)
    if q.min(initial=0) < 0 or q.max(initial=0) >= J.N:
        raise ValueError("charges must lie in [0, N)")
    return float(J.lookup()[q].sum())


def delta_energy(state: ErrorState, lat: Lattice, edge: int, a: int, J: MassVector) -> float:
    """Energy released by applying X^a on an edge (positive = relaxation).

    Only the two endpoint faces change, so this is a four-lookup difference:
    omega = E_before - E_after.
    """
    N = lat.N
    if not 1 <= a < N:
        raise ValueError("power a must be in [1, N)")
    jl = J.lookup()
    u = int(lat.edge_tail[edge])
    v = int(lat.edge_head[edge])
    qu, qv = int(state.q[u]), int(state.q[v])
    qu2 = (qu + a * int(lat.w_tail[edge])) % N
    qv2 = (qv + a * int(lat.w_head[edge])) % N
    return float(jl[qu] + jl[qv] - jl[qu2] - jl[qv2])

"""Periodic Z_N lattice with an oriented grid of charge-multiplying defect lines.

Geometry
--------
Charges live on the faces of an L x L torus, indexed f = y*L + x.  Qudits sit
on the 2*L^2 edges of the dual (face-adjacency) graph:

* horizontal edge ``h(x, y)`` (id ``y*L + x``) joins face (x, y) to
  ((x+1) % L, y) and is oriented +x,
* vertical edge ``v(x, y)`` (id ``L^2 + y*L + x``) joins face (x, y) to
  (x, (y+1) % L) and is oriented +y.

Each edge carries weight -1 on its tail face and +1 on its head face (mod N),
so applying a power-``a`` generalized flip on an edge adds ``+a`` to the head
charge and ``-a`` to the tail charge.  A vertical defect line at coordinate c
crosses the L horizontal edges between face columns c-1 and c; a horizontal
line at r crosses the L vertical edges between face rows r-1 and r.  On every
crossed edge the weight of the face on the line's framed side is multiplied
by M, which is what makes a charge k hop across the line arrive as k*M (or
k*M^-1 going the other way).

Stabilizer generators are the charge-free 4-edge loops around each vertex of
the face grid; their entries pick up factors +-M next to defect lines.  Two
independent edge functionals vanishing on all stabilizers read off the
logical class of any syndrome-free configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import gf

__all__ = [
    "DefectLine",
    "LatticeSpec",
    "Lattice",
    "ErrorState",
    "DegeneracyReport",
    "DegeneracyError",
    "build_lattice",
    "validate_degeneracy",
    "syndrome",
    "apply_event",
    "logical_functionals",
    "logical_class",
]

# face-neighbor directions
PLUS_X, MINUS_X, PLUS_Y, MINUS_Y = 0, 1, 2, 3


class DegeneracyError(ValueError):
    """Raised when a defect grid breaks the ground-space degeneracy."""


@dataclass(frozen=True)
class DefectLine:
    """One defect line: its coordinate and the side its framing marks.

    For a vertical line, framing '+' puts the charge multiplier on the +x
    side (face column == coord); for a horizontal line, on the +y side.
    """

    coord: int
    framing: str = "+"

    def __post_init__(self):
        if self.framing not in ("+", "-"):
            raise ValueError("framing must be '+' or '-', got %r" % (self.framing,))


def _normalize_lines(lines) -> tuple[DefectLine, ...]:
    out = []
    for ln in lines:
        if isinstance(ln, DefectLine):
            out.append(ln)
        elif isinstance(ln, (int, np.integer)):
            out.append(DefectLine(int(ln)))
        else:
            coord, framing = ln
            out.append(DefectLine(int(coord), framing))
    return tuple(sorted(out, key=lambda d: d.coord))


@dataclass(frozen=True)
class LatticeSpec:
    """Seed-independent description of the lattice and its defect grid."""

    N: int
    L: int
    M: int = 1
    v_lines: tuple[DefectLine, ...] = ()
    h_lines: tuple[DefectLine, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "v_lines", _normalize_lines(self.v_lines))
        object.__setattr__(self, "h_lines", _normalize_lines(self.h_lines))
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not _is_prime(self.N):
            raise ValueError("N must be prime (composite charge algebra unsupported), got %d" % self.N)
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if not (1 <= self.M < self.N):
            raise ValueError("M must satisfy 1 <= M < N")
        if _gcd(self.M, self.N) != 1:
            raise ValueError("gcd(M, N) must be 1 so defect crossings are reversible")
        for name, lines in (("v_lines", self.v_lines), ("h_lines", self.h_lines)):
            coords = [d.coord for d in lines]
            if any(c < 0 or c >= self.L for c in coords):
                raise ValueError("%s coordinates must lie in [0, L)" % name)
            if len(set(coords)) != len(coords):
                raise ValueError("%s coordinates must be distinct" % name)

    @property
    def n_faces(self) -> int:
        return self.L * self.L

    @property
    def n_edges(self) -> int:
        return 2 * self.L * self.L


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class DegeneracyReport:
    ok: bool
    v_exponent: int  # net framing-signed crossing count of a horizontal winding loop
    h_exponent: int
    v_residue: int  # M**v_exponent mod N
    h_residue: int

    def __str__(self) -> str:
        if self.ok:
            return "degeneracy ok"
        return (
            "degeneracy violated: a winding charge returns multiplied by "
            f"M^{self.v_exponent} = {self.v_residue} (vertical lines) / "
            f"M^{self.h_exponent} = {self.h_residue} (horizontal lines); both must be 1"
        )


def validate_degeneracy(spec: LatticeSpec) -> DegeneracyReport:
    """Check that winding charges return to their original value.

    A charge winding the torus horizontally crosses every vertical line once,
    gaining a factor M (framed side entered) or M^-1 per crossing; the net
    multiplier must be 1 mod N, and likewise for the vertical winding across
    horizontal lines.  With uniform framing this is the condition
    M**(line count) == 1 (mod N).
    """
    N = spec.N
    ve = sum(1 if d.framing == "+" else -1 for d in spec.v_lines)
    he = sum(1 if d.framing == "+" else -1 for d in spec.h_lines)
    vr = pow(spec.M, ve, N) if ve >= 0 else pow(gf.modinv(spec.M, N), -ve, N)
    hr = pow(spec.M, he, N) if he >= 0 else pow(gf.modinv(spec.M, N), -he, N)
    return DegeneracyReport(ok=(vr == 1 and hr == 1), v_exponent=ve, h_exponent=he, v_residue=vr, h_residue=hr)


@dataclass
class Lattice:
    """Immutable (after construction) lattice with assembled charge algebra."""

    spec: LatticeSpec
    edge_tail: np.ndarray  # (n_edges,) tail face id
    edge_head: np.ndarray  # (n_edges,) head face id
    w_tail: np.ndarray  # (n_edges,) tail weight in [1, N)
    w_head: np.ndarray  # (n_edges,) head weight in [1, N)
    face_edges: np.ndarray  # (n_faces, 4) incident edge ids
    W: sp.csr_matrix  # faces x edges weighted incidence
    B: sp.csr_matrix  # edges x plaquettes stabilizer patterns

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def n_faces(self) -> int:
        return self.spec.n_faces

    @property
    def n_edges(self) -> int:
        return self.spec.n_edges

    # ---- indexing helpers -------------------------------------------------

    def face_id(self, x: int, y: int) -> int:
        L = self.L
        return (y % L) * L + (x % L)

    def face_xy(self, f: int) -> tuple[int, int]:
        return f % self.L, f // self.L

    def h_edge(self, x: int, y: int) -> int:
        L = self.L
        return (y % L) * L + (x % L)

    def v_edge(self, x: int, y: int) -> int:
        L = self.L
        return L * L + (y % L) * L + (x % L)

    def neighbor(self, f: int, direction: int) -> tuple[int, int, bool]:
        """(edge id, neighbor face id, this face is the edge's tail)."""
        x, y = self.face_xy(f)
        if direction == PLUS_X:
            return self.h_edge(x, y), self.face_id(x + 1, y), True
        if direction == MINUS_X:
            return self.h_edge(x - 1, y), self.face_id(x - 1, y), False
        if direction == PLUS_Y:
            return self.v_edge(x, y), self.face_id(x, y + 1), True
        if direction == MINUS_Y:
            return self.v_edge(x, y - 1), self.face_id(x, y - 1), False
        raise ValueError("bad direction %r" % (direction,))

    def edge_between(self, f: int, g: int) -> tuple[int, int]:
        """(edge id, direction) for adjacent faces f -> g; raises if not adjacent."""
        fx, fy = self.face_xy(f)
        gx, gy = self.face_xy(g)
        L = self.L
        dx = (gx - fx) % L
        dy = (gy - fy) % L
        if dy == 0 and dx == 1:
            return self.h_edge(fx, fy), PLUS_X
        if dy == 0 and dx == L - 1:
            return self.h_edge(gx, gy), MINUS_X
        if dx == 0 and dy == 1:
            return self.v_edge(fx, fy), PLUS_Y
        if dx == 0 and dy == L - 1:
            return self.v_edge(gx, gy), MINUS_Y
        raise ValueError("faces %d and %d are not adjacent" % (f, g))

    # ---- charge transport primitive ---------------------------------------

    @cached_property
    def inv(self) -> np.ndarray:
        """Multiplicative inverse table mod N (entry 0 unused)."""
        table = np.zeros(self.N, dtype=np.int64)
        for a in range(1, self.N):
            table[a] = gf.modinv(a, self.N)
        return table

    @cached_property
    def gauge(self) -> np.ndarray:
        """Transport factor from face (0,0) to each face (flat connection).

        gauge[f] is the multiplier a charge picks up carried from the origin
        to f along any path; path independence holds exactly when the
        degeneracy condition does.  A charge k at face f equals charge
        k * gauge[r] * gauge[f]^-1 once referenced at face r.
        """
        N, L, M = self.N, self.L, self.spec.M
        minv = gf.modinv(M, N)
        col = np.ones(L, dtype=np.int64)
        for line in self.spec.v_lines:
            if line.coord >= 1:
                col[line.coord :] = col[line.coord :] * (M if line.framing == "+" else minv) % N
        row = np.ones(L, dtype=np.int64)
        for line in self.spec.h_lines:
            if line.coord >= 1:
                row[line.coord :] = row[line.coord :] * (M if line.framing == "+" else minv) % N
        return (np.repeat(row, L) * np.tile(col, L)) % N

    def hop(self, f: int, direction: int, k: int) -> tuple[int, int, int]:
        """Move charge k off face f across its `direction` edge.

        Returns (edge id, applied power a, arriving charge).  Applying
        X^a on that edge subtracts k from f and adds the returned charge
        to the neighbor; crossing a defect line multiplies k by M or M^-1.
        """
        N = self.N
        e, _, is_tail = self.neighbor(f, direction)
        w_here = self.w_tail[e] if is_tail else self.w_head[e]
        w_there = self.w_head[e] if is_tail else self.w_tail[e]
        a = (-k * int(self.inv[int(w_here)])) % N
        return e, a, (a * int(w_there)) % N

    def winding_loop(self, axis: str) -> np.ndarray:
        """Edge powers of the canonical charge-1 winding string.

        axis 'h': transport a unit charge once around the torus in +x along
        row 0; axis 'v': in +y along column 0.  On a defect-free lattice this
        is a plain power-1 string; with a grid the powers are compensated at
        each crossing.  Syndrome-free iff the degeneracy condition holds.
        """
        direction = PLUS_X if axis == "h" else PLUS_Y
        s = np.zeros(self.n_edges, dtype=np.int64)
        f = 0
        k = 1
        for _ in range(self.L):
            e, a, k = self.hop(f, direction, k)
            s[e] = (s[e] + a) % self.N
            _, f, _ = self.neighbor(f, direction)
        if k != 1:
            raise DegeneracyError(
                "winding %s loop returns charge %d != 1; defect grid breaks degeneracy" % (axis, k)
            )
        return s

    @cached_property
    def phi(self) -> tuple[np.ndarray, np.ndarray]:
        return logical_functionals(self)


def build_lattice(spec: LatticeSpec) -> Lattice:
    """Assemble incidence, stabilizer patterns and transport tables."""
    report = validate_degeneracy(spec)
    if not report.ok:
        raise DegeneracyError(str(report))
    N, L = spec.N, spec.L
    n_faces, n_edges = spec.n_faces, spec.n_edges

    xs = np.tile(np.arange(L), L)
    ys = np.repeat(np.arange(L), L)
    face = ys * L + xs

    edge_tail = np.empty(n_edges, dtype=np.int64)
    edge_head = np.empty(n_edges, dtype=np.int64)
    # h(x, y): (x, y) -> (x+1, y); v(x, y): (x, y) -> (x, y+1)
    edge_tail[:n_faces] = face
    edge_head[:n_faces] = ys * L + (xs + 1) % L
    edge_tail[n_faces:] = face
    edge_head[n_faces:] = ((ys + 1) % L) * L + xs

    w_tail = np.full(n_edges, N - 1, dtype=np.int64)  # -1 mod N
    w_head = np.ones(n_edges, dtype=np.int64)
    for line in spec.v_lines:
        crossed = np.arange(L) * L + (line.coord - 1) % L  # h((c-1) % L, y) for all y
        if line.framing == "+":
            w_head[crossed] = (w_head[crossed] * spec.M) % N
        else:
            w_tail[crossed] = (w_tail[crossed] * spec.M) % N
    for line in spec.h_lines:
        crossed = n_faces + ((line.coord - 1) % L) * L + np.arange(L)  # v(x, (r-1) % L)
        if line.framing == "+":
            w_head[crossed] = (w_head[crossed] * spec.M) % N
        else:
            w_tail[crossed] = (w_tail[crossed] * spec.M) % N

    face_edges = np.empty((n_faces, 4), dtype=np.int64)
    face_edges[:, 0] = ys * L + xs  # h(x, y), tail here
    face_edges[:, 1] = ys * L + (xs - 1) % L  # h(x-1, y), head here
    face_edges[:, 2] = n_faces + ys * L + xs  # v(x, y), tail here
    face_edges[:, 3] = n_faces + ((ys - 1) % L) * L + xs  # v(x, y-1), head here

    rows = np.concatenate([edge_tail, edge_head])
    cols = np.concatenate([np.arange(n_edges), np.arange(n_edges)])
    vals = np.concatenate([w_tail, w_head])
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n_faces, n_edges), dtype=np.int64)

    lat = Lattice(
        spec=spec,
        edge_tail=edge_tail,
        edge_head=edge_head,
        w_tail=w_tail,
        w_head=w_head,
        face_edges=face_edges,
        W=W,
        B=sp.csr_matrix((n_edges, n_faces), dtype=np.int64),
    )
    lat.B = _build_stabilizers(lat)
    for arr in (lat.edge_tail, lat.edge_head, lat.w_tail, lat.w_head, lat.face_edges):
        arr.setflags(write=False)
    return lat


def _build_stabilizers(lat: Lattice) -> sp.csr_matrix:
    """One column per face-grid plaquette: the charge-free 4-edge loop.

    Each column is emitted by carrying a unit test charge around the loop
    (x,y) -> (x+1,y) -> (x+1,y+1) -> (x,y+1) -> (x,y); defect crossings are
    entered and left once each, so the loop always closes.
    """
    L, N = lat.L, lat.N
    rows, cols, vals = [], [], []
    for y in range(L):
        for x in range(L):
            p = y * L + x
            f = lat.face_id(x, y)
            k = 1
            for direction in (PLUS_X, PLUS_Y, MINUS_X, MINUS_Y):
                e, a, k = lat.hop(f, direction, k)
                rows.append(e)
                cols.append(p)
                vals.append(a)
                _, f, _ = lat.neighbor(f, direction)
            assert k == 1 and f == lat.face_id(x, y)
    B = sp.csr_matrix((vals, (rows, cols)), shape=(lat.n_edges, lat.n_faces), dtype=np.int64)
    B.data %= N
    return B


# ---- error states ----------------------------------------------------------


@dataclass
class ErrorState:
    """Net X-power per edge plus the cached face charges it induces."""

    s: np.ndarray
    q: np.ndarray

    @classmethod
    def vacuum(cls, lat: Lattice) -> "ErrorState":
        return cls(s=np.zeros(lat.n_edges, dtype=np.int64), q=np.zeros(lat.n_faces, dtype=np.int64))

    @classmethod
    def from_powers(cls, lat: Lattice, s: np.ndarray) -> "ErrorState":
        s = np.asarray(s, dtype=np.int64) % lat.N
        if s.shape != (lat.n_edges,):
            raise ValueError("edge map has shape %r, expected (%d,)" % (s.shape, lat.n_edges))
        return cls(s=s.copy(), q=syndrome(lat, s))

    def copy(self) -> "ErrorState":
        return ErrorState(s=self.s.copy(), q=self.q.copy())


def syndrome(lat: Lattice, s: np.ndarray) -> np.ndarray:
    """Face charges W @ s mod N."""
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (lat.n_edges,):
        raise ValueError("edge map has shape %r, expected (%d,)" % (s.shape, lat.n_edges))
    return np.asarray(lat.W @ (s % lat.N)) % lat.N


def apply_event(state: ErrorState, lat: Lattice, edge: int, a: int):
    """Apply X^a on one edge, updating the state in place.

    Returns ((face, old charge, new charge), (face, old, new)) for the two
    endpoint faces, so rate caches can be refreshed locally.
    """
    N = lat.N
    if not 1 <= a < N:
        raise ValueError("power a must be in [1, N)")
    u = int(lat.edge_tail[edge])
    v = int(lat.edge_head[edge])
    state.s[edge] = (state.s[edge] + a) % N
    old_u, old_v = int(state.q[u]), int(state.q[v])
    state.q[u] = (old_u + a * int(lat.w_tail[edge])) % N
    state.q[v] = (old_v + a * int(lat.w_head[edge])) % N
    return (u, old_u, int(state.q[u])), (v, old_v, int(state.q[v]))


# ---- logical structure ------------------------------------------------------


def logical_functionals(lat: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Two edge functionals reading off the winding classes.

    Gaussian elimination over GF(N) solves for functionals that vanish on
    every stabilizer column and evaluate to (1, 0) and (0, 1) on the
    canonical horizontal/vertical winding strings.  Representatives are
    unique only modulo rows of W, which act as zero on any syndrome-free
    configuration.
    """
    N = lat.N
    lh = lat.winding_loop("h")
    lv = lat.winding_loop("v")
    constraints = np.vstack([lat.B.toarray().T % N, lh, lv])
    rhs = np.zeros((constraints.shape[0], 2), dtype=np.int64)
    rhs[-2, 0] = 1
    rhs[-1, 1] = 1
    sol = gf.solve(constraints, rhs, N)
    if sol is None:
        raise DegeneracyError(
            "no independent logical functionals exist: the stabilizer group "
            "spans the winding classes (degeneracy broken)"
        )
    phi1, phi2 = sol[:, 0].astype(np.int64), sol[:, 1].astype(np.int64)
    return phi1, phi2


def logical_class(lat: Lattice, s: np.ndarray) -> tuple[int, int]:
    """Winding class (phi1 . s, phi2 . s) of a syndrome-free edge map."""
    s = np.asarray(s, dtype=np.int64) % lat.N
    q = syndrome(lat, s)
    if np.any(q != 0):
        raise ValueError("logical_class requires a syndrome-free edge map")
    phi1, phi2 = lat.phi
    return int(phi1 @ s % lat.N), int(phi2 @ s % lat.N)

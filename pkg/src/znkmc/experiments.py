"""Experiment drivers: coherence-time sweeps, single-pair dynamics, fits.

A coherence trial evolves a vacuum-encoded lattice and decodes a copy of the
state at every checkpoint of a geometric schedule; the recovery probability
p(t) across trials defines the coherence time tau as the first (log-
interpolated) crossing below the success threshold.  Trials are the unit of
parallelism: each carries a seed derived from (master seed, point, trial id),
so results are bit-identical for any worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engine
from ._kernels import mix_seed
from .decoder import Recovery, attempt_recovery
from .energy import MassVector
from .lattice import ErrorState, Lattice, LatticeSpec, build_lattice

__all__ = [
    "CoherenceConfig",
    "CoherencePoint",
    "CoherenceEstimate",
    "SinglePairConfig",
    "SinglePairResult",
    "FitReport",
    "GradientReport",
    "checkpoint_times",
    "wilson_interval",
    "estimate_tau",
    "bootstrap_tau",
    "coherence_time",
    "single_pair",
    "fit",
    "gradient_vs_beta",
]

log = logging.getLogger(__name__)

TRIAL_CHUNK = 64  # fixed so chunking never depends on the worker count
FIT_MODELS = {
    "arrhenius": ("epsilon", "c"),
    "super_exp": ("a", "b", "c"),
    "power_law": ("G", "c"),
}

_lattice_cache: dict[LatticeSpec, Lattice] = {}


def _cached_lattice(spec: LatticeSpec) -> Lattice:
    lat = _lattice_cache.get(spec)
    if lat is None:
        lat = build_lattice(spec)
        lat.phi  # force the functional solve once per process
        _lattice_cache[spec] = lat
    return lat


def checkpoint_times(t0: float, ratio: float, max_time: float) -> np.ndarray:
    """Geometric schedule t0 * ratio^k, truncated at max_time."""
    if t0 <= 0 or ratio <= 1 or max_time < t0:
        raise ValueError("need t0 > 0, ratio > 1, max_time >= t0")
    times = [t0]
    while times[-1] * ratio <= max_time:
        times.append(times[-1] * ratio)
    return np.array(times)


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # rounding must never push the interval off the point estimate
    return max(0.0, min(center - half, phat)), min(1.0, max(center + half, phat))


# ---------------------------------------------------------------------------
# coherence-time sweeps


@dataclass(frozen=True)
class CoherenceConfig:
    """Sweep definition: one point per (beta, lattice spec)."""

    specs: tuple[LatticeSpec, ...]
    J: MassVector
    betas: tuple[float, ...]
    trials: int = 40_000
    p_star: float = 0.99
    t0: float = 1.0
    ratio: float = 1.3
    max_time: float = 60.0
    master_seed: int = 0

    def __post_init__(self):
        if not 0 < self.p_star < 1:
            raise ValueError("p_star must be in (0, 1)")
        if self.trials < 100:
            raise ValueError("trials must be >= 100")
        if self.ratio <= 1:
            raise ValueError("checkpoint ratio must be > 1")
        for spec in self.specs:
            MassVector.coerce(self.J, spec.N)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(s.L for s in self.specs)

    def points(self):
        pid = 0
        for spec in self.specs:
            for beta in self.betas:
                yield pid, beta, spec
                pid += 1


@dataclass
class CoherenceEstimate:
    tau: float  # inf = never crossed within max_time; nan never occurs (see status)
    status: str  # "ok" | "exceeds-max-time" | "below-first-checkpoint"
    ci_lo: float
    ci_hi: float


@dataclass
class CoherencePoint:
    beta: float
    L: int
    times: np.ndarray
    p: np.ndarray
    wilson_lo: np.ndarray
    wilson_hi: np.ndarray
    n_trials: int
    estimate: CoherenceEstimate
    warnings: list[str] = field(default_factory=list)


def _coherence_chunk(payload) -> np.ndarray:
    """Run a contiguous range of trials; returns (chunk, n_checkpoints) bits."""
    spec, J, beta, times, master_seed, point_id, lo, hi = payload
    lat = _cached_lattice(spec)
    bits = np.zeros((hi - lo, len(times)), dtype=np.uint8)
    for trial in range(lo, hi):
        state = ErrorState.vacuum(lat)
        traj = engine.init(lat, state, beta=beta, J=J, seed=mix_seed(master_seed, point_id, trial))
        for k, t in enumerate(times):
            engine.run_until(traj, float(t))
            if attempt_recovery(lat, traj.state) is Recovery.SUCCESS:
                bits[trial - lo, k] = 1
    return bits


def _map_chunks(fn, payloads, workers: int):
    if workers <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


def _interp_tau(times: np.ndarray, p: np.ndarray, p_star: float) -> tuple[float, str]:
    below = p < p_star
    if not below.any():
        return math.inf, "exceeds-max-time"
    k = int(np.argmax(below))
    if k == 0:
        return float(times[0]), "below-first-checkpoint"
    lt0, lt1 = math.log(times[k - 1]), math.log(times[k])
    frac = (p[k - 1] - p_star) / (p[k - 1] - p[k])
    return math.exp(lt0 + (lt1 - lt0) * frac), "ok"


def estimate_tau(times: np.ndarray, p: np.ndarray, p_star: float) -> tuple[float, str]:
    """First crossing of p below p_star, interpolated in log time.

    tau always lies between its bracketing checkpoints; a curve that never
    crosses reports inf, one already below at the first checkpoint reports
    t0 with a status telling the schedule was too coarse.
    """
    return _interp_tau(np.asarray(times, dtype=float), np.asarray(p, dtype=float), p_star)


def bootstrap_tau(
    success: np.ndarray, times: np.ndarray, p_star: float, n_boot: int, seed: int
) -> tuple[float, float]:
    """Percentile CI over trial resamples (degenerate taus kept as censored values)."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n = success.shape[0]
    taus = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, n)
        pb = success[idx].mean(axis=0)
        taus[b], _ = _interp_tau(times, pb, p_star)
    with np.errstate(invalid="ignore"):  # all-inf resamples are a valid censored CI
        return float(np.percentile(taus, 2.5)), float(np.percentile(taus, 97.5))


def coherence_time(cfg: CoherenceConfig, workers: int = 1, n_boot: int = 1000) -> list[CoherencePoint]:
    """Run the full (beta, L) sweep and estimate tau per point."""
    times = checkpoint_times(cfg.t0, cfg.ratio, cfg.max_time)
    out: list[CoherencePoint] = []
    for point_id, beta, spec in cfg.points():
        payloads = [
            (spec, cfg.J, beta, times, cfg.master_seed, point_id, lo, min(lo + TRIAL_CHUNK, cfg.trials))
            for lo in range(0, cfg.trials, TRIAL_CHUNK)
        ]
        success = np.vstack(_map_chunks(_coherence_chunk, payloads, workers))
        p = success.mean(axis=0)
        wl = np.empty_like(p)
        wh = np.empty_like(p)
        for k in range(len(times)):
            wl[k], wh[k] = wilson_interval(int(success[:, k].sum()), cfg.trials)
        tau, status = _interp_tau(times, p, cfg.p_star)
        ci = bootstrap_tau(success, times, cfg.p_star, n_boot, mix_seed(cfg.master_seed, point_id, 0xB007))
        warnings = _monotonicity_warnings(times, p, wl, wh)
        for w in warnings:
            log.warning("point (beta=%g, L=%d): %s", beta, spec.L, w)
        out.append(
            CoherencePoint(
                beta=beta, L=spec.L, times=times, p=p, wilson_lo=wl, wilson_hi=wh,
                n_trials=cfg.trials,
                estimate=CoherenceEstimate(tau=tau, status=status, ci_lo=ci[0], ci_hi=ci[1]),
                warnings=warnings,
            )
        )
    return out


def _monotonicity_warnings(times, p, wl, wh) -> list[str]:
    """p(t) should not increase beyond statistical noise; flag 3-sigma jumps."""
    warnings = []
    for k in range(len(times) - 1):
        width = ((wh[k] - wl[k]) + (wh[k + 1] - wl[k + 1])) / 2.0
        if p[k + 1] > p[k] + 3.0 * width:
            warnings.append(
                "p increased from %.4f to %.4f between t=%.4g and t=%.4g (beyond 3 sigma)"
                % (p[k], p[k + 1], times[k], times[k + 1])
            )
    return warnings


# ---------------------------------------------------------------------------
# single-pair mass/spread dynamics


@dataclass(frozen=True)
class SinglePairConfig:
    spec: LatticeSpec
    J: MassVector
    beta: float
    samples: int = 1000
    t_min: float = 0.25
    t_max: float = 50.0
    n_points: int = 24
    master_seed: int = 0

    def time_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.n_points)


@dataclass
class SinglePairResult:
    times: np.ndarray
    mean_mass: np.ndarray
    sem_mass: np.ndarray
    mean_spread: np.ndarray
    sem_spread: np.ndarray
    n_alive: np.ndarray
    initial_mass: float
    initial_spread: float


def _eligible_pair_edges(lat: Lattice) -> np.ndarray:
    """Horizontal edges not crossed by any defect line (weights still +-1)."""
    n_faces = lat.n_faces
    h = np.arange(n_faces)
    plain = (lat.w_head[h] == 1) & (lat.w_tail[h] == lat.N - 1)
    return h[plain]


def _single_pair_chunk(payload):
    spec, J, beta, grid, master_seed, lo, hi = payload
    lat = _cached_lattice(spec)
    eligible = _eligible_pair_edges(lat)
    jl = J.lookup()
    n_t = len(grid)
    # moments accumulated relative to the t=0 values to avoid cancellation
    shift_mass = float(jl[1] + jl[lat.N - 1])
    shift_spread = 0.5
    sums = np.zeros((4, n_t))  # d_mass, d_mass^2, d_spread, d_spread^2
    alive = np.zeros(n_t, dtype=np.int64)
    for sample in range(lo, hi):
        edge = int(eligible[mix_seed(master_seed, 0xED6E, sample) % len(eligible)])
        state = ErrorState.vacuum(lat)
        state.s[edge] = 1
        state.q[lat.edge_head[edge]] = 1
        state.q[lat.edge_tail[edge]] = lat.N - 1
        traj = engine.init(
            lat, state, beta=beta, J=J, mode=engine.RESTRICTED, seed=mix_seed(master_seed, 1, sample)
        )
        for k, t in enumerate(grid):
            engine.run_until(traj, float(t))
            if not traj.state.q.any():
                break  # thermalized back to vacuum; later grid points excluded
            dm = float(jl[traj.state.q].sum()) - shift_mass
            ds = engine.spread_from_charges(traj.state.q, lat.L, jl) - shift_spread
            sums[0, k] += dm
            sums[1, k] += dm * dm
            sums[2, k] += ds
            sums[3, k] += ds * ds
            alive[k] += 1
    return sums, alive


def single_pair(cfg: SinglePairConfig, workers: int = 1) -> SinglePairResult:
    """Average mass and spread of an initially adjacent low-mass pair.

    Samples evolve in the restricted (no pair creation) environment; samples
    that have thermalized back to the vacuum stop contributing, so the means
    are over the still-evolving population, whose size is reported alongside.
    """
    grid = cfg.time_grid()
    payloads = [
        (cfg.spec, cfg.J, cfg.beta, grid, cfg.master_seed, lo, min(lo + TRIAL_CHUNK, cfg.samples))
        for lo in range(0, cfg.samples, TRIAL_CHUNK)
    ]
    results = _map_chunks(_single_pair_chunk, payloads, workers)
    sums = sum(r[0] for r in results)
    alive = sum(r[1] for r in results)
    jl = cfg.J.lookup()
    shift_mass = float(jl[1] + jl[cfg.spec.N - 1])
    n = np.maximum(alive, 1)
    d_mass = sums[0] / n
    d_spread = sums[2] / n
    mean_mass = shift_mass + d_mass
    mean_spread = 0.5 + d_spread
    var_mass = np.maximum(sums[1] / n - d_mass**2, 0.0)
    var_spread = np.maximum(sums[3] / n - d_spread**2, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        bessel = np.where(alive > 1, alive / np.maximum(alive - 1, 1), np.nan)
        sem_mass = np.sqrt(var_mass * bessel) / np.sqrt(n)
        sem_spread = np.sqrt(var_spread * bessel) / np.sqrt(n)
    keep = alive >= 2  # SEM undefined below two survivors
    return SinglePairResult(
        times=grid[keep],
        mean_mass=mean_mass[keep],
        sem_mass=sem_mass[keep],
        mean_spread=mean_spread[keep],
        sem_spread=sem_spread[keep],
        n_alive=alive[keep],
        initial_mass=float(jl[1] + jl[-1]),
        initial_spread=0.5,
    )


# ---------------------------------------------------------------------------
# fits


@dataclass
class FitReport:
    """OLS fit of ln tau against a model basis."""

    model: str
    coefficients: np.ndarray
    names: tuple[str, ...]
    residuals: np.ndarray
    rms: float
    points: np.ndarray  # (x, tau) rows as fitted
    meta: dict = field(default_factory=dict)

    def coeff(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "names": list(self.names),
            "coefficients": [float(c) for c in self.coefficients],
            "residuals": [float(r) for r in self.residuals],
            "rms": float(self.rms),
            "points": [[float(a), float(b)] for a, b in self.points],
            "meta": dict(self.meta),
        }


def _design(model: str, x: np.ndarray) -> np.ndarray:
    if model == "arrhenius":
        return np.column_stack([x, np.ones_like(x)])
    if model == "super_exp":
        return np.column_stack([x**2, x, np.ones_like(x)])
    if model == "power_law":
        return np.column_stack([np.log(x), np.ones_like(x)])
    raise ValueError("unknown model %r; expected one of %s" % (model, sorted(FIT_MODELS)))


def fit(points, model: str, meta: dict | None = None) -> FitReport:
    """Least squares on ln tau; points are (abscissa, tau) pairs.

    The abscissa is beta for arrhenius/super_exp and L for power_law.
    Degenerate tau values (inf or below-schedule markers) must be filtered
    by the caller.
    """
    names = FIT_MODELS.get(model)
    if names is None:
        raise ValueError("unknown model %r; expected one of %s" % (model, sorted(FIT_MODELS)))
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, tau) pairs")
    if not np.all(np.isfinite(pts)) or np.any(pts[:, 1] <= 0):
        raise ValueError("points must be finite with tau > 0")
    if len(pts) < len(names) + 1:
        raise ValueError("need at least %d points for %s" % (len(names) + 1, model))
    x, tau = pts[:, 0], pts[:, 1]
    X = _design(model, x)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise ValueError("rank-deficient design matrix (degenerate abscissae)")
    y = np.log(tau)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coef
    return FitReport(
        model=model,
        coefficients=coef,
        names=names,
        residuals=residuals,
        rms=float(np.sqrt(np.mean(residuals**2))),
        points=pts,
        meta=meta or {},
    )


@dataclass
class GradientReport:
    """Linear fit of the size-scaling gradient G against beta."""

    betas: np.ndarray
    gradients: np.ndarray
    slope: float
    intercept: float
    residuals: np.ndarray
    rms: float

    def to_dict(self) -> dict:
        return {
            "betas": [float(b) for b in self.betas],
            "gradients": [float(g) for g in self.gradients],
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "residuals": [float(r) for r in self.residuals],
            "rms": float(self.rms),
        }


def gradient_vs_beta(reports: list[FitReport]) -> GradientReport:
    """Slope of G(beta) from power-law reports carrying meta['beta']."""
    if len(reports) < 3:
        raise ValueError("need power-law fits at >= 3 beta values")
    rows = []
    for rep in reports:
        if rep.model != "power_law" or "beta" not in rep.meta:
            raise ValueError("gradient_vs_beta expects power_law reports with meta['beta']")
        rows.append((float(rep.meta["beta"]), rep.coeff("G")))
    rows.sort()
    betas = np.array([r[0] for r in rows])
    grads = np.array([r[1] for r in rows])
    X = np.column_stack([betas, np.ones_like(betas)])
    coef, *_ = np.linalg.lstsq(X, grads, rcond=None)
    residuals = grads - X @ coef
    return GradientReport(
        betas=betas,
        gradients=grads,
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residuals=residuals,
        rms=float(np.sqrt(np.mean(residuals**2))),
    )

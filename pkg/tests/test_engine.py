import math

import numpy as np
import pytest

from znkmc import engine
from znkmc.energy import MassVector
from znkmc.lattice import ErrorState, LatticeSpec, apply_event, build_lattice

J_PAPER = MassVector((0.38, 1.0, 1.0, 0.38))
J_UNIFORM = MassVector((1.0, 1.0, 1.0, 1.0))


# ---- Davies rates ------------------------------------------------------------


def test_davies_zero_limit_and_frozen_value():
    assert engine.davies_rate(0.0, 8.0) == pytest.approx(0.125, abs=1e-15)
    # frozen from a 40-digit evaluation of 0.76 / (1 - e^(-8*0.76))
    assert engine.davies_rate(0.76, 8.0) == pytest.approx(0.76174300255397082861, rel=1e-14)
    assert engine.davies_rate(-0.76, 8.0) == pytest.approx(0.001743002553970828612, rel=1e-14)


def test_davies_detailed_balance_identity():
    assert engine.davies_rate(-0.76, 8) / engine.davies_rate(0.76, 8) == pytest.approx(
        math.exp(-8 * 0.76), rel=1e-13
    )


def test_davies_asymptotics_and_stability():
    assert engine.davies_rate(3.0, 50.0) == pytest.approx(3.0, rel=1e-10)
    w = -2.0
    assert engine.davies_rate(w, 50.0) == pytest.approx(abs(w) * math.exp(-50 * abs(w)), rel=1e-6)
    # extreme arguments must not overflow
    assert engine.davies_rate(-5.0, 400.0) >= 0.0
    assert np.isfinite(engine.davies_rate(5.0, 400.0))


def test_davies_rejects_bad_beta():
    with pytest.raises(ValueError):
        engine.davies_rate(1.0, 0.0)
    with pytest.raises(ValueError):
        engine.davies_rate(1.0, -2.0)


# ---- init --------------------------------------------------------------------


def test_restricted_vacuum_is_frozen():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=8, J=J_PAPER, mode=engine.RESTRICTED)
    assert traj.index.total_rate == 0.0
    assert engine.step(traj) is None and traj.absorbed


def test_full_mode_uniform_masses_rates_by_symmetry():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=4, J=J_UNIFORM)
    rates = traj.index.rates
    assert rates.shape == (2 * 16 * 4,)
    assert np.allclose(rates, engine.davies_rate(-2.0, 4.0))


def test_pair_events_outrate_distant_creations():
    lat = build_lattice(LatticeSpec(N=5, L=8))
    st = ErrorState.vacuum(lat)
    e = lat.h_edge(3, 3)
    apply_event(st, lat, e, 1)
    traj = engine.init(lat, st, beta=8, J=J_PAPER)
    hop_rate = traj.index.rate_of(lat.h_edge(4, 3), 1)  # moves the e_1 along
    far_creation = traj.index.rate_of(lat.h_edge(0, 0), 1)
    assert hop_rate == pytest.approx(1 / 8)
    assert far_creation == pytest.approx(engine.davies_rate(-0.76, 8.0))
    assert hop_rate > far_creation


def test_init_validates_arguments():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    with pytest.raises(ValueError):
        engine.init(lat, ErrorState.vacuum(lat), beta=0.0, J=J_PAPER)
    with pytest.raises(ValueError):
        engine.init(lat, ErrorState.vacuum(lat), beta=1.0, J=J_PAPER, mode="bogus")
    with pytest.raises(ValueError):
        engine.init(lat, ErrorState.vacuum(lat), beta=1.0, J=MassVector((1.0,)))


# ---- stepping ----------------------------------------------------------------


def test_time_strictly_increases_and_cache_consistent():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=2, J=J_PAPER, seed=9)
    t_prev = 0.0
    for _ in range(500):
        rec = engine.step(traj)
        assert rec is not None and rec.time > t_prev
        t_prev = rec.time
    np.testing.assert_array_equal(
        traj.state.q, (lat.W @ traj.state.s).toarray().ravel() % 5
        if hasattr(lat.W @ traj.state.s, "toarray")
        else (lat.W @ traj.state.s) % 5,
    )


def test_waiting_times_match_inverse_total_rate():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=1.5, J=J_PAPER, seed=3)
    t_sum = 0.0
    inv_rate_sum = 0.0
    n = 30000
    for _ in range(n):
        inv_rate_sum += 1.0 / traj.index.total_rate
        rec = engine.step(traj)
        t_sum += rec.dt
    assert t_sum == pytest.approx(inv_rate_sum, rel=0.02)


def test_determinism_identical_seeds():
    lat = build_lattice(LatticeSpec(N=5, L=6))

    def trace(seed):
        traj = engine.init(lat, ErrorState.vacuum(lat), beta=3, J=J_PAPER, seed=seed)
        return [(r.edge, r.power, round(r.time, 12)) for r in (engine.step(traj) for _ in range(200))]

    assert trace(1234) == trace(1234)
    assert trace(1234) != trace(1235)


def test_run_until_reaches_target_and_restricted_absorbs():
    lat = build_lattice(LatticeSpec(N=5, L=6))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=2, J=J_PAPER, seed=5)
    assert engine.run_until(traj, 7.5) == "ok"
    assert traj.t == 7.5
    with pytest.raises(ValueError):
        engine.run_until(traj, 1.0)

    st = ErrorState.vacuum(lat)
    apply_event(st, lat, lat.h_edge(0, 0), 1)
    traj = engine.init(lat, st, beta=2, J=J_UNIFORM, mode=engine.RESTRICTED, seed=6)
    status = None
    while status != "absorbed":
        status = engine.run_until(traj, traj.t + 50.0)
    assert not traj.state.q.any()  # absorbed means the vacuum swallowed the pair
    assert traj.index.total_rate == 0.0


def test_restricted_charge_count_never_revives():
    lat = build_lattice(LatticeSpec(N=5, L=6))
    st = ErrorState.vacuum(lat)
    apply_event(st, lat, lat.h_edge(2, 2), 1)
    traj = engine.init(lat, st, beta=4, J=J_PAPER, mode=engine.RESTRICTED, seed=8)
    seen_zero = False
    for _ in range(2000):
        if engine.step(traj) is None:
            seen_zero = True
        charged = int(np.count_nonzero(traj.state.q))
        if seen_zero:
            assert charged == 0
        if charged == 0:
            seen_zero = True


def test_rate_cache_coherence_after_many_steps():
    lat = build_lattice(LatticeSpec(N=5, L=4, M=2, v_lines=(0, 1, 2, 3)))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=1, J=J_PAPER, seed=2)
    engine.run_until(traj, math.inf, max_events=100_000)
    cached = traj.index.rates.copy()
    fresh = traj.index.fresh_rates(traj.state.q)
    np.testing.assert_allclose(cached, fresh, rtol=1e-9)
    # total drifts only within float noise and is exactly restored on rebuild
    assert traj.index.total_rate == pytest.approx(fresh.sum(), rel=1e-6)
    from znkmc.sumtree import tree_rebuild

    tree_rebuild(traj.index.tree, traj.index.cap)
    rebuilt = traj.index.total_rate
    assert rebuilt == pytest.approx(np.sum(traj.index.rates), rel=1e-12)
    tree_rebuild(traj.index.tree, traj.index.cap)  # idempotent: exact fixed point
    assert traj.index.total_rate == rebuilt


def test_incremental_energy_matches_recomputation():
    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(
        lat, ErrorState.vacuum(lat), beta=1, J=J_PAPER, seed=4, rebuild_every=2**62
    )
    engine.run_until(traj, math.inf, max_events=100_000)
    exact = float(traj.index.jl[traj.state.q].sum())
    assert abs(traj.energy - exact) < 1e-9


def test_event_log_stream():
    import io

    lat = build_lattice(LatticeSpec(N=5, L=4))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=2, J=J_PAPER, seed=10)
    buf = io.StringIO()
    engine.run_until(traj, 2.0, event_log=buf)
    lines = buf.getvalue().strip().splitlines()
    assert traj.n_events == len(lines) > 0
    t, e, a, w = lines[0].split(",")
    assert 0 < float(t) <= 2.0 and 0 <= int(e) < lat.n_edges and 1 <= int(a) < 5


# ---- observables ---------------------------------------------------------------


def test_observables_examples():
    lat = build_lattice(LatticeSpec(N=5, L=8))
    jl04 = MassVector((0.4, 1.0, 1.0, 0.4))
    st = ErrorState.vacuum(lat)
    traj = engine.init(lat, st, beta=8, J=jl04)
    assert engine.observables(traj) == (0.0, 0.0)
    apply_event(st, lat, lat.h_edge(3, 3), 1)
    traj = engine.init(lat, st, beta=8, J=jl04)
    mass, spread = engine.observables(traj)
    assert mass == pytest.approx(0.8)
    assert spread == pytest.approx(0.5)


def test_spread_of_symmetric_pair_is_half_distance():
    lat = build_lattice(LatticeSpec(N=5, L=12))
    jl = MassVector((1.0, 1.0, 1.0, 1.0)).lookup()
    for d in (1, 2, 3, 5):
        q = np.zeros(lat.n_faces, dtype=np.int64)
        q[lat.face_id(2, 4)] = 1
        q[lat.face_id(2 + d, 4)] = 1
        assert engine.spread_from_charges(q, 12, jl) == pytest.approx(d / 2)
    # wrap-around minimal image
    q = np.zeros(lat.n_faces, dtype=np.int64)
    q[lat.face_id(11, 0)] = 2
    q[lat.face_id(1, 0)] = 2
    assert engine.spread_from_charges(q, 12, jl) == pytest.approx(1.0)


def test_gibbs_convergence_smoke():
    # quick, loose version of the acceptance oracle: 2e5 events on L=2
    lat = build_lattice(LatticeSpec(N=5, L=2))
    traj = engine.init(lat, ErrorState.vacuum(lat), beta=1.0, J=J_PAPER, seed=123)
    class_of = np.array([0, 1, 2, 2, 1], dtype=np.int64)
    table = np.zeros((lat.n_faces + 1) ** 2)
    engine.run_occupation(traj, 200_000, class_of, table)
    emp = table / table.sum()

    digits = np.indices((5,) * 8).reshape(8, -1).T
    q = digits @ lat.W.toarray().T % 5
    n_l = ((q == 1) | (q == 4)).sum(axis=1)
    n_h = ((q == 2) | (q == 3)).sum(axis=1)
    e_all = 0.38 * n_l + 1.0 * n_h
    w = np.exp(-1.0 * e_all)
    exact = np.zeros_like(emp)
    np.add.at(exact, n_l + 5 * n_h, w)
    exact /= exact.sum()
    tv = 0.5 * np.abs(emp - exact).sum()
    assert tv < 0.05

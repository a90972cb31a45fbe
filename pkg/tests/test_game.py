"""Offloading game: utilities, potential structure, better-response dynamics."""

import math

import numpy as np
import pytest

import generators
import oracles
from uavmec import game
from uavmec.allocation import compute_weights


def edge_utility_reference(i, profile, ctx):
    """Player i's edge utility recomputed from entry fields alone.

    Shares follow the context policy over the offloading set with i forced
    in; the deadline turns the option into +inf. Mirrors no package helper
    beyond the raw dataclass fields.
    """
    members = [j for j in range(ctx.m) if profile[j] or j == i]
    weights = [compute_weights(ctx.entries[j], ctx.f_max, ctx.bandwidth) for j in members]
    if ctx.policy == "equal":
        share = 1.0 / len(members)
        s = {j: share for j in members}
        w = {j: share for j in members}
    else:
        sb = sum(b for b, _ in weights)
        sp = sum(p for _, p in weights)
        s = {j: b / sb for j, (b, _) in zip(members, weights)}
        w = {j: p / sp for j, (_, p) in zip(members, weights)}
    e = ctx.entries[i]
    if s[i] <= 0.0 or w[i] <= 0.0:
        return math.inf
    cycles = e.data_bits * e.intensity
    rate = w[i] * ctx.bandwidth * e.spectral_eff
    t_edge = e.data_bits / rate + cycles / (s[i] * ctx.f_max)
    if t_edge > ctx.deadlines[i]:
        return math.inf
    e_tx = e.tx_power * e.data_bits / rate
    return (ctx.q_ratio * ctx.e_compute[i]
            + e.gamma * t_edge + (1.0 - e.gamma) * e_tx)


def test_utility_local_formula(cfg, rng):
    ctx = generators.random_context(rng, 5, cfg)
    for i in range(ctx.m):
        e = ctx.entries[i]
        assert game.utility_local(i, ctx) == pytest.approx(ctx.u_loc[i], rel=1e-15)
        assert ctx.u_loc[i] > 0.0
        assert e.spectral_eff > 0.0


def test_utility_edge_matches_reference(cfg, rng):
    for _ in range(40):
        m = int(rng.integers(1, 9))
        ctx = generators.random_context(rng, m, cfg)
        profile = (rng.random(m) < 0.5).astype(int)
        i = int(rng.integers(0, m))
        want = edge_utility_reference(i, profile, ctx)
        got = game.utility_edge(i, profile, ctx)
        if math.isinf(want):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(want, rel=1e-12)


def test_utility_edge_equal_policy(cfg, rng):
    for _ in range(20):
        m = int(rng.integers(2, 7))
        ctx = generators.random_context(rng, m, cfg, policy="equal")
        profile = np.ones(m, dtype=int)
        i = int(rng.integers(0, m))
        want = edge_utility_reference(i, profile, ctx)
        got = game.utility_edge(i, profile, ctx)
        if math.isinf(want):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(want, rel=1e-12)


def test_utility_for_dispatch(cfg, rng):
    ctx = generators.random_context(rng, 4, cfg)
    profile = np.array([1, 0, 1, 0])
    assert game.utility_for(1, profile, ctx) == game.utility_local(1, ctx)
    assert game.utility_for(0, profile, ctx) == game.utility_edge(0, profile, ctx)


def test_potential_matches_pairwise_expansion(cfg, rng):
    for _ in range(40):
        m = int(rng.integers(1, 10))
        ctx = generators.random_context(rng, m, cfg)
        profile = (rng.random(m) < 0.5).astype(int)
        q_terms = [ctx.q_ratio * ctx.e_compute[i] for i in range(m)]
        want = oracles.pairwise_potential(profile, ctx.betas, ctx.phis, q_terms, ctx.u_loc)
        got = game.potential(profile, ctx)
        assert got == pytest.approx(want, rel=1e-12)


def test_potential_identity_under_deviations(cfg, rng):
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 11))
        ctx = generators.random_context(rng, m, cfg)
        profile = (rng.random(m) < 0.5).astype(int)
        for i in range(m):
            flipped = profile.copy()
            flipped[i] ^= 1
            du = game.utility_for(i, flipped, ctx) - game.utility_for(i, profile, ctx)
            df = game.potential(flipped, ctx) - game.potential(profile, ctx)
            if math.isinf(du) or math.isinf(df):
                assert math.isinf(du) and math.isinf(df)
                continue
            worst = max(worst, abs(du - df) / max(1.0, abs(du)))
    assert worst <= 1e-9


def test_stage1_reaches_equilibrium(cfg, rng):
    for _ in range(30):
        m = int(rng.integers(2, 8))
        ctx = generators.random_context(rng, m, cfg)
        res = game.solve_stage1(ctx)
        assert res.converged
        assert game.is_equilibrium(res.profile, ctx)
        # no player with a strictly better unilateral action, checked raw
        for i in range(m):
            here = game.utility_for(i, res.profile, ctx)
            flipped = list(res.profile)
            flipped[i] ^= 1
            assert game.utility_for(i, flipped, ctx) >= here - 1e-9 * max(1.0, abs(here))


def test_stage1_profile_in_exhaustive_equilibrium_set(cfg, rng):
    for _ in range(25):
        m = int(rng.integers(1, 5))
        ctx = generators.random_context(rng, m, cfg)
        res = game.solve_stage1(ctx)
        eqs = oracles.enumerate_equilibria(
            ctx,
            lambda i, prof: game.utility_edge(i, prof, ctx),
            lambda i: game.utility_local(i, ctx),
            lambda i, prof: not math.isinf(game.utility_edge(i, prof, ctx)))
        assert len(eqs) >= 1
        assert tuple(res.profile) in eqs


def test_stage1_descends_potential(cfg, rng):
    """Every accepted move strictly lowers the potential."""
    found_moves = False
    for _ in range(10):
        ctx = generators.random_context(rng, 8, cfg)
        res = game.solve_stage1(ctx, record_trace=True)
        values = [game.potential(np.zeros(ctx.m, dtype=int), ctx)]
        values += [entry[6] for entry in res.trace]
        found_moves = found_moves or len(res.trace) > 0
        assert all(b < a + 1e-12 * max(1.0, abs(a))
                   for a, b in zip(values, values[1:]))
    assert found_moves


def test_stage1_allocation_covers_offloaders(cfg, rng):
    ctx = generators.random_context(rng, 6, cfg)
    res = game.solve_stage1(ctx)
    members = {i for i, a in enumerate(res.profile) if a}
    if members:
        ids = {ctx.entries[i].id for i in members}
        assert set(res.allocation.compute_fraction) == ids
        assert sum(res.allocation.bandwidth_fraction.values()) == pytest.approx(1.0, abs=1e-9)
    else:
        assert res.allocation.compute_fraction == {}


def test_deadline_forces_local(cfg, rng):
    """A deadline nobody can meet leaves everyone computing locally."""
    from uavmec.game import make_context
    from uavmec.lyapunov import EnergyQueues
    from uavmec.model import Task, UdState

    uds = [UdState(u.id, u.position, u.velocity, u.params,
                   Task(u.task.data_bits, u.task.intensity, 1e-9))
           for u in generators.random_uds(rng, 5, cfg)]
    q = EnergyQueues(cfg.queues.budget_compute, cfg.queues.budget_propulsion,
                     cfg.queues.v_param)
    ctx = make_context(uds, (200.0, 200.0), q, cfg.channel, cfg.uav)
    res = game.solve_stage1(ctx)
    assert list(res.profile) == [0] * 5
    assert res.converged


def test_queue_pressure_discourages_offloading(cfg, rng):
    """Raising Q_c can only shrink the equilibrium offloading set's appeal."""
    uds = generators.random_uds(rng, 8, cfg)
    from uavmec.game import make_context
    from uavmec.lyapunov import EnergyQueues

    def count(qc):
        q = EnergyQueues(cfg.queues.budget_compute, cfg.queues.budget_propulsion,
                         cfg.queues.v_param, q_compute=qc)
        ctx = make_context(uds, (200.0, 200.0), q, cfg.channel, cfg.uav)
        return int(sum(game.solve_stage1(ctx).profile))

    free = count(0.0)
    crushed = count(1e9)
    assert crushed == 0
    assert free >= crushed


def test_make_context_rejects_bad_policy(cfg, rng):
    uds = generators.random_uds(rng, 2, cfg)
    from uavmec.game import make_context
    from uavmec.lyapunov import EnergyQueues

    q = EnergyQueues(1.0, 1.0, 50.0)
    with pytest.raises(ValueError):
        make_context(uds, (0.0, 0.0), q, cfg.channel, cfg.uav, policy="greedy")

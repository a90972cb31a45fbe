"""Fast internal consistency battery behind the selftest verb.

Each check exercises one structural identity the optimizer relies on, sized
to finish in seconds. These are smoke checks, not the full test suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import game, trajectory
from .allocation import era_allocation, optimal_allocation, p11_objective
from .lyapunov import EnergyQueues, update_queues
from .model import (
    ChannelParams,
    Task,
    UavParams,
    UdParams,
    UdState,
    propulsion_power,
)
from .scenario import ScenarioConfig, load_config_text
from .sim import generate_scenario, run_episode

__all__ = ["run_checks", "format_lines"]


def _random_uds(rng, m, cfg):
    uds = []
    w, h = cfg.area
    for i in range(m):
        params = UdParams(
            f_local=float(rng.choice(cfg.ud.f_local_choices)),
            tx_power=cfg.ud.tx_power, gamma=float(rng.uniform(0.1, 0.9)),
            kappa_eff=cfg.ud.kappa_eff)
        task = Task(float(rng.uniform(cfg.tasks.data_min, cfg.tasks.data_max)),
                    float(rng.uniform(cfg.tasks.intensity_min, cfg.tasks.intensity_max)),
                    cfg.tasks.deadline)
        uds.append(UdState(i, rng.uniform((0, 0), (w, h)), np.zeros(2), params, task))
    return uds


def _check_potential_identity(rng, cfg):
    worst = 0.0
    for _ in range(40):
        m = int(rng.integers(2, 8))
        uds = _random_uds(rng, m, cfg)
        q = EnergyQueues(10.0, 100.0, cfg.queues.v_param,
                         float(rng.uniform(0, 50)), float(rng.uniform(0, 50)))
        ctx = game.make_context(uds, rng.uniform((0, 0), cfg.area), q,
                                cfg.channel, cfg.uav)
        prof = (rng.random(m) < 0.5).astype(np.int8)
        i = int(rng.integers(0, m))
        flipped = prof.copy()
        flipped[i] ^= 1
        du = game.utility_for(i, flipped, ctx) - game.utility_for(i, prof, ctx)
        df = game.potential(flipped, ctx) - game.potential(prof, ctx)
        if math.isinf(du) or math.isinf(df):
            continue
        worst = max(worst, abs(du - df) / max(1.0, abs(du)))
    return worst <= 1e-9, f"max relative mismatch {worst:.2e}"


def _check_allocation_identity(rng, cfg):
    worst = 0.0
    for _ in range(40):
        m = int(rng.integers(1, 8))
        uds = _random_uds(rng, m, cfg)
        ctx = game.make_context(uds, rng.uniform((0, 0), cfg.area),
                                EnergyQueues(10.0, 100.0, cfg.queues.v_param),
                                cfg.channel, cfg.uav)
        entries = list(ctx.entries)
        alloc = optimal_allocation(entries, cfg.uav.f_max, cfg.channel.bandwidth)
        got = p11_objective(entries, alloc, cfg.uav.f_max, cfg.channel.bandwidth)
        want = sum(ctx.betas) ** 2 + sum(ctx.phis) ** 2
        worst = max(worst, abs(got - want) / max(1.0, want))
        eq = p11_objective(entries, era_allocation(entries),
                           cfg.uav.f_max, cfg.channel.bandwidth)
        if got > eq * (1 + 1e-12):
            return False, "proportional shares beaten by equal shares"
    return worst <= 1e-9, f"max relative mismatch {worst:.2e}"


def _check_minorants(rng, cfg):
    uav = cfg.uav
    cur = np.array([200.0, 200.0])
    prob = trajectory.TrajectoryProblem(
        current_position=(200.0, 200.0),
        ud_positions=rng.uniform((0, 0), cfg.area, (2, 2)),
        cost_weights=np.array([1e5, 2e5]), bandwidth_shares=np.array([0.5, 0.5]),
        snr_scales=np.array([5e4, 8e4]), q_propulsion=5.0,
        v_param=cfg.queues.v_param, uav=uav, mu=cfg.channel.mu,
        bandwidth=cfg.channel.bandwidth, tau=cfg.sim.tau)
    r = prob.radius
    for _ in range(200):
        anchor = cur + rng.uniform(-r, r, 2) / math.sqrt(2.0)
        it = trajectory.ScaIterate(anchor, trajectory.y_anchor(anchor, cur, prob.tau, uav.c3), 0.0, 1)
        cand = cur + rng.uniform(-r, r, 2) / math.sqrt(2.0)
        y = float(rng.uniform(0.1, 10.0))
        exact = y * y + float(np.sum((cand - cur) ** 2)) / prob.tau ** 2
        low = float(trajectory.f_lower(cand, y, it, cur, prob.tau))
        if low > exact + 1e-9:
            return False, "slack minorant exceeded the exact value"
        at = float(trajectory.f_lower(anchor, it.y_local, it, cur, prob.tau))
        ref = it.y_local ** 2 + float(np.sum((anchor - cur) ** 2)) / prob.tau ** 2
        if abs(at - ref) > 1e-9 * max(1.0, ref):
            return False, "slack minorant not tight at its anchor"
        for m in range(prob.k):
            gl = float(trajectory.g_lower(cand, m, it, prob))
            d2 = float(np.sum((cand - prob.ud_positions[m]) ** 2)) + uav.height ** 2
            g = math.log2(1.0 + prob.snr_scales[m] / d2 ** prob.mu)
            if gl > g + 1e-9:
                return False, "rate minorant exceeded the exact value"
    return True, "tangency and domination hold at sampled points"


def _check_propulsion(_rng, cfg):
    u = cfg.uav
    hover = u.c1 + u.c2 * u.c3 ** 0.25
    got = float(propulsion_power(0.0, u))
    if abs(got - hover) > 1e-9 * hover:
        return False, f"hover power {got} vs {hover}"
    if not (propulsion_power(10.0, u) < got < propulsion_power(30.0, u)):
        return False, "speed profile lost its dip"
    return True, f"hover {got:.3f} W with a dip at moderate speed"


def _check_queues(_rng, _cfg):
    q = EnergyQueues(5.0, 50.0, 50.0, 3.0, 40.0)
    q2 = update_queues(q, 10.0, 20.0)
    if q2.q_compute != 8.0 or q2.q_propulsion != 10.0:
        return False, "backlog recursion wrong"
    q3 = update_queues(q2, 0.0, 0.0)
    if q3.q_compute != 3.0 or q3.q_propulsion != 0.0:
        return False, "backlog floor wrong"
    return True, "recursion and floor behave"


def _check_equilibrium(rng, cfg):
    for _ in range(10):
        m = int(rng.integers(2, 5))
        uds = _random_uds(rng, m, cfg)
        q = EnergyQueues(10.0, 100.0, cfg.queues.v_param,
                         float(rng.uniform(0, 30)), float(rng.uniform(0, 30)))
        ctx = game.make_context(uds, rng.uniform((0, 0), cfg.area), q,
                                cfg.channel, cfg.uav)
        res = game.solve_stage1(ctx)
        if not res.converged:
            return False, "better-response sweep did not settle"
        if not game.is_equilibrium(res.profile, ctx):
            return False, "settled profile admits a profitable deviation"
    return True, "profiles settle at equilibria"


def _check_stage2(rng, cfg):
    for _ in range(5):
        k = int(rng.integers(1, 4))
        prob = trajectory.TrajectoryProblem(
            current_position=(200.0, 200.0),
            ud_positions=rng.uniform((0, 0), cfg.area, (k, 2)),
            cost_weights=rng.uniform(5e4, 5e5, k),
            bandwidth_shares=np.full(k, 1.0 / k),
            snr_scales=rng.uniform(1e4, 1e5, k),
            q_propulsion=float(rng.uniform(0, 40)),
            v_param=cfg.queues.v_param, uav=cfg.uav, mu=cfg.channel.mu,
            bandwidth=cfg.channel.bandwidth, tau=cfg.sim.tau)
        res = trajectory.solve_stage2(prob, record_trace=True)
        if res.iterations > 100:
            return False, "iteration cap exceeded"
        exacts = [step[2] for step in res.trace]
        if any(b > a + 1e-6 * (1 + abs(a)) for a, b in zip(exacts, exacts[1:])):
            return False, "exact objective increased between anchors"
        move = float(np.hypot(*(res.position - np.array([200.0, 200.0]))))
        if move > prob.radius * (1 + 1e-9) + 1e-9:
            return False, "planned move violates the speed ball"
    return True, "descent, cap and feasibility hold"


def _check_determinism(_rng, _cfg):
    text = "sim.M = 5\nsim.T = 6\nsim.seeds = 3\n"
    cfg = load_config_text(text)
    outs = []
    for _ in range(2):
        scn = generate_scenario(cfg, 3)
        recs, metrics = run_episode(scn, "OJOA")
        outs.append((tuple((r.cost, r.uav_x, r.uav_y) for r in recs), metrics.avg_cost))
    if outs[0] != outs[1]:
        return False, "repeat run diverged"
    return True, "repeat run reproduced bit for bit"


_CHECKS = (
    ("potential-identity", _check_potential_identity),
    ("allocation-identity", _check_allocation_identity),
    ("surrogate-minorants", _check_minorants),
    ("propulsion-profile", _check_propulsion),
    ("queue-recursion", _check_queues),
    ("offload-equilibrium", _check_equilibrium),
    ("trajectory-descent", _check_stage2),
    ("determinism", _check_determinism),
)


def run_checks(seed: int = 0) -> list:
    """Run the battery; returns (name, ok, detail) triples."""
    cfg = ScenarioConfig()
    out = []
    for name, fn in _CHECKS:
        rng = np.random.default_rng(seed + hash(name) % 1000)
        try:
            ok, detail = fn(rng, cfg)
        except Exception as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out


def format_lines(results: list) -> list:
    return [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]

"""Offload-or-not decisions as a congestion game among the devices.

Each device weighs finishing its task locally against offloading to the UAV,
where it would share the server and the uplink with everyone else who
offloads. With square-root-proportional resource splits the game is an exact
potential game: one function of the whole profile whose change under any
single deviation equals that deviator's utility change. Sweeping the devices
with better responses therefore terminates, and the profile it stops at is a
pure Nash equilibrium of the deadline-constrained game.

The edge utility carries a queue-pressure term (Q_c / V) * server energy, so
a congested compute budget taxes offloading without touching realized costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation, OffloadEntry, compute_weights, era_allocation, optimal_allocation
from .lyapunov import EnergyQueues
from .model import ChannelParams, UavParams, UdState, local_delay, local_energy, spectral_efficiency, uav_compute_energy

__all__ = [
    "GameContext",
    "Stage1Result",
    "make_context",
    "utility_local",
    "utility_edge",
    "utility_for",
    "potential",
    "solve_stage1",
    "is_equilibrium",
]

_INF = float("inf")


@dataclass(frozen=True)
class GameContext:
    """Per-slot inputs of the offloading game, precomputed per device.

    Geometry enters only through each entry's spectral efficiency, evaluated
    at the current UAV position. policy selects how shares are granted when
    evaluating the edge option: "optimal" (square-root proportional) or
    "equal" (the ERA benchmark split).
    """

    entries: tuple[OffloadEntry, ...]
    uav_position: tuple[float, float]
    q_ratio: float                      # queue pressure Q_c / V
    f_max: float
    bandwidth: float
    policy: str = "optimal"
    u_loc: tuple[float, ...] = ()
    e_compute: tuple[float, ...] = ()   # server energy if offloaded
    deadlines: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()
    phis: tuple[float, ...] = ()

    @property
    def m(self) -> int:
        return len(self.entries)


def make_context(uds, uav_pos, queues: EnergyQueues, ch: ChannelParams,
                 uav: UavParams, policy: str = "optimal") -> GameContext:
    """Assemble a GameContext from device states at the current UAV position."""
    if policy not in ("optimal", "equal"):
        raise ValueError("policy must be 'optimal' or 'equal'")
    entries = []
    u_loc = []
    e_comp = []
    ddl = []
    betas = []
    phis = []
    for ud in uds:
        se = float(spectral_efficiency(ud.position, uav_pos, ud.params.tx_power, ch, uav.height))
        e = OffloadEntry(ud.id, ud.params.gamma, ud.task.data_bits,
                         ud.task.intensity, ud.params.tx_power, se)
        entries.append(e)
        g = ud.params.gamma
        u_loc.append(g * local_delay(ud.task, ud.params)
                     + (1.0 - g) * local_energy(ud.task, ud.params))
        e_comp.append(uav_compute_energy(ud.task, uav.varpi))
        ddl.append(ud.task.deadline)
        b, p = compute_weights(e, uav.f_max, ch.bandwidth)
        betas.append(b)
        phis.append(p)
    return GameContext(
        entries=tuple(entries),
        uav_position=(float(uav_pos[0]), float(uav_pos[1])),
        q_ratio=queues.q_compute / queues.v_param,
        f_max=uav.f_max,
        bandwidth=ch.bandwidth,
        policy=policy,
        u_loc=tuple(u_loc),
        e_compute=tuple(e_comp),
        deadlines=tuple(ddl),
        betas=tuple(betas),
        phis=tuple(phis),
    )


def _edge_option(m: int, ctx: GameContext, sum_beta: float, sum_phi: float,
                 k: int) -> tuple[float, float]:
    """(edge utility, edge delay) for device m given aggregate loads.

    sum_beta/sum_phi/k must already include m. Zero shares (degenerate
    weights) surface as infinite delay, which the solver reads as infeasible.
    """
    e = ctx.entries[m]
    if ctx.policy == "equal":
        s = w = 1.0 / k
    else:
        s = ctx.betas[m] / sum_beta if sum_beta > 0.0 else 0.0
        w = ctx.phis[m] / sum_phi if sum_phi > 0.0 else 0.0
    if s <= 0.0 or w <= 0.0:
        return _INF, _INF
    tx_time = e.data_bits / (w * ctx.bandwidth * e.spectral_eff)
    t_edge = tx_time + e.data_bits * e.intensity / (s * ctx.f_max)
    util = (ctx.q_ratio * ctx.e_compute[m]
            + e.gamma * t_edge
            + (1.0 - e.gamma) * e.tx_power * e.data_bits / (w * ctx.bandwidth * e.spectral_eff))
    return util, t_edge


def _aggregates(profile, ctx: GameContext, include: int):
    """Sums of weights and the offloader count over profile with one id forced in."""
    sum_beta = sum_phi = 0.0
    k = 0
    for j in range(ctx.m):
        if profile[j] or j == include:
            k += 1
            sum_beta += ctx.betas[j]
            sum_phi += ctx.phis[j]
    return sum_beta, sum_phi, k


def utility_local(m: int, ctx: GameContext) -> float:
    """Weighted delay/energy of computing locally; profile-independent."""
    return ctx.u_loc[m]


def utility_edge(m: int, profile, ctx: GameContext) -> float:
    """Edge utility of m with m's membership forced into the profile.

    Queue pressure plus weighted edge delay and upload energy, under the
    context's allocation policy over the joined offloading set.
    """
    sum_beta, sum_phi, k = _aggregates(profile, ctx, include=m)
    return _edge_option(m, ctx, sum_beta, sum_phi, k)[0]


def utility_for(m: int, profile, ctx: GameContext) -> float:
    """Utility device m actually receives under the profile."""
    if profile[m]:
        return utility_edge(m, profile, ctx)
    return utility_local(m, ctx)


def potential(profile, ctx: GameContext) -> float:
    """Exact potential of the profile under the square-root-split utilities.

    Offloaders contribute their queue term plus beta/phi congestion partial
    sums in fixed index order; everyone else contributes their local utility.
    Any unilateral deviation moves this by exactly the deviator's utility
    change, which is what makes better-response sweeps terminate.
    """
    total = 0.0
    run_beta = run_phi = 0.0
    for i in range(ctx.m):
        if profile[i]:
            run_beta += ctx.betas[i]
            run_phi += ctx.phis[i]
            total += (ctx.q_ratio * ctx.e_compute[i]
                      + ctx.betas[i] * run_beta
                      + ctx.phis[i] * run_phi)
        else:
            total += ctx.u_loc[i]
    return total


@dataclass
class Stage1Result:
    profile: np.ndarray
    allocation: Allocation
    converged: bool
    sweeps: int
    moves: int
    forced_exits: int
    trace: list = field(default_factory=list)


def solve_stage1(ctx: GameContext, max_sweeps: int | None = None,
                 record_trace: bool = False) -> Stage1Result:
    """Better-response sweeps from the all-local profile to an equilibrium.

    Every sweep offers each device, in index order, its better option given
    the others' current choices; the edge option is only available while it
    meets the deadline under the induced shares. Exact ties keep the
    incumbent choice. Stops at the first sweep with no change, or at the
    sweep cap (10 sweeps per device by default), which under the "optimal"
    policy should never bind; the "equal" policy has no termination
    guarantee, so a cap hit there is reported, not raised.

    The trace, when requested, records per accepted move: sweep, mover, old
    and new decision, both utilities, and the potential after the move.
    """
    m = ctx.m
    cap = max_sweeps if max_sweeps is not None else 10 * max(m, 1)
    profile = np.zeros(m, dtype=np.int8)
    result = Stage1Result(profile, Allocation({}, {}), False, 0, 0, 0)
    sum_beta = sum_phi = 0.0
    k = 0
    for sweep in range(1, cap + 1):
        result.sweeps = sweep
        changed = False
        # recompute aggregates once per sweep so float drift cannot build up
        sum_beta = float(sum(b for j, b in enumerate(ctx.betas) if profile[j]))
        sum_phi = float(sum(p for j, p in enumerate(ctx.phis) if profile[j]))
        k = int(profile.sum())
        for i in range(m):
            was_in = bool(profile[i])
            sb = sum_beta if was_in else sum_beta + ctx.betas[i]
            sp = sum_phi if was_in else sum_phi + ctx.phis[i]
            kk = k if was_in else k + 1
            u_edge, t_edge = _edge_option(i, ctx, sb, sp, kk)
            if t_edge > ctx.deadlines[i]:
                u_edge = _INF
            u_loc = ctx.u_loc[i]
            if u_edge < u_loc:
                now_in = True
            elif u_loc < u_edge:
                now_in = False
            else:
                now_in = was_in
            if now_in != was_in:
                profile[i] = 1 if now_in else 0
                if now_in:
                    sum_beta = sb
                    sum_phi = sp
                    k = kk
                else:
                    sum_beta -= ctx.betas[i]
                    sum_phi -= ctx.phis[i]
                    k -= 1
                changed = True
                result.moves += 1
                if was_in and u_edge == _INF:
                    result.forced_exits += 1
                if record_trace:
                    result.trace.append(
                        (sweep, i, int(was_in), int(now_in), u_loc, u_edge,
                         potential(profile, ctx)))
        if not changed:
            result.converged = True
            break
    members = [ctx.entries[i] for i in range(m) if profile[i]]
    if members:
        if ctx.policy == "equal":
            result.allocation = era_allocation(members)
        else:
            result.allocation = optimal_allocation(members, ctx.f_max, ctx.bandwidth)
    result.profile = profile
    return result


def is_equilibrium(profile, ctx: GameContext, tol: float = 1e-9) -> bool:
    """Check that no device can gain more than tol by deviating alone.

    An offloader missing its deadline under the profile's own shares makes
    the profile invalid outright; a local device's edge option is treated as
    infinitely bad when it would violate the deadline.
    """
    for i in range(ctx.m):
        sum_beta, sum_phi, k = _aggregates(profile, ctx, include=i)
        u_edge, t_edge = _edge_option(i, ctx, sum_beta, sum_phi, k)
        if t_edge > ctx.deadlines[i]:
            u_edge = _INF
        u_loc = ctx.u_loc[i]
        if profile[i]:
            if u_edge == _INF or u_edge > u_loc + tol:
                return False
        else:
            if u_edge < u_loc - tol:
                return False
    return True

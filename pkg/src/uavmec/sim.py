"""Slot-by-slot simulation of the offloading system under each scheme.

A scenario bundles everything decision-independent for one seed: device
positions over time, their compute speeds, and the per-slot task draws.
Schemes consume the same scenario object, so comparisons between them are
paired sample by sample. The draw order inside generate_scenario is part of
the contract: it never depends on parameter values, only on shapes, which
keeps task sizes coupled across sweeps of the data range (same underlying
uniforms, rescaled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import game, trajectory
from .allocation import Allocation
from .lyapunov import EnergyQueues, update_queues
from .mobility import MobilityParams, step_position, step_velocity
from .model import (
    Task,
    UdParams,
    UdState,
    propulsion_power,
    snr_scale,
    ud_cost,
    uplink_rate,
)
from .scenario import SCHEME_NAMES, ScenarioConfig

__all__ = [
    "Scenario",
    "SlotRecord",
    "Metrics",
    "generate_scenario",
    "run_slot",
    "run_episode",
]


@dataclass(frozen=True)
class Scenario:
    """Decision-independent realization of one seed."""

    cfg: ScenarioConfig
    seed: int
    ud_params: tuple          # per-device UdParams, fixed compute speed each
    positions: np.ndarray     # (T, M, 2) device position during each slot
    velocities: np.ndarray    # (T, M, 2)
    data_bits: np.ndarray     # (T, M)
    intensities: np.ndarray   # (T, M)


@dataclass(frozen=True)
class SlotRecord:
    t: int
    ud_costs: tuple           # one realized cost per device
    cost: float               # summed device cost for the slot
    e_compute: float          # UAV compute energy, J
    e_propulsion: float       # UAV propulsion energy, J
    workload: float           # cycles executed at the UAV
    q_compute: float          # backlog at the start of the slot
    q_propulsion: float
    offload_count: int
    uav_x: float
    uav_y: float


@dataclass(frozen=True)
class Metrics:
    """Episode summary; every average is the exact mean of its series."""

    scheme: str
    seed: int
    avg_cost: float
    avg_energy: float
    avg_e_compute: float
    avg_e_propulsion: float
    avg_workload: float
    terminal_q_compute: float
    terminal_q_propulsion: float
    cost_series: tuple = ()
    energy_series: tuple = ()
    workload_series: tuple = ()


def generate_scenario(cfg: ScenarioConfig, seed: int) -> Scenario:
    """Draw one scenario realization.

    Draw order: initial positions, compute-speed choices, mean-velocity
    magnitudes then headings, per-slot task-size uniforms, per-slot
    intensities, per-slot mobility noise. Initial velocities equal the mean
    velocity, and the slot-0 noise column is drawn but unused so that every
    slot index maps to one noise row.
    """
    rng = np.random.default_rng(seed)
    m, t_slots = cfg.sim.num_uds, cfg.sim.num_slots
    w, h = cfg.area
    pos0 = rng.uniform((0.0, 0.0), (w, h), (m, 2))
    f_idx = rng.integers(0, len(cfg.ud.f_local_choices), m)
    speeds = rng.uniform(0.0, cfg.mobility.mean_speed_max, m)
    headings = rng.uniform(0.0, 2.0 * math.pi, m)
    u_data = rng.random((t_slots, m))
    intensities = rng.uniform(cfg.tasks.intensity_min, cfg.tasks.intensity_max, (t_slots, m))
    noise = rng.normal(0.0, cfg.mobility.sigma, (t_slots, m, 2))

    data_bits = cfg.tasks.data_min + (cfg.tasks.data_max - cfg.tasks.data_min) * u_data
    mean_v = np.stack([speeds * np.cos(headings), speeds * np.sin(headings)], axis=1)
    params = tuple(
        UdParams(f_local=float(cfg.ud.f_local_choices[f_idx[i]]),
                 tx_power=cfg.ud.tx_power, gamma=cfg.ud.gamma,
                 kappa_eff=cfg.ud.kappa_eff)
        for i in range(m))

    mob = tuple(
        MobilityParams(alpha=cfg.mobility.alpha,
                       mean_velocity=(float(mean_v[i, 0]), float(mean_v[i, 1])),
                       sigma=cfg.mobility.sigma, area=(w, h))
        for i in range(m))
    positions = np.empty((t_slots, m, 2))
    velocities = np.empty((t_slots, m, 2))
    positions[0] = pos0
    velocities[0] = mean_v
    for t in range(1, t_slots):
        for i in range(m):
            v = step_velocity(velocities[t - 1, i], mob[i], noise[t, i])
            p, v = step_position(positions[t - 1, i], v, cfg.sim.tau, mob[i].area)
            positions[t, i] = p
            velocities[t, i] = v
    return Scenario(cfg, seed, params, positions, velocities, data_bits, intensities)


def _devices(scn: Scenario, t: int) -> list:
    dl = scn.cfg.tasks.deadline
    return [
        UdState(id=i, position=scn.positions[t, i], velocity=scn.velocities[t, i],
                params=scn.ud_params[i],
                task=Task(float(scn.data_bits[t, i]), float(scn.intensities[t, i]), dl))
        for i in range(scn.cfg.sim.num_uds)
    ]


def run_slot(scn: Scenario, scheme: str, t: int, uav_pos: np.ndarray,
             queues: EnergyQueues) -> tuple[SlotRecord, np.ndarray, EnergyQueues]:
    """Advance one slot; returns the record, next UAV position, new queues.

    Scheme semantics: OJOA runs the offloading game with proportional
    resource shares and plans the next position; ERA swaps in equal shares
    everywhere; OCQ makes both decisions with zeroed backlog weights while
    the true backlogs keep evolving; FLP keeps the UAV parked (at the area
    center) and skips planning; ELC keeps every task local and the UAV
    hovering at its start point.
    """
    cfg = scn.cfg
    uds = _devices(scn, t)
    decide = queues
    if scheme == "OCQ":
        decide = EnergyQueues(queues.budget_compute, queues.budget_propulsion,
                              queues.v_param, 0.0, 0.0)

    if scheme == "ELC":
        profile = np.zeros(cfg.sim.num_uds, dtype=np.int8)
        alloc = Allocation({}, {})
        ctx = None
    else:
        if scheme == "ERA":
            policy = "equal"
        elif scheme == "FLP":
            policy = cfg.bench.flp_allocation
        else:
            policy = "optimal"
        ctx = game.make_context(uds, uav_pos, decide, cfg.channel, cfg.uav, policy=policy)
        res = game.solve_stage1(ctx, max_sweeps=cfg.stage1.max_sweeps_factor * max(cfg.sim.num_uds, 1))
        profile, alloc = res.profile, res.allocation

    members = [i for i in range(cfg.sim.num_uds) if profile[i] == 1]
    ud_costs = []
    e_compute = 0.0
    workload = 0.0
    for i, ud in enumerate(uds):
        if profile[i] == 1:
            w_share = alloc.bandwidth_fraction[i]
            f_alloc = alloc.compute_fraction[i] * cfg.uav.f_max
            rate = uplink_rate(w_share, ud.position, uav_pos,
                               ud.params.tx_power, cfg.channel, cfg.uav.height)
            ud_costs.append(ud_cost(1, ud.task, ud.params, rate=float(rate), f_alloc=f_alloc))
            e_compute += cfg.uav.varpi * ud.task.cycles
            workload += ud.task.cycles
        else:
            ud_costs.append(ud_cost(0, ud.task, ud.params))
    cost = float(sum(ud_costs))

    holds = scheme == "ELC" or scheme == "FLP" or (
        scheme == "ERA" and cfg.bench.era_trajectory == "hold")
    if holds or not members:
        next_pos = uav_pos.copy()
    else:
        prob = trajectory.TrajectoryProblem(
            current_position=(float(uav_pos[0]), float(uav_pos[1])),
            ud_positions=np.array([uds[i].position for i in members]),
            cost_weights=np.array([
                (uds[i].params.gamma + (1.0 - uds[i].params.gamma) * uds[i].params.tx_power)
                * uds[i].task.data_bits for i in members]),
            bandwidth_shares=np.array([alloc.bandwidth_fraction[i] for i in members]),
            snr_scales=np.array([
                float(snr_scale(uds[i].position, uav_pos, uds[i].params.tx_power,
                                cfg.channel, cfg.uav.height)) for i in members]),
            q_propulsion=decide.q_propulsion,
            v_param=cfg.queues.v_param,
            uav=cfg.uav, mu=cfg.channel.mu,
            bandwidth=cfg.channel.bandwidth, tau=cfg.sim.tau)
        result = trajectory.solve_stage2(prob, epsilon=cfg.stage2.epsilon,
                                         max_iters=cfg.stage2.max_iters)
        next_pos = result.position

    speed = float(np.hypot(*(next_pos - uav_pos))) / cfg.sim.tau
    e_prop = cfg.sim.tau * float(propulsion_power(speed, cfg.uav))
    if scheme == "ELC" and not cfg.bench.elc_hover_energy:
        e_prop = 0.0
    rec = SlotRecord(t=t, ud_costs=tuple(ud_costs), cost=cost,
                     e_compute=e_compute, e_propulsion=e_prop,
                     workload=workload, q_compute=queues.q_compute,
                     q_propulsion=queues.q_propulsion, offload_count=len(members),
                     uav_x=float(uav_pos[0]), uav_y=float(uav_pos[1]))
    return rec, next_pos, update_queues(queues, e_compute, e_prop)


def run_episode(scn: Scenario, scheme: str) -> tuple[list, Metrics]:
    """Run every slot of one scenario under one scheme."""
    if scheme not in SCHEME_NAMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    cfg = scn.cfg
    if scheme == "FLP":
        uav_pos = np.asarray(cfg.area_center, dtype=float)
    else:
        uav_pos = np.asarray(cfg.uav.initial_position, dtype=float)
    queues = EnergyQueues(cfg.queues.budget_compute, cfg.queues.budget_propulsion,
                          cfg.queues.v_param)
    records = []
    for t in range(cfg.sim.num_slots):
        rec, uav_pos, queues = run_slot(scn, scheme, t, uav_pos, queues)
        records.append(rec)
    cost_series = tuple(r.cost for r in records)
    energy_series = tuple(r.e_compute + r.e_propulsion for r in records)
    workload_series = tuple(r.workload for r in records)
    metrics = Metrics(
        scheme=scheme, seed=scn.seed,
        avg_cost=float(np.mean(cost_series)),
        avg_energy=float(np.mean(energy_series)),
        avg_e_compute=float(np.mean([r.e_compute for r in records])),
        avg_e_propulsion=float(np.mean([r.e_propulsion for r in records])),
        avg_workload=float(np.mean(workload_series)),
        terminal_q_compute=queues.q_compute,
        terminal_q_propulsion=queues.q_propulsion,
        cost_series=cost_series,
        energy_series=energy_series,
        workload_series=workload_series)
    return records, metrics

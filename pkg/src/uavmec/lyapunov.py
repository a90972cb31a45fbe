"""Virtual energy queues and the drift-plus-penalty slot objective.

Two queues track how far the UAV has cumulatively overrun its per-slot energy
budgets, one for server compute and one for propulsion. Keeping them stable
enforces the long-run average budget; weighting their backlogs against the
instantaneous device cost (trade-off weight V) turns the long-horizon problem
into one solvable per slot with only current information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import propulsion_power
from .scenario import ScenarioConfig

__all__ = [
    "EnergyQueues",
    "update_queues",
    "lyapunov_value",
    "drift_plus_penalty_objective",
    "drift_bound_constant",
    "max_propulsion_power",
]


@dataclass(frozen=True)
class EnergyQueues:
    """Backlogs (J) plus the per-slot budgets and trade-off weight they obey.

    Queues start at zero; budget_compute + budget_propulsion is the UAV's
    total per-slot energy allowance.
    """

    budget_compute: float
    budget_propulsion: float
    v_param: float
    q_compute: float = 0.0
    q_propulsion: float = 0.0

    def validate(self) -> None:
        if self.q_compute < 0.0 or self.q_propulsion < 0.0:
            raise ValueError("queue backlogs must be non-negative")
        if self.v_param <= 0.0:
            raise ValueError("v_param must be positive")


def update_queues(q: EnergyQueues, e_compute: float, e_propulsion: float) -> EnergyQueues:
    """One slot's queue recursion: each backlog becomes max(Q + E - budget, 0)."""
    return replace(
        q,
        q_compute=max(q.q_compute + e_compute - q.budget_compute, 0.0),
        q_propulsion=max(q.q_propulsion + e_propulsion - q.budget_propulsion, 0.0),
    )


def lyapunov_value(q: EnergyQueues) -> float:
    """Scalar congestion measure of the two backlogs: (Qc^2 + Qp^2) / 2."""
    return 0.5 * (q.q_compute * q.q_compute + q.q_propulsion * q.q_propulsion)


def drift_plus_penalty_objective(q: EnergyQueues, e_compute: float,
                                 e_propulsion: float, total_ud_cost: float) -> float:
    """Per-slot decision objective: Qc*Ec + Qp*Ep + V * system cost."""
    return (q.q_compute * e_compute
            + q.q_propulsion * e_propulsion
            + q.v_param * total_ud_cost)


def max_propulsion_power(uav, v_max: float) -> float:
    """Numeric maximum of the propulsion curve over speeds [0, v_max].

    Coarse vectorized grid followed by a local ternary refinement around the
    best grid point; the curve is smooth, so this pins the maximum to well
    below any tolerance used downstream.
    """
    n = max(int(math.ceil(v_max * 1000)) + 1, 2)   # ~1e-3 m/s pitch
    grid = np.linspace(0.0, v_max, n)
    powers = propulsion_power(grid, uav)
    k = int(np.argmax(powers))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, n - 1)]
    # ternary search on the bracketing interval
    for _ in range(200):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if propulsion_power(m1, uav) < propulsion_power(m2, uav):
            lo = m1
        else:
            hi = m2
        if hi - lo < 1e-12:
            break
    return float(max(powers[k], propulsion_power(0.5 * (lo + hi), uav)))


def drift_bound_constant(cfg: ScenarioConfig) -> float:
    """Constant W bounding the one-slot Lyapunov drift plus queue cross-terms.

    W = 1/2 max(budget_c, Emax_c - budget_c)^2 + 1/2 max(budget_p, Emax_p - budget_p)^2
    where Emax_c is the worst-case per-slot compute energy (every device
    offloading a maximal task) and Emax_p the worst-case propulsion energy
    (slot length times the power-curve maximum over feasible speeds).
    """
    e_max_c = cfg.uav.varpi * cfg.sim.num_uds * cfg.tasks.intensity_max * cfg.tasks.data_max
    e_max_p = cfg.sim.tau * max_propulsion_power(cfg.uav, cfg.uav.v_max)
    b_c = cfg.queues.budget_compute
    b_p = cfg.queues.budget_propulsion
    term_c = max(b_c * b_c, (e_max_c - b_c) ** 2)
    term_p = max(b_p * b_p, (e_max_p - b_p) ** 2)
    return 0.5 * term_c + 0.5 * term_p

"""Server compute and uplink bandwidth splits for the offloading set.

The per-slot resource subproblem (fractions s_m of server cycles, w_m of
bandwidth, each summing to at most one over the offloaders) is convex and
separable, and its optimum has a closed form: fractions proportional to the
square roots of each offloader's weighted demand. The equal split used by the
ERA benchmark lives here too, as does the subproblem objective itself, which
tests use as the optimality yardstick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "OffloadEntry",
    "Allocation",
    "compute_weights",
    "optimal_allocation",
    "era_allocation",
    "p11_objective",
]


@dataclass(frozen=True)
class OffloadEntry:
    """Everything the slot's resource and game logic needs about one device.

    spectral_eff is evaluated at the current UAV position and frozen for the
    slot (the offload decision precedes the trajectory update).
    """

    id: int
    gamma: float
    data_bits: float
    intensity: float
    tx_power: float
    spectral_eff: float


@dataclass(frozen=True)
class Allocation:
    """Fractions granted to each offloader, keyed by device id.

    compute_fraction are shares of the server's f_max, bandwidth_fraction
    shares of the uplink band; each family is non-negative and sums to at
    most 1 (exactly 1 at an optimum over a non-empty set).
    """

    compute_fraction: dict[int, float]
    bandwidth_fraction: dict[int, float]

    def validate(self) -> None:
        for fam in (self.compute_fraction, self.bandwidth_fraction):
            if any(v < 0.0 for v in fam.values()):
                raise ValueError("fractions must be non-negative")
            if sum(fam.values()) > 1.0 + 1e-12:
                raise ValueError("fractions must sum to at most 1")


def compute_weights(entry: OffloadEntry, f_max: float, bandwidth: float) -> tuple[float, float]:
    """Square-root demand weights (beta, phi) of one offloader.

    beta = sqrt(gamma * cycles / f_max) prices server time; phi =
    sqrt((gamma + (1-gamma)*tx_power) * data / (B * r)) prices air time,
    folding both the delay and the radio-energy share of the upload. The
    optimal fractions are these weights normalized over the offloading set.
    """
    cycles = entry.data_bits * entry.intensity
    beta = math.sqrt(entry.gamma * cycles / f_max)
    comm_cost = (entry.gamma + (1.0 - entry.gamma) * entry.tx_power) * entry.data_bits
    phi = math.sqrt(comm_cost / (bandwidth * entry.spectral_eff))
    return beta, phi


def optimal_allocation(entries, f_max: float, bandwidth: float) -> Allocation:
    """Cost-minimizing fractions for a non-empty offloading set.

    s_m = beta_m / sum(beta), w_m = phi_m / sum(phi). Degenerate zero weights
    (gamma at 0 or 1) yield zero fractions for the affected family member;
    the caller treats a zero-resourced offloader as infeasible.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("offloader set must be non-empty")
    betas, phis = zip(*(compute_weights(e, f_max, bandwidth) for e in entries))
    sum_beta = sum(betas)
    sum_phi = sum(phis)
    compute = {e.id: (b / sum_beta if sum_beta > 0.0 else 0.0)
               for e, b in zip(entries, betas)}
    band = {e.id: (p / sum_phi if sum_phi > 0.0 else 0.0)
            for e, p in zip(entries, phis)}
    return Allocation(compute, band)


def era_allocation(entries) -> Allocation:
    """Equal split benchmark: every offloader gets 1/|set| of both resources."""
    ids = [e.id for e in entries]
    if not ids:
        raise ValueError("offloader set must be non-empty")
    share = 1.0 / len(ids)
    return Allocation({i: share for i in ids}, {i: share for i in ids})


def p11_objective(entries, alloc: Allocation, f_max: float, bandwidth: float) -> float:
    """Total weighted edge cost of the offloading set under an allocation.

    Sum over offloaders of gamma * (upload delay + execution delay) plus
    (1-gamma) * radio energy. Strictly convex in the positive fractions;
    any zero fraction for a listed offloader is rejected.
    """
    total = 0.0
    for e in entries:
        s = alloc.compute_fraction.get(e.id, 0.0)
        w = alloc.bandwidth_fraction.get(e.id, 0.0)
        if s <= 0.0 or w <= 0.0:
            raise ValueError(f"offloader {e.id} holds a zero fraction")
        rate = w * bandwidth * e.spectral_eff
        t_edge = e.data_bits / rate + e.data_bits * e.intensity / (s * f_max)
        e_tx = e.tx_power * e.data_bits / rate
        total += e.gamma * t_edge + (1.0 - e.gamma) * e_tx
    return total

"""Physical quantities for a single-UAV edge computing cell.

Pure formula layer: air-to-ground channel quality, task execution delay and
energy on both sides of the offload decision, rotary-wing propulsion power.
No state lives here, so every function is safe to call from any number of
workers, and identical inputs give bit-identical outputs.

Units are SI throughout (bits, cycles, seconds, joules, watts, meters).
Positions are horizontal 2-vectors; the UAV flies at a fixed altitude.
Most functions broadcast over numpy arrays in their leading arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "UavParams",
    "UdParams",
    "Task",
    "UdState",
    "UavState",
    "los_probability",
    "effective_los_factor",
    "snr_scale",
    "spectral_efficiency",
    "uplink_rate",
    "local_delay",
    "local_energy",
    "edge_delay",
    "transmit_energy",
    "uav_compute_energy",
    "propulsion_power",
    "ud_cost",
    "uav_slot_energy",
]


@dataclass(frozen=True)
class ChannelParams:
    """Air-to-ground channel constants.

    xi1 and xi2 shape the logistic line-of-sight probability in the elevation
    angle (degrees). kappa is the extra attenuation applied to the non-LoS
    share, beta0 the reference gain at 1 m, mu half the path-loss exponent
    (mu=1 means free-space squared-distance loss), noise_power the receiver
    noise floor in W and bandwidth the shared uplink bandwidth in Hz.
    """

    xi1: float = 11.95
    xi2: float = 0.14
    kappa: float = 0.2
    beta0: float = 1e-5
    mu: float = 1.0
    noise_power: float = 1e-13
    bandwidth: float = 4e6

    def validate(self) -> None:
        if self.xi1 <= 0 or self.xi2 <= 0:
            raise ValueError("LoS shape constants xi1, xi2 must be positive")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")
        if self.beta0 <= 0 or self.mu <= 0:
            raise ValueError("beta0 and mu must be positive")
        if self.noise_power <= 0 or self.bandwidth <= 0:
            raise ValueError("noise_power and bandwidth must be positive")


@dataclass(frozen=True)
class UavParams:
    """UAV platform constants: altitude, kinematics, compute and rotor model.

    c1..c4 and u_tip parameterize the propulsion power curve (blade profile,
    induced and parasite terms); varpi is the server energy per CPU cycle.
    """

    height: float = 100.0
    v_max: float = 30.0
    f_max: float = 2e10
    initial_position: tuple[float, float] = (200.0, 200.0)
    c1: float = 79.86
    c2: float = 21.99
    c3: float = 263.8
    c4: float = 0.009243
    u_tip: float = 120.0
    varpi: float = 1e-9

    def validate(self) -> None:
        if self.height <= 0:
            raise ValueError("height must be positive")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.f_max <= 0:
            raise ValueError("f_max must be positive")
        if min(self.c1, self.c2, self.c3, self.c4, self.u_tip) <= 0:
            raise ValueError("propulsion constants must be positive")
        if self.varpi <= 0:
            raise ValueError("varpi must be positive")


@dataclass(frozen=True)
class UdParams:
    """Per-device constants: CPU speed, radio power, cost weight, chip kappa."""

    f_local: float = 1e9
    tx_power: float = 0.1
    gamma: float = 0.5          # delay weight; 1-gamma weighs device energy
    kappa_eff: float = 1e-27

    def validate(self) -> None:
        if self.f_local <= 0 or self.tx_power <= 0 or self.kappa_eff <= 0:
            raise ValueError("f_local, tx_power, kappa_eff must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


@dataclass(frozen=True)
class Task:
    """One slot's job on one device: size in bits, cycles per bit, deadline."""

    data_bits: float
    intensity: float
    deadline: float

    def validate(self) -> None:
        if self.data_bits <= 0 or self.intensity <= 0 or self.deadline <= 0:
            raise ValueError("task fields must be positive")

    @property
    def cycles(self) -> float:
        return self.data_bits * self.intensity


@dataclass
class UdState:
    """A device at one slot: where it is, how it moves, what it must compute."""

    id: int
    position: np.ndarray
    velocity: np.ndarray
    params: UdParams
    task: Task


@dataclass
class UavState:
    position: np.ndarray
    params: UavParams


def _horizontal_distance(ud_pos, uav_pos):
    d = np.asarray(ud_pos, dtype=float) - np.asarray(uav_pos, dtype=float)
    return np.hypot(d[..., 0], d[..., 1])


def los_probability(ud_pos, uav_pos, ch: ChannelParams, height: float):
    """Line-of-sight probability, logistic in the elevation angle (degrees).

    The elevation angle is measured from the device toward the UAV at the
    given altitude; a device directly below sees 90 degrees. Strictly
    increasing in the angle, so strictly decreasing in horizontal distance.
    """
    dh = _horizontal_distance(ud_pos, uav_pos)
    link = np.hypot(dh, height)
    theta = np.degrees(np.arcsin(height / link))
    return 1.0 / (1.0 + ch.xi1 * np.exp(-ch.xi2 * (theta - ch.xi1)))


def effective_los_factor(p_los, kappa):
    """Blend of LoS and attenuated non-LoS propagation: p + (1-p)*kappa."""
    return p_los + (1.0 - p_los) * kappa


def snr_scale(ud_pos, uav_pos, tx_power, ch: ChannelParams, height: float):
    """Distance-free SNR numerator: tx_power * beta0 * LoS blend / noise.

    Dividing by (d_h^2 + H^2)^mu yields the received SNR.
    """
    p_los = los_probability(ud_pos, uav_pos, ch, height)
    return tx_power * ch.beta0 * effective_los_factor(p_los, ch.kappa) / ch.noise_power


def spectral_efficiency(ud_pos, uav_pos, tx_power, ch: ChannelParams, height: float):
    """Uplink spectral efficiency in bits/s/Hz at the current geometry.

    log2(1 + snr_scale / (d_h^2 + H^2)^mu); non-increasing in horizontal
    distance, always positive.
    """
    phi = snr_scale(ud_pos, uav_pos, tx_power, ch, height)
    dh = _horizontal_distance(ud_pos, uav_pos)
    return np.log2(1.0 + phi / (dh * dh + height * height) ** ch.mu)


def uplink_rate(w, ud_pos, uav_pos, tx_power, ch: ChannelParams, height: float):
    """OFDMA uplink rate in bits/s for a bandwidth fraction w in [0, 1]."""
    return w * ch.bandwidth * spectral_efficiency(ud_pos, uav_pos, tx_power, ch, height)


def local_delay(task: Task, ud: UdParams) -> float:
    """Seconds to finish the task on the device CPU."""
    return task.cycles / ud.f_local


def local_energy(task: Task, ud: UdParams) -> float:
    """Joules burned by the device CPU: kappa_eff * f^2 * cycles."""
    return ud.kappa_eff * ud.f_local * ud.f_local * task.cycles


def edge_delay(task: Task, rate: float, f_alloc: float) -> float:
    """Upload plus remote execution time for an offloaded task.

    rate is the granted uplink rate in bits/s, f_alloc the granted server
    cycles/s. Zero grants are rejected rather than returned as infinities:
    an offloader with no resources is a scheduling bug upstream.
    """
    if rate <= 0.0 or f_alloc <= 0.0:
        raise ValueError("offloaded task needs positive rate and f_alloc")
    return task.data_bits / rate + task.cycles / f_alloc


def transmit_energy(task: Task, tx_power: float, rate: float) -> float:
    """Radio energy spent uploading the task at the granted rate."""
    if rate <= 0.0:
        raise ValueError("offloaded task needs a positive rate")
    return tx_power * task.data_bits / rate


def uav_compute_energy(task: Task, varpi: float) -> float:
    """Server-side energy to execute one task: varpi joules per cycle."""
    return varpi * task.cycles


def propulsion_power(speed, p: UavParams):
    """Rotary-wing propulsion power in W at a given horizontal speed.

    Blade profile term grows quadratically, the parasite term cubically, and
    the induced term falls with speed, which gives the familiar power bucket
    with a maximum-endurance dip between hover and top speed. The induced
    radicand sqrt(c3 + v^4/4) - v^2/2 is evaluated in the algebraically
    equivalent form c3 / (sqrt(c3 + v^4/4) + v^2/2), which cannot cancel
    catastrophically at high speed.
    """
    v2 = np.square(np.asarray(speed, dtype=float))
    blade = p.c1 * (1.0 + 3.0 * v2 / (p.u_tip * p.u_tip))
    radicand = p.c3 / (np.sqrt(p.c3 + 0.25 * v2 * v2) + 0.5 * v2)
    induced = p.c2 * np.sqrt(radicand)
    parasite = p.c4 * v2 * np.sqrt(v2)
    return blade + induced + parasite


def ud_cost(a: int, task: Task, ud: UdParams, rate: float | None = None,
            f_alloc: float | None = None) -> float:
    """Weighted delay/energy cost of one device's task under decision a.

    a=0 computes locally; a=1 offloads, in which case the granted rate and
    f_alloc must be supplied. Server-side compute energy is charged to the
    UAV's budget, never to the device cost.
    """
    if a == 0:
        return ud.gamma * local_delay(task, ud) + (1.0 - ud.gamma) * local_energy(task, ud)
    if rate is None or f_alloc is None:
        raise ValueError("offloaded cost needs rate and f_alloc")
    t_ec = edge_delay(task, rate, f_alloc)
    e_ec = transmit_energy(task, ud.tx_power, rate)
    return ud.gamma * t_ec + (1.0 - ud.gamma) * e_ec


def uav_slot_energy(offloaded_tasks, speed: float, tau: float,
                    p: UavParams) -> tuple[float, float]:
    """UAV energy spent in one slot, split into (compute J, propulsion J).

    offloaded_tasks is the iterable of tasks actually executed on the UAV;
    the propulsion part is the power curve at the slot's flight speed times
    the slot length.
    """
    compute = float(sum(uav_compute_energy(t, p.varpi) for t in offloaded_tasks))
    return compute, float(propulsion_power(speed, p)) * tau

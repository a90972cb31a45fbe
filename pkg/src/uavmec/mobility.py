"""Gauss-Markov device mobility over a rectangular service area.

The velocity process is a stationary AR(1) around a per-device mean velocity;
positions integrate the velocity once per slot and reflect off the area walls.
Randomness is owned by the caller: these are pure transition functions fed
with pre-drawn noise, so one seeded generator per episode gives reproducible
trajectories and parallel episodes never share streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MobilityParams", "step_velocity", "step_position"]


@dataclass(frozen=True)
class MobilityParams:
    """Memory level alpha, mean velocity, asymptotic std, and the area box."""

    alpha: float = 0.8
    mean_velocity: tuple[float, float] = (0.0, 0.0)
    sigma: float = 0.5
    area: tuple[float, float] = (400.0, 400.0)

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if self.area[0] <= 0.0 or self.area[1] <= 0.0:
            raise ValueError("area sides must be positive")


def step_velocity(v, p: MobilityParams, noise):
    """One AR(1) velocity update: alpha*v + (1-alpha)*vbar + sqrt(1-alpha^2)*noise.

    noise must be drawn N(0, sigma^2) per component by the caller; the
    sqrt(1-alpha^2) weight makes sigma the stationary per-component std.
    """
    v = np.asarray(v, dtype=float)
    vbar = np.asarray(p.mean_velocity, dtype=float)
    w = math.sqrt(max(0.0, 1.0 - p.alpha * p.alpha))
    return p.alpha * v + (1.0 - p.alpha) * vbar + w * np.asarray(noise, dtype=float)


def step_position(pos, v, tau: float, area) -> tuple[np.ndarray, np.ndarray]:
    """Advance pos by v*tau, reflecting at the area walls.

    A component that would land outside [0, L] is mirrored back inside and
    its velocity component negated, so the device bounces rather than sticks.
    Returns (new position, possibly sign-flipped velocity); the position is
    always inside the area.
    """
    new = np.asarray(pos, dtype=float) + np.asarray(v, dtype=float) * tau
    vel = np.array(v, dtype=float)
    out = [float(new[0]), float(new[1])]
    for k in (0, 1):
        length = float(area[k])
        c = out[k]
        # fold into [0, 2L] then mirror; loop covers multi-bounce overshoots
        while c < 0.0 or c > length:
            if c < 0.0:
                c = -c
            else:
                c = 2.0 * length - c
            vel[k] = -vel[k]
        out[k] = c
    return np.array(out), vel

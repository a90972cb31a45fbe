"""Next-position planning for the UAV by successive convex approximation.

Given the slot's offloading set and granted bandwidth shares, the planner
trades propulsion energy (weighted by the propulsion queue backlog) against
the offloaders' communication cost at the candidate position. The exact
objective is nonconvex through the induced-power term and the rate term, so
each iteration solves a convex surrogate built from two tangent minorants:
one for the slack that stands in for the induced-power radical, one per
offloader for the spectral efficiency. Both constraints are provably tight
at a surrogate optimum, which lets the solver substitute them out and descend
over the 2-D candidate alone; the loop re-anchors and repeats until the
surrogate value stops moving.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .model import UavParams, propulsion_power

__all__ = [
    "TrajectoryProblem",
    "ScaIterate",
    "SubproblemSolution",
    "Stage2Result",
    "p2_objective",
    "y_anchor",
    "f_lower",
    "g_lower",
    "solve_subproblem",
    "start_anchor",
    "solve_stage2",
]

log = logging.getLogger(__name__)

_LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class TrajectoryProblem:
    """One slot's planning inputs.

    Per offloader: horizontal position, cost weight c = (gamma + (1-gamma) *
    tx_power) * data_bits, granted bandwidth share, and the SNR numerator
    frozen at the current position (the offload decision already happened
    there). q_propulsion weighs propulsion energy, v_param the communication
    cost.
    """

    current_position: tuple[float, float]
    ud_positions: np.ndarray        # (K, 2)
    cost_weights: np.ndarray        # (K,)
    bandwidth_shares: np.ndarray    # (K,)
    snr_scales: np.ndarray          # (K,)
    q_propulsion: float
    v_param: float
    uav: UavParams
    mu: float
    bandwidth: float
    tau: float

    def __post_init__(self):
        if self.k:
            shares = np.asarray(self.bandwidth_shares, dtype=float)
            if np.any(shares <= 0.0):
                raise ValueError("bandwidth shares must be positive")
            if abs(float(shares.sum()) - 1.0) > 1e-6:
                raise ValueError("bandwidth shares must sum to 1")

    @property
    def k(self) -> int:
        return len(self.cost_weights)

    @property
    def radius(self) -> float:
        return self.uav.v_max * self.tau


@dataclass
class ScaIterate:
    """Anchor state of one surrogate build: local point and its slack value."""

    local_point: np.ndarray
    y_local: float
    objective_value: float
    iteration: int


@dataclass
class SubproblemSolution:
    position: np.ndarray
    y: float
    z: np.ndarray
    objective: float


@dataclass
class Stage2Result:
    position: np.ndarray
    converged: bool
    iterations: int
    objective: float            # last surrogate value
    exact_objective: float
    trace: list = field(default_factory=list)


def _rates_denominator(candidate, prob: TrajectoryProblem):
    """Spectral efficiency of every offloader at candidate; broadcasts."""
    cand = np.asarray(candidate, dtype=float)
    diff = cand[..., None, :] - prob.ud_positions
    d2 = np.sum(diff * diff, axis=-1)
    h2 = prob.uav.height * prob.uav.height
    return np.log2(1.0 + prob.snr_scales / (d2 + h2) ** prob.mu)


def p2_objective(candidate, prob: TrajectoryProblem):
    """Exact planning objective at a candidate next position.

    q_propulsion * tau * propulsion_power(speed) plus v_param times the sum
    of c_m / (w_m * B * spectral efficiency at candidate). Candidates outside
    the speed ball are rejected. Broadcasts over a leading candidate axis,
    which is what the grid oracles rely on.
    """
    cand = np.asarray(candidate, dtype=float)
    disp = cand - np.asarray(prob.current_position)
    dist = np.hypot(disp[..., 0], disp[..., 1])
    if np.any(dist > prob.radius * (1.0 + 1e-9) + 1e-9):
        raise ValueError("candidate violates the speed ball")
    speed = dist / prob.tau
    prop = prob.q_propulsion * prob.tau * propulsion_power(speed, prob.uav)
    if prob.k == 0:
        return prop + 0.0 * dist
    g = _rates_denominator(cand, prob)
    comm = np.sum(prob.cost_weights / (prob.bandwidth_shares * prob.bandwidth * g), axis=-1)
    return prop + prob.v_param * comm


def y_anchor(local_point, current_position, tau: float, c3: float) -> float:
    """Slack value matching the induced-power radical at the anchor speed.

    sqrt(sqrt(c3 + v^4/4) - v^2/2) evaluated through the cancellation-free
    identity c3 / (sqrt(c3 + v^4/4) + v^2/2); equals c3^(1/4) at rest.
    """
    d = np.asarray(local_point, dtype=float) - np.asarray(current_position, dtype=float)
    v2 = float(d[0] * d[0] + d[1] * d[1]) / (tau * tau)
    return math.sqrt(c3 / (math.sqrt(c3 + 0.25 * v2 * v2) + 0.5 * v2))


def f_lower(candidate, y, iterate: ScaIterate, current_position, tau: float):
    """Tangent minorant of y^2 + speed^2 at the anchor (y_local, local_point).

    Linear in y and in the candidate: (y^l)^2 + 2 y^l (y - y^l) +
    (2 d_l . d - ||d_l||^2) / tau^2, with d_l the anchor displacement and d
    the candidate displacement from the current position. Equals y^2 + v^2
    exactly at the anchor and never exceeds it elsewhere.
    """
    cand = np.asarray(candidate, dtype=float)
    cur = np.asarray(current_position, dtype=float)
    dl = np.asarray(iterate.local_point, dtype=float) - cur
    d = cand - cur
    yl = iterate.y_local
    lin = (2.0 * (d[..., 0] * dl[0] + d[..., 1] * dl[1]) - float(dl @ dl)) / (tau * tau)
    return yl * yl + 2.0 * yl * (np.asarray(y, dtype=float) - yl) + lin


def g_lower(candidate, m: int, iterate: ScaIterate, prob: TrajectoryProblem):
    """Tangent minorant of offloader m's spectral efficiency at the anchor.

    The efficiency is convex in the squared horizontal distance, so the
    tangent in that variable minorizes it globally and is concave in the
    candidate: g(anchor) - slope * (||c - p_m||^2 - ||anchor - p_m||^2).
    """
    p_m = prob.ud_positions[m]
    phi = float(prob.snr_scales[m])
    h2 = prob.uav.height * prob.uav.height
    dl = np.asarray(iterate.local_point, dtype=float) - p_m
    u_l = float(dl @ dl) + h2
    g_l = math.log2(1.0 + phi / u_l ** prob.mu)
    slope = prob.mu * phi * _LOG2E / (u_l * (u_l ** prob.mu + phi))
    cand = np.asarray(candidate, dtype=float)
    diff = cand - p_m
    d2 = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1]
    return g_l - slope * (d2 - (u_l - h2))


def _y_root(b: float, y_l: float, c3: float) -> float:
    """Unique positive root of 2*y_l*y^3 + b*y^2 - c3 = 0.

    This is the smallest slack the minorant constraint c3/y^2 <= f_lower
    admits once the candidate is fixed (b folds the candidate-dependent
    linear part minus y_l^2). The cubic is convex right of the root, so
    Newton from an upper bracket converges monotonically.
    """
    lo = max(0.0, -b / (2.0 * y_l))
    y = max(y_l, lo + 1e-9)
    h = 2.0 * y_l * y ** 3 + b * y * y - c3
    guard = 0
    while h < 0.0:
        y *= 2.0
        h = 2.0 * y_l * y ** 3 + b * y * y - c3
        guard += 1
        if guard > 400:     # unreachable for finite inputs
            raise ArithmeticError("no bracket for the slack root")
    for _ in range(100):
        hp = y * (6.0 * y_l * y + 2.0 * b)
        step = h / hp
        y -= step
        if y <= lo:         # safeguard, keeps the iterate right of the pole
            y = 0.5 * (y + step + lo)
        h = 2.0 * y_l * y ** 3 + b * y * y - c3
        if abs(step) <= 1e-15 * y and abs(h) <= 1e-10 * (c3 + 1.0):
            break
    return y


class _Surrogate:
    """Reduced convex surrogate over the 2-D candidate, with gradients.

    The slack constraints are tight at any optimum, so y is replaced by its
    cubic root and each z_m by its tangent bound, leaving a convex function
    of the candidate alone (outside the region where some bound goes
    non-positive, the value is +inf and the line search backs off).
    """

    def __init__(self, iterate: ScaIterate, prob: TrajectoryProblem):
        self.prob = prob
        self.ux, self.uy = prob.current_position
        lp = np.asarray(iterate.local_point, dtype=float)
        self.alx = float(lp[0]) - self.ux
        self.aly = float(lp[1]) - self.uy
        self.al2 = self.alx * self.alx + self.aly * self.aly
        self.y_l = iterate.y_local
        u = prob.uav
        self.c1, self.c2, self.c3, self.c4 = u.c1, u.c2, u.c3, u.c4
        self.utip2 = u.u_tip * u.u_tip
        self.tau = prob.tau
        self.tau2 = prob.tau * prob.tau
        self.qp_tau = prob.q_propulsion * prob.tau
        h2 = u.height * u.height
        self.terms = []
        for m in range(prob.k):
            pmx, pmy = float(prob.ud_positions[m, 0]), float(prob.ud_positions[m, 1])
            phi = float(prob.snr_scales[m])
            dlx, dly = float(lp[0]) - pmx, float(lp[1]) - pmy
            dl2 = dlx * dlx + dly * dly
            u_l = dl2 + h2
            g_l = math.log2(1.0 + phi / u_l ** prob.mu)
            slope = prob.mu * phi * _LOG2E / (u_l * (u_l ** prob.mu + phi))
            amp = prob.v_param * float(prob.cost_weights[m]) / (
                float(prob.bandwidth_shares[m]) * prob.bandwidth)
            self.terms.append((pmx, pmy, amp, g_l + slope * dl2, slope))

    def value_parts(self, px: float, py: float):
        """(objective, y, z list) at a candidate; objective inf if any z <= 0."""
        z = []
        comm = 0.0
        for pmx, pmy, amp, zc, slope in self.terms:
            ddx, ddy = px - pmx, py - pmy
            zm = zc - slope * (ddx * ddx + ddy * ddy)
            if zm <= 0.0:
                return math.inf, 0.0, None
            z.append(zm)
            comm += amp / zm
        dx, dy = px - self.ux, py - self.uy
        sq = dx * dx + dy * dy
        y = 0.0
        prop = 0.0
        if self.qp_tau > 0.0:
            b = (2.0 * (self.alx * dx + self.aly * dy) - self.al2) / self.tau2 - self.y_l * self.y_l
            y = _y_root(b, self.y_l, self.c3)
            prop = self.qp_tau * (
                self.c1 * (1.0 + 3.0 * sq / (self.tau2 * self.utip2))
                + self.c2 * y
                + self.c4 * sq * math.sqrt(sq) / (self.tau2 * self.tau))
        return prop + comm, y, z

    def value(self, px: float, py: float) -> float:
        return self.value_parts(px, py)[0]

    def gradient(self, px: float, py: float):
        gx = gy = 0.0
        for pmx, pmy, amp, zc, slope in self.terms:
            ddx, ddy = px - pmx, py - pmy
            zm = zc - slope * (ddx * ddx + ddy * ddy)
            w = 2.0 * amp * slope / (zm * zm)
            gx += w * ddx
            gy += w * ddy
        if self.qp_tau > 0.0:
            dx, dy = px - self.ux, py - self.uy
            sq = dx * dx + dy * dy
            b = (2.0 * (self.alx * dx + self.aly * dy) - self.al2) / self.tau2 - self.y_l * self.y_l
            y = _y_root(b, self.y_l, self.c3)
            hp = y * (6.0 * self.y_l * y + 2.0 * b)
            # implicit differentiation of the cubic: dy/db = -y^2 / h'(y)
            dy_db = -y * y / hp
            cb = self.qp_tau * self.c2 * dy_db * 2.0 / self.tau2
            cblade = self.qp_tau * self.c1 * 6.0 / (self.tau2 * self.utip2)
            cpara = self.qp_tau * self.c4 * 3.0 * math.sqrt(sq) / (self.tau2 * self.tau)
            gx += cblade * dx + cpara * dx + cb * self.alx
            gy += cblade * dy + cpara * dy + cb * self.aly
        return gx, gy


def solve_subproblem(iterate: ScaIterate, prob: TrajectoryProblem,
                     max_iters: int = 500) -> SubproblemSolution:
    """Minimize the anchored convex surrogate over the speed ball.

    Projected gradient descent started at the anchor, Barzilai-Borwein step
    seeding with monotone Armijo backtracking, best-point tracking. Returns
    the position together with the tight slack values there, so the
    constraints hold with equality by construction.
    """
    if prob.k == 0:
        raise ValueError("subproblem needs a non-empty offloader set")
    sur = _Surrogate(iterate, prob)
    r = prob.radius
    ux, uy = sur.ux, sur.uy

    def proj(px, py):
        dx, dy = px - ux, py - uy
        n = math.hypot(dx, dy)
        if n <= r or n == 0.0:
            return px, py
        scale = r / n
        return ux + dx * scale, uy + dy * scale

    x, yv = float(iterate.local_point[0]), float(iterate.local_point[1])
    f = sur.value(x, yv)
    best = (x, yv, f)
    gx, gy = sur.gradient(x, yv)
    gnorm = math.hypot(gx, gy)
    t = r / (gnorm + 1e-12)
    t = min(max(t, 1e-12), 1e12)
    flat = 0
    for _ in range(max_iters):
        cx, cy = proj(x - t * gx, yv - t * gy)
        sx, sy = cx - x, cy - yv
        step2 = sx * sx + sy * sy
        if step2 <= 1e-28 * (1.0 + r * r):
            break
        fc = sur.value(cx, cy)
        bt = 0
        while fc > f + 1e-4 * (gx * sx + gy * sy) and bt < 60:
            t *= 0.5
            cx, cy = proj(x - t * gx, yv - t * gy)
            sx, sy = cx - x, cy - yv
            step2 = sx * sx + sy * sy
            if step2 <= 1e-30 * (1.0 + r * r):
                break
            fc = sur.value(cx, cy)
            bt += 1
        if fc > f or step2 <= 1e-30 * (1.0 + r * r):
            break
        ngx, ngy = sur.gradient(cx, cy)
        dgx, dgy = ngx - gx, ngy - gy
        denom = sx * dgx + sy * dgy
        if denom > 0.0:
            t = min(max(step2 / denom, 1e-12), 1e12)
        else:
            t *= 1.5
        if abs(f - fc) <= 1e-13 * (1.0 + abs(fc)):
            flat += 1
            if flat >= 3:
                x, yv, f = cx, cy, fc
                if fc < best[2]:
                    best = (cx, cy, fc)
                break
        else:
            flat = 0
        x, yv, f = cx, cy, fc
        gx, gy = ngx, ngy
        if fc < best[2]:
            best = (cx, cy, fc)
    bx, by, bf = best
    val, yslack, z = sur.value_parts(bx, by)
    return SubproblemSolution(np.array((bx, by)), yslack, np.asarray(z, dtype=float), val)


def start_anchor(prob: TrajectoryProblem) -> np.ndarray:
    """Pick the first descent anchor by probing a ring of candidate moves.

    The exact objective is a smooth saddle at zero displacement whenever the
    backlogged propulsion term dominates: the power curve is flat at rest but
    drops quadratically with speed, and a surrogate anchored at rest cannot
    see that drop, so a descent started there can settle millimeters from the
    start. One vectorized evaluation over a few headings (toward every
    offloader plus a compass fan) at a few speeds finds the right basin; the
    best sample, current position included, becomes the first anchor.
    """
    cur = np.asarray(prob.current_position, dtype=float)
    if prob.k == 0:
        return cur.copy()
    headings = [np.array([math.cos(a), math.sin(a)])
                for a in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)]
    for p_m in prob.ud_positions:
        d = np.asarray(p_m, dtype=float) - cur
        n = float(np.hypot(d[0], d[1]))
        if n > 1e-12:
            headings.append(d / n)
    r = prob.radius * (1.0 - 1e-12)
    probes = [cur] + [cur + (f * r) * h
                      for h in headings for f in (0.25, 0.5, 0.75, 1.0)]
    pts = np.asarray(probes)
    vals = np.asarray(p2_objective(pts, prob))
    return pts[int(np.argmin(vals))].copy()


def solve_stage2(prob: TrajectoryProblem, epsilon: float = 0.01,
                 max_iters: int = 100, record_trace: bool = False) -> Stage2Result:
    """Re-anchored surrogate descent until the surrogate value settles.

    Starts from the best probe of start_anchor with a zero reference value,
    so at least one subproblem is always solved when offloaders exist. An
    empty offloading set short-circuits: the only objective term left would
    reward wandering at the max-endurance speed in an arbitrary direction,
    so the UAV deterministically holds position instead.
    """
    cur = np.asarray(prob.current_position, dtype=float)
    if prob.k == 0:
        return Stage2Result(cur.copy(), True, 0, 0.0, float(p2_objective(cur, prob)))
    local = start_anchor(prob)
    g_prev = 0.0
    converged = False
    iters = 0
    trace = []
    best_pos = cur.copy()
    best_exact = float(p2_objective(cur, prob))
    start_exact = float(p2_objective(local, prob))
    if start_exact < best_exact:
        best_exact = start_exact
        best_pos = local.copy()
    for l in range(1, max_iters + 1):
        iters = l
        it = ScaIterate(local, y_anchor(local, cur, prob.tau, prob.uav.c3), g_prev, l)
        sol = solve_subproblem(it, prob)
        anchor_val = p2_objective(local, prob)
        if sol.objective > anchor_val + 1e-9 * (1.0 + abs(anchor_val)):
            # inner solver failed to improve on its own start; hold position
            log.debug("stage2 subproblem regressed at iter %d; keeping anchor", l)
            sol = SubproblemSolution(local.copy(), it.y_local, sol.z, anchor_val)
        local = sol.position
        exact = float(p2_objective(local, prob))
        if exact < best_exact:
            best_exact = exact
            best_pos = local.copy()
        if record_trace:
            trace.append((l, sol.objective, exact,
                          (float(local[0]), float(local[1]))))
        if abs(sol.objective - g_prev) < epsilon:
            g_prev = sol.objective
            converged = True
            break
        g_prev = sol.objective
    if not converged:
        # cap hit: fall back to the best point seen rather than the last one
        log.warning("stage2 hit the iteration cap at %d; returning best iterate", iters)
        return Stage2Result(best_pos, False, iters, g_prev, best_exact, trace)
    return Stage2Result(local, converged, iters, g_prev,
                        float(p2_objective(local, prob)), trace)

"""Self-similar variables around a blow-up point and the weighted energy.

With the blow-up time normalized to 1, the change of variables

    y = x / (1 + delta - t),   s = -log(1 + delta - t),
    w(y, s) = e^{-beta s} u(e^{-s} y, 1 + delta - e^{-s}),   beta = 2/(p-1),

turns the equation into a damped problem on the unit ball whose energy

    E(s) = 1/2 int (1-y^2)^(alpha+1) w_y^2 y^2 + 1/2 int (1-y^2)^alpha w_s^2 y^2
           + (p+1)/(p-1)^2 int (1-y^2)^alpha w^2 y^2
           - 1/(p+1) int (1-y^2)^alpha |w|^(p+1) y^2

(alpha = beta - 1 < 0) grows at the rate D(s) = -2 alpha int (1-y^2)^(alpha-1) w_s^2 y^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .nlwave import EvolutionTrace
from .radial import (Params, RadialGrid, RadialProfile, StatePair, derivative,
                     integrate_values, interpolate, second_derivative, smooth_step)

__all__ = ["SelfSimilarFrame", "frame_times", "to_selfsim", "tilde_energy",
           "dissipation_rate", "energy_budget", "elliptic_residual", "cone_plateau_state"]


@dataclass(frozen=True)
class SelfSimilarFrame:
    p: float
    delta: float
    T_plus: float
    s_grid: np.ndarray
    y: np.ndarray
    w: np.ndarray        # shape (len(s_grid), len(y))
    ws: np.ndarray
    wy: np.ndarray

    @property
    def alpha(self) -> float:
        return 2.0 / (self.p - 1) - 1.0

    @property
    def beta(self) -> float:
        return 2.0 / (self.p - 1)

    @property
    def dy(self) -> float:
        return float(self.y[1] - self.y[0])

    def index(self, s) -> int:
        k = int(np.argmin(np.abs(self.s_grid - s)))
        if abs(self.s_grid[k] - s) > 1e-12 * max(1.0, abs(s)):
            raise KeyError(f"s = {s} is not on the frame grid")
        return k

    def support(self, tol: float = 1e-12) -> np.ndarray:
        """Largest y with |w| + |w_s| above tol times the frame maximum, per s."""
        m = np.abs(self.w) + np.abs(self.ws)
        thr = tol * max(float(m.max()), 1e-300)
        out = np.zeros(len(self.s_grid))
        for k, row in enumerate(m):
            nz = np.flatnonzero(row > thr)
            out[k] = self.y[nz[-1]] if nz.size else 0.0
        return out


def frame_times(T_plus: float, delta: float, s_grid) -> np.ndarray:
    """Physical times T_plus (1 + delta - e^{-s}) visited by the frame."""
    return T_plus * (1.0 + delta - np.exp(-np.asarray(s_grid, dtype=float)))


def _state_near(trace: EvolutionTrace, t: float) -> StatePair:
    """Stored state at t, or cubic Hermite interpolation in time between the bracketing ones."""
    try:
        return trace.state_at(t, tol=1e-10)
    except KeyError:
        pass
    states = sorted(trace.states, key=lambda st: st.time)
    times = np.array([st.time for st in states])
    if times.size < 2 or not times[0] <= t <= times[-1]:
        raise ValueError(f"t = {t:.12g} lies outside the trace coverage "
                         f"[{times.min() if times.size else np.nan:.6g}, "
                         f"{times.max() if times.size else np.nan:.6g}]")
    k = int(np.searchsorted(times, t)) - 1
    a, b = states[k], states[k + 1]
    h = b.time - a.time
    x = (t - a.time) / h
    h00, h10, h01, h11 = 2 * x**3 - 3 * x**2 + 1, x**3 - 2 * x**2 + x, -2 * x**3 + 3 * x**2, x**3 - x**2
    u = h00 * a.u.values + h * h10 * a.ut.values + h01 * b.u.values + h * h11 * b.ut.values
    # u_t from the derivative of the same cubic (u_tt is not stored)
    d00, d10, d01, d11 = (6 * x**2 - 6 * x) / h, 3 * x**2 - 4 * x + 1, (-6 * x**2 + 6 * x) / h, 3 * x**2 - 2 * x
    ut = d00 * a.u.values + d10 * a.ut.values + d01 * b.u.values + d11 * b.ut.values
    return StatePair(a.u.with_values(u), a.ut.with_values(ut), a.params, t)


def to_selfsim(trace: EvolutionTrace, T_plus: float, delta: float, s_grid,
               n_y: int = 2049) -> SelfSimilarFrame:
    """Sample (w, w_s, w_y) on a uniform y grid of [0, 1] for each s.

    States at the times T_plus (1 + delta - e^{-s}) are taken from the trace when
    stored there and otherwise interpolated in time (cubic Hermite in u, u_t)
    between the bracketing snapshots; times outside the trace raise.
    Space and time are rescaled by T_plus so that the blow-up time becomes 1.
    w_s comes from the chain rule applied to (u, u_t, u_r) at a single time.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if T_plus <= 0:
        raise ValueError("T_plus must be positive")
    s_grid = np.asarray(s_grid, dtype=float)
    if delta > 0 and np.any(s_grid >= -np.log(delta)):
        raise ValueError("s must stay below -log(delta)")
    p = trace.params.p
    beta = 2.0 / (p - 1)
    y = np.linspace(0.0, 1.0, n_y)
    g = trace.grid
    T = T_plus
    W, WS, WY = (np.zeros((s_grid.size, n_y)) for _ in range(3))
    for k, (s, t) in enumerate(zip(s_grid, frame_times(T, delta, s_grid))):
        st = _state_near(trace, t)
        lam = T * np.exp(-s)
        x = lam * y
        if x[-1] > g.r_max + 1e-12:
            raise ValueError(f"frame at s = {s} needs r up to {x[-1]:.4g} beyond the grid")
        u = interpolate(st.u.values, g.dr, x)
        ut = interpolate(st.ut.values, g.dr, x)
        ur = interpolate(derivative(st.u.values, g.dr), g.dr, x)
        amp = np.exp(-beta * s) * T ** beta
        W[k] = amp * u
        WY[k] = amp * lam * ur
        WS[k] = -beta * W[k] + amp * lam * (ut - y * ur)
    return SelfSimilarFrame(p, delta, T, s_grid, y, W, WS, WY)


def _cone(values, dy, beta):
    return float(integrate_values(values, dy, "cone", 0.0, 1.0, beta=beta))


def tilde_energy(frame: SelfSimilarFrame, s) -> float:
    """Weighted self-similar energy at the frame sample s."""
    k = frame.index(s)
    p, a, dy = frame.p, frame.alpha, frame.dy
    w, ws, wy = frame.w[k], frame.ws[k], frame.wy[k]
    if not np.any(w) and not np.any(ws):
        return 0.0
    return (0.5 * _cone(wy ** 2, dy, a + 1)
            + 0.5 * _cone(ws ** 2, dy, a)
            + (p + 1) / (p - 1) ** 2 * _cone(w ** 2, dy, a)
            - _cone(np.abs(w) ** (p + 1), dy, a) / (p + 1))


def dissipation_rate(frame: SelfSimilarFrame, s=None):
    """D(s) = -2 alpha int (1-y^2)^(alpha-1) w_s^2 y^2 dy.

    With ``s`` given, returns D at that sample; otherwise returns the arrays
    (D, cumulative int D ds) over the whole frame.
    """
    a, dy = frame.alpha, frame.dy

    def one(k):
        ws = frame.ws[k]
        return -2.0 * a * _cone(ws ** 2, dy, a - 1) if np.any(ws) else 0.0

    if s is not None:
        return one(frame.index(s))
    D = np.array([one(k) for k in range(len(frame.s_grid))])
    return D, _cumulative(D, frame.s_grid)


def _cumulative(f, s):
    h = np.diff(s)
    if s.size >= 3 and np.allclose(h, h[0], rtol=1e-9):
        return cumulative_simpson(f, dx=float(h[0]), initial=0.0)
    return cumulative_trapezoid(f, s, initial=0.0)


def energy_budget(frame: SelfSimilarFrame) -> dict:
    """Energy, dissipation and the closure of E(s) - E(s0) = int_{s0}^s D."""
    E = np.array([tilde_energy(frame, s) for s in frame.s_grid])
    D, cumD = dissipation_rate(frame)
    gap = (E - E[0]) - cumD
    rel = np.abs(gap) / (abs(E[0]) + 1.0)
    steps = np.diff(E)
    slack = 1e-3 * np.abs(E[:-1])
    return dict(s=frame.s_grid, E=E, D=D, cumulative_D=cumD, budget_gap=gap,
                budget_rel=float(rel.max()),
                worst_drop=float(np.max(np.maximum(-steps, 0.0) / np.maximum(np.abs(E[:-1]), 1e-300)))
                if steps.size else 0.0,
                monotone=bool(np.all(steps >= -slack)),
                support=frame.support())


def elliptic_residual(w_star: RadialProfile, p: float) -> float:
    """sup over [dy, 1-dy] of the stationary self-similar equation's left-hand side."""
    g = w_star.grid
    if abs(g.r_max - 1.0) > 1e-12:
        raise ValueError("w_star must live on a grid of [0, 1]")
    a = 2.0 / (p - 1) - 1.0
    w = w_star.values
    w1 = derivative(w, g.dr)
    w2 = second_derivative(w, g.dr)
    y = g.r[1:-1]
    w, w1, w2 = w[1:-1], w1[1:-1], w2[1:-1]
    res = (-(1 - y * y) * w2 - (2 * (1 - y * y) / y - 2 * (a + 1) * y) * w1
           + 2 * (p + 1) / (p - 1) ** 2 * w - np.abs(w) ** (p - 1) * w)
    return float(np.max(np.abs(res))) if res.size else 0.0


def cone_plateau_state(grid: RadialGrid, params: Params, tau: float, margin: float,
                       width: float) -> StatePair:
    """ODE blow-up data at t = 1 - tau, flat on r <= tau + margin, then a smooth fall of given width.

    Requires sign +1.

    The backward light cone of (0, 1) is inside the flat part, so the solution
    blows up at the origin exactly at time 1, while its support at earlier times
    is the ball of radius (1 - t) + margin + width.
    """
    r = grid.r
    phi = 1.0 - smooth_step((r - tau - margin) / width)
    a = params.c_p * tau ** (-params.beta)
    # every point sits on its own zero-energy ODE trajectory (u_t^2/2 = u^(p+1)/(p+1)),
    # a blow-up solution with a later blow-up time; the ODE profile's own u_t/u
    # ratio on the fall would put positive-energy points there that blow up backward
    ut = params.beta / tau * a * phi ** ((params.p + 1) / 2)
    return StatePair(RadialProfile(grid, a * phi), RadialProfile(grid, ut), params, 1.0 - tau)

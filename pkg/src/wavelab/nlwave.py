"""Finite-difference evolution of u_tt - Lap u = sign |u|^(p-1) u for radial u in 3D.

The unknown is v = r u, which satisfies v_tt = v_rr + sign |v|^(p-1) v / r^(p-1)
with v(0) = 0.  It is advanced with the explicit leapfrog scheme

    v^{n+1} = 2 v^n - v^{n-1} + dt^2 (D2 v^n + F(v^n)),

started with a second-order Taylor step.  Two modified right-hand sides are
available: a cutoff nonlinearity |chi u|^(p-1) chi u, with chi a smooth
step from 0 on [0, r0/4] to 1 on [r0/2, inf), and the potential-difference
form |V + chi h|^(p-1)(V + chi h) - |V|^(p-1) V used to perturb a stationary
state V.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .radial import (Params, RadialGrid, RadialProfile, StatePair, derivative,
                     hdot_norm, integrate_values, smooth_step, UnderResolvedError)

__all__ = ["EvolveOptions", "EvolutionTrace", "EvolutionError", "evolve", "energy",
           "support_radius", "critical_norm_trace", "chi", "plateau_state",
           "ode_blowup", "lightcone_cutoff"]


class EvolutionError(RuntimeError):
    """Raised on invalid setups or non-finite states; carries the partial trace."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


def chi(r, r0):
    """Quintic smoothstep: 0 for r <= r0/4, 1 for r >= r0/2 (C^2)."""
    x = np.clip((np.asarray(r, dtype=float) / r0 - 0.25) / 0.25, 0.0, 1.0)
    return x ** 3 * (10 - 15 * x + 6 * x * x)


@dataclass(frozen=True)
class EvolveOptions:
    t_end: float
    cfl: float = 0.9
    blowup_guard: float = 1e6          # stop once max|u| exceeds this multiple of its start value
    variant: str = "plain"             # plain | cutoff | perturbation
    r0: Optional[float] = None         # cutoff radius for the modified variants
    V: Optional[RadialProfile] = None  # potential for the perturbation variant
    snap_every: int = 0                # keep every k-th state (0: first and last only)
    snap_times: tuple = ()             # extra exact times, interpolated in time
    norm_every: int = 0                # critical norms every k steps (0: off)
    track_deviation: bool = False      # split v = v_free + d and record |d| in energy norm
    linear: bool = False               # drop the nonlinearity (free scheme)
    support_tol: float = 1e-10         # relative threshold for the support radius

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.variant not in ("plain", "cutoff", "perturbation"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant != "plain" and not (self.r0 and self.r0 > 0):
            raise ValueError("modified variants need r0 > 0")
        if self.variant == "perturbation" and self.V is None:
            raise ValueError("perturbation variant needs a potential V")
        if self.blowup_guard <= 1:
            raise ValueError("blowup_guard must exceed 1")


@dataclass
class EvolutionTrace:
    params: Params
    grid: RadialGrid
    dt: float
    times: np.ndarray
    amplitude: np.ndarray
    u_origin: np.ndarray
    energy: np.ndarray
    support: np.ndarray
    norm_sp: np.ndarray
    norm_spm1: np.ndarray
    states: list = field(default_factory=list)
    deviation: Optional[np.ndarray] = None
    blowup: Optional[dict] = None

    def state_at(self, t: float, tol: float = 1e-12) -> StatePair:
        for s in self.states:
            if abs(s.time - t) <= tol * max(1.0, abs(t)):
                return s
        raise KeyError(f"no stored state at t = {t}")

    @property
    def state_times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])


def energy(state: StatePair, form: str = "u") -> float:
    """E = int [u_t^2/2 + u_r^2/2 - sign |u|^(p+1)/(p+1)] r^2 dr.

    ``form="v"`` evaluates the same quantity through v = r u, using
    int u_r^2 r^2 dr = int v_r^2 dr for data regular at the origin.
    """
    p, sign = state.params.p, state.params.sign
    g = state.grid
    r, u, ut = g.r, state.u.values, state.ut.values
    if form == "u":
        ur = derivative(u, g.dr)
        dens = 0.5 * ut ** 2 + 0.5 * ur ** 2 - sign * np.abs(u) ** (p + 1) / (p + 1)
        return float(integrate_values(dens, g.dr, "r2"))
    if form == "v":
        v, vt = r * u, r * ut
        vr = derivative(v, g.dr)
        pot = np.zeros_like(r)
        pot[1:] = np.abs(v[1:]) ** (p + 1) / r[1:] ** (p - 1)
        dens = 0.5 * vt ** 2 + 0.5 * vr ** 2 - sign * pot / (p + 1)
        return float(integrate_values(dens, g.dr, "1"))
    raise ValueError("form must be 'u' or 'v'")


def support_radius(state: StatePair, tol: float = 0.0) -> float:
    """Largest node r with |u| + |u_t| > tol (0 if there is none)."""
    m = np.abs(state.u.values) + np.abs(state.ut.values)
    nz = np.flatnonzero(m > tol)
    return float(state.grid.r[nz[-1]]) if nz.size else 0.0


# ---------------------------------------------------------------------------

def _u_from_v(v, r, dr):
    u = np.empty_like(v)
    u[1:] = v[1:] / r[1:]
    u[0] = (8 * v[1] - v[2]) / (6 * dr)
    return u


def _make_rhs(params: Params, grid: RadialGrid, opts: EvolveOptions):
    p, sign = params.p, params.sign
    r = grid.r
    rp = np.ones_like(r)
    rp[1:] = r[1:] ** (p - 1)
    rinv = np.zeros_like(r)
    rinv[1:] = 1.0 / r[1:]
    if opts.linear:
        return lambda v: np.zeros_like(v)
    if opts.variant == "plain":
        def F(v):
            out = sign * np.abs(v) ** (p - 1) * v / rp
            out[0] = 0.0
            return out
    elif opts.variant == "cutoff":
        c = chi(r, opts.r0)

        def F(v):
            w = c * v * rinv
            out = sign * r * np.abs(w) ** (p - 1) * w
            out[0] = 0.0
            return out
    else:
        c = chi(r, opts.r0)
        V = opts.V.values if isinstance(opts.V, RadialProfile) else np.asarray(opts.V(r))
        if V.shape != r.shape:
            raise ValueError("V must live on the evolution grid")
        V = np.where(np.isfinite(V), V, 0.0) * (c > 0)
        base = np.abs(V) ** (p - 1) * V

        def F(v):
            w = V + c * v * rinv
            out = sign * r * (np.abs(w) ** (p - 1) * w - base)
            out[0] = 0.0
            return out
    return F


def _d2(v, dr):
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (dr * dr)
    return out


def _norms(params, grid, u, ut):
    s = params.s_p
    try:
        a = hdot_norm(RadialProfile(grid, u), s)
        b = hdot_norm(RadialProfile(grid, ut), s - 1)
    except (UnderResolvedError, ValueError):
        return np.nan, np.nan
    return a, b


def _lagrange_weights(ts, t):
    w = np.ones(len(ts))
    dw = np.zeros(len(ts))
    for j, tj in enumerate(ts):
        others = [tk for k, tk in enumerate(ts) if k != j]
        den = np.prod([tj - tk for tk in others])
        w[j] = np.prod([t - tk for tk in others]) / den
        dw[j] = sum(np.prod([t - tk for m, tk in enumerate(others) if m != i])
                    for i in range(len(others))) / den
    return w, dw


def evolve(init: StatePair, opts: EvolveOptions) -> EvolutionTrace:
    """Advance ``init`` to ``opts.t_end`` (which may lie before init.time).

    Stops early when max|u| exceeds ``blowup_guard`` times its initial value
    and records the blow-up time estimate in ``trace.blowup``.
    """
    params, grid = init.params, init.grid
    r, dr = grid.r, grid.dr
    t0 = float(init.time)
    span = opts.t_end - t0
    if span == 0:
        raise ValueError("t_end equals the initial time")
    u0, u1 = init.u.values, init.ut.values
    if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(u1))):
        raise EvolutionError("non-finite initial data")
    reach = support_radius(init) + abs(span)
    if reach > grid.r_max - 2 * dr and (np.any(u0 != 0) or np.any(u1 != 0)):
        raise EvolutionError(
            f"light cone reaches r = {reach:.4g} beyond the grid edge {grid.r_max:.4g}")

    nsteps = max(4, int(np.ceil(abs(span) / (opts.cfl * dr) - 1e-9)))
    dt = span / nsteps
    F = _make_rhs(params, grid, opts)
    A0 = float(np.max(np.abs(u0)))
    guard = opts.blowup_guard * A0 if A0 > 0 else np.inf
    scale0 = max(A0, float(np.max(np.abs(u1))), 1e-300)
    tol_supp = opts.support_tol * scale0

    v_prev = r * u0
    v_prev[0] = 0.0
    vt0 = r * u1
    vt0[0] = 0.0
    if opts.track_deviation:
        free_prev, d_prev = v_prev.copy(), np.zeros_like(v_prev)
        dev_prevprev = np.zeros_like(v_prev)
        free_cur = free_prev + dt * vt0 + 0.5 * dt * dt * _d2(free_prev, dr)
        d_cur = 0.5 * dt * dt * F(v_prev)
        free_cur[0] = d_cur[0] = 0.0
        v_cur = free_cur + d_cur
    else:
        v_cur = v_prev + dt * vt0 + 0.5 * dt * dt * (_d2(v_prev, dr) + F(v_prev))
        v_cur[0] = 0.0

    times, amp, uorig, en, supp, nsp, nspm1, dev = [], [], [], [], [], [], [], []
    states = []
    pending = sorted(opts.snap_times, reverse=span < 0)
    hist = deque(maxlen=4)      # (t, v) levels for time interpolation
    hist.append((t0, v_prev.copy()))
    hist.append((t0 + dt, v_cur.copy()))

    def record(n, t, v, vt, d=None, dt_=None):
        u = _u_from_v(v, r, dr)
        ut = _u_from_v(vt, r, dr)
        st = StatePair(RadialProfile(grid, u), RadialProfile(grid, ut), params, t)
        times.append(t)
        amp.append(float(np.max(np.abs(u))))
        uorig.append(float(u[0]))
        with np.errstate(over="ignore", invalid="ignore"):
            en.append(energy(st, "v"))
        supp.append(support_radius(st, tol_supp))
        if opts.norm_every and n % opts.norm_every == 0:
            a, b = _norms(params, grid, u, ut)
        else:
            a = b = np.nan
        nsp.append(a)
        nspm1.append(b)
        if d is not None:
            dd, ddt = d
            dens = derivative(dd, dr) ** 2 + ddt ** 2
            dev.append(float(np.sqrt(integrate_values(dens, dr, "1"))))
        if n == 0 or (opts.snap_every and n % opts.snap_every == 0):
            states.append(st)
        return st

    def flush_snaps(final=False):
        # interpolate pending snapshot times that are bracketed by stored levels
        while pending:
            tau = pending[0]
            ts = [h[0] for h in hist]
            inside = (min(ts) - 1e-12 <= tau <= max(ts) + 1e-12)
            centred = len(ts) == 4 and (min(ts[1], ts[2]) - 1e-12 <= tau <= max(ts[1], ts[2]) + 1e-12)
            early = len(ts) == 4 and (min(ts[0], ts[1]) - 1e-12 <= tau <= max(ts[0], ts[1]) + 1e-12) \
                and abs(ts[0] - t0) < 1e-15
            if not (centred or early or (final and inside)):
                if (span > 0 and tau < min(ts) - 1e-12) or (span < 0 and tau > max(ts) + 1e-12):
                    pending.pop(0)      # fell behind (only possible for tau < t0)
                    continue
                return
            w, dw = _lagrange_weights(ts, tau)
            v = sum(wi * h[1] for wi, h in zip(w, hist))
            vt = sum(wi * h[1] for wi, h in zip(dw, hist))
            if abs(tau - t0) < 1e-15:
                v, vt = r * u0, r * u1
            st = StatePair(RadialProfile(grid, _u_from_v(v, r, dr)),
                           RadialProfile(grid, _u_from_v(vt, r, dr)), params, tau)
            states.append(st)
            pending.pop(0)

    record(0, t0, v_prev, vt0, (np.zeros_like(v_prev), np.zeros_like(v_prev))
           if opts.track_deviation else None)
    blowup = None
    failure = None
    dt2 = dt * dt
    n = 1
    while True:
        if opts.track_deviation:
            v_cur = free_cur + d_cur
            if n < nsteps:
                free_next = 2 * free_cur - free_prev + dt2 * _d2(free_cur, dr)
                d_next = 2 * d_cur - d_prev + dt2 * (_d2(d_cur, dr) + F(v_cur))
                free_next[0] = d_next[0] = 0.0
                v_next = free_next + d_next
        elif n < nsteps:
            v_next = 2 * v_cur - v_prev + dt2 * (_d2(v_cur, dr) + F(v_cur))
            v_next[0] = 0.0
        t = t0 + n * dt
        if n < nsteps:
            if not np.all(np.isfinite(v_next)):
                failure = f"non-finite state after t = {t:.6g}"
                break
            vt = (v_next - v_prev) / (2 * dt)
            hist.append((t + dt, v_next.copy()))
        else:
            # last level: one-sided second-order velocity
            h = list(hist)
            vt = (3 * h[-1][1] - 4 * h[-2][1] + h[-3][1]) / (2 * dt)
        d_pair = None
        if opts.track_deviation:
            if n < nsteps:
                d_pair = (d_cur, (d_next - d_prev) / (2 * dt))
            else:
                d_pair = (d_cur, (3 * d_cur - 4 * d_prev + dev_prevprev) / (2 * dt))
        st = record(n, t, v_cur, vt, d_pair)
        flush_snaps()
        if amp[-1] > guard:
            blowup = _fit_blowup(np.array(times), np.array(amp), params, dt)
            break
        if n == nsteps:
            break
        if opts.track_deviation:
            dev_prevprev = d_prev
            free_prev, free_cur = free_cur, free_next
            d_prev, d_cur = d_cur, d_next
        v_prev, v_cur = v_cur, v_next
        n += 1
    if not states or states[-1].time != times[-1]:
        states.append(st)
    flush_snaps(final=True)
    states.sort(key=lambda s: s.time * np.sign(span))
    trace = EvolutionTrace(params, grid, dt, np.array(times), np.array(amp), np.array(uorig),
                           np.array(en), np.array(supp), np.array(nsp), np.array(nspm1),
                           states, np.array(dev) if opts.track_deviation else None, blowup)
    if failure:
        raise EvolutionError(failure, trace)
    return trace


def _fit_blowup(times, amp, params: Params, dt: float) -> dict:
    """Blow-up time from the linear zero of max|u|^(-(p-1)/2) near the end.

    Only steps that still resolve the ODE time scale (dt^2 p A^(p-1) < 0.05)
    and that have grown to at least 4x the initial amplitude enter the fit;
    the exponent of max|u| versus (T - t) is fitted over the same window.
    """
    p = params.p
    ok = (dt * dt * p * amp ** (p - 1) < 0.05) & (amp >= 4 * amp[0])
    idx = np.flatnonzero(ok)
    if idx.size < 8:
        ok = amp >= 2 * amp[0]
        idx = np.flatnonzero(ok)[:-2]
    if idx.size < 4:
        return dict(T_est=float(times[-1]), fit_exponent=np.nan, window=None)
    # keep the last stretch where the amplitude is within a factor 8 of its top
    top = amp[idx[-1]]
    idx = idx[amp[idx] >= top / 8]
    y = amp[idx] ** (-(p - 1) / 2)
    slope, icpt = np.polyfit(times[idx], y, 1)
    T_est = -icpt / slope
    tau = T_est - times[idx]
    good = tau > 0
    expo = np.polyfit(np.log(tau[good]), np.log(amp[idx][good]), 1)[0] if good.sum() > 2 else np.nan
    return dict(T_est=float(T_est), fit_exponent=float(expo),
                window=[float(times[idx[0]]), float(times[idx[-1]])])


# ---------------------------------------------------------------------------
# data and diagnostics

def ode_blowup(t, T, params: Params):
    """Space-independent blow-up solution c_p (T - t)^(-2/(p-1))."""
    return params.c_p * (T - np.asarray(t, dtype=float)) ** (-params.beta)


def plateau_state(grid: RadialGrid, params: Params, T: float = 1.0, R: float = 1.0,
                  width: float = 0.5, t0: float = 0.0) -> StatePair:
    """Data equal to the ODE blow-up solution at time t0 on |x| <= R, smoothly cut off over ``width``."""
    phi = 1.0 - smooth_step((grid.r - R) / width)
    a = float(ode_blowup(t0, T, params))
    u = a * phi
    ut = params.beta / (T - t0) * a * phi
    return StatePair(RadialProfile(grid, u), RadialProfile(grid, ut), params, t0)


def lightcone_cutoff(r, R):
    """Fixed smooth cutoff: 1 on [0, R/2], 0 beyond R."""
    return 1.0 - smooth_step((np.asarray(r, dtype=float) - 0.5 * R) / (0.5 * R))


def critical_norm_trace(trace: EvolutionTrace, mode="full", times=None) -> dict:
    """N_{s_p}(u) + N_{s_p - 1}(u_t) over the stored states.

    ``mode`` is ``"full"`` or ``("lightcone", R)``; the latter multiplies both
    components by a fixed cutoff supported in |x| <= R before taking norms
    (R should not exceed the radius of the backward light cone of interest).
    """
    params = trace.params
    states = trace.states if times is None else [trace.state_at(t) for t in times]
    if isinstance(mode, tuple) and mode[0] == "lightcone":
        psi = lightcone_cutoff(trace.grid.r, mode[1])
    elif mode == "full":
        psi = 1.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    s = params.s_p
    ts, a, b = [], [], []
    for st in states:
        ts.append(st.time)
        a.append(hdot_norm(st.u.with_values(psi * st.u.values), s))
        b.append(hdot_norm(st.ut.with_values(psi * st.ut.values), s - 1))
    a, b = np.array(a), np.array(b)
    return dict(times=np.array(ts), norm_sp=a, norm_spm1=b, total=a + b)

"""Singular stationary solutions of Lap Z + |Z|^(p-1) Z = 0 behaving like l/r at infinity.

With g(r) = r Z(r) the equation becomes g'' = -r^(1-p) |g|^(p-1) g.  The
solution with g -> 1 is built in two stages:

* on [r0, inf) as the fixed point of
      T(g)(r) = 1 - int_r^inf int_s^inf sigma^(1-p) |g|^(p-1) g dsigma ds,
  iterated on a logarithmic grid up to R_max with the tail beyond R_max
  closed analytically (g = 1 in the integrand);
* on [r_min, r0] by integrating the ODE backwards in x = log r, where the
  equation reads G'' = G' - e^((3-p)x) |G|^(p-1) G and stays non-stiff all
  the way to the origin.

Other values of l follow from the scaling Z_l(r) = sign(l) lam^(-2/(p-1)) Z_1(r/lam)
with lam^((p-3)/(p-1)) = |l|.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline

__all__ = ["PicardConfig", "PicardResult", "StationarySolution", "picard_solve",
           "choose_r0", "extend_ode", "build_Z", "verify_asymptotics",
           "lqp_divergence", "lq_mass", "regular_solution", "ContractionError"]


class ContractionError(RuntimeError):
    """The Picard map is not contracting strongly enough at this r0."""


@dataclass(frozen=True)
class PicardConfig:
    p: float = 7.0
    r0: float = 4.0
    R_max: Optional[float] = None      # defaults to 64*r0
    tol: float = 1e-14
    max_iter: int = 60
    n: int = 4097                      # nodes of the log grid on [r0, R_max]

    def __post_init__(self):
        if not self.p > 5:
            raise ValueError("p must exceed 5")
        if self.R_max is None:
            object.__setattr__(self, "R_max", 64.0 * self.r0)
        if not 1 < self.r0 < self.R_max:
            raise ValueError("need 1 < r0 < R_max")
        if self.n < 16:
            raise ValueError("log grid too coarse")


@dataclass
class PicardResult:
    cfg: PicardConfig
    r: np.ndarray
    g: np.ndarray
    gp: np.ndarray
    tail_coefficient: float             # g ~ 1 - c r^-(p-3) beyond R_max
    truncation_error: float
    contraction_factors: list
    ball_norms: list                    # ||T^k(1) - 1||_V for every iterate
    b10_margins: list                   # max of |T g - 1| / bound over every iterate
    n_iter: int

    @property
    def contraction_factor(self) -> float:
        return max(self.contraction_factors) if self.contraction_factors else 0.0


def _cum_from_right(y, h):
    """int_{x_i}^{x_N} y dx on a uniform grid."""
    # integrate the reversed array so small right-end values keep full precision
    return cumulative_simpson(y[::-1], dx=h, initial=0.0)[::-1]


def _picard_map(x, r, g, p, R):
    h = x[1] - x[0]
    f = r ** (1 - p) * np.abs(g) ** (p - 1) * g
    I1 = _cum_from_right(f * r, h) + R ** (2 - p) / (p - 2)
    J = _cum_from_right(I1 * r, h) + R ** (3 - p) / ((p - 2) * (p - 3))
    return 1.0 - J, I1


def v_norm(r, g_minus_one, gp, p):
    """sup_r (|g - 1| r^(p-4) + |g'| r^(p-3))."""
    return float(np.max(np.abs(g_minus_one) * r ** (p - 4) + np.abs(gp) * r ** (p - 3)))


def picard_solve(cfg: PicardConfig) -> PicardResult:
    """Fixed point of T on [r0, R_max] starting from g = 1."""
    p, R = cfg.p, cfg.R_max
    x = np.linspace(np.log(cfg.r0), np.log(R), cfg.n)
    r = np.exp(x)
    g = np.ones_like(r)
    gp = np.zeros_like(r)
    bound = 2 ** p / ((p - 2) * (p - 3)) / cfg.r0 * r ** (4 - p)
    factors, norms, margins = [], [], []
    prev_diff = None
    for k in range(1, cfg.max_iter + 1):
        g_new, gp_new = _picard_map(x, r, g, p, R)
        nv = v_norm(r, g_new - 1, gp_new, p)
        norms.append(nv)
        margins.append(float(np.max(np.abs(g_new - 1) / bound)))
        if nv > 1:
            raise ContractionError(f"iterate {k} left the unit ball: ||g-1||_V = {nv:.3g}")
        diff = float(np.max(np.abs(g_new - g)))
        if prev_diff is not None and prev_diff > 1e-11:
            q = diff / prev_diff
            factors.append(q)
            if q >= 0.5:
                raise ContractionError(
                    f"contraction factor {q:.3g} >= 1/2 at r0 = {cfg.r0}; increase r0")
        g, gp = g_new, gp_new
        prev_diff = diff
        if diff < cfg.tol:
            break
    c = 1.0 / ((p - 2) * (p - 3))
    trunc = R ** (4 - p) / cfg.r0
    return PicardResult(cfg, r, g, gp, c, trunc, factors, norms, margins, k)


def choose_r0(p: float, r0: float = 4.0, **kw) -> PicardResult:
    """Double r0 from its starting value until the Picard map contracts with factor < 1/2."""
    for _ in range(12):
        try:
            return picard_solve(PicardConfig(p=p, r0=r0, **kw))
        except ContractionError:
            r0 *= 2
    raise ContractionError("no admissible r0 found")


@dataclass
class OdeBranch:
    r: np.ndarray
    g: np.ndarray
    gp: np.ndarray
    r_reached: float
    complete: bool
    message: str


def extend_ode(pic: PicardResult, r_min: float, rtol: float = 1e-12, guard: float = 1e8,
               h: Optional[float] = None) -> OdeBranch:
    """Continue g from r0 down to r_min by integrating the ODE in x = log r.

    Output nodes are uniform in x with spacing ``h`` (default: the Picard grid's)
    and include x = log r0.  Stops early when |g| exceeds ``guard``.
    """
    p = pic.cfg.p
    r0 = pic.r[0]
    if not 0 < r_min < r0:
        raise ValueError("need 0 < r_min < r0")
    x0, x1 = np.log(r0), np.log(r_min)
    if h is None:
        h = pic.r.size and (np.log(pic.r[-1]) - x0) / (pic.r.size - 1)
    m = int(np.ceil((x0 - x1) / h))
    xs = x0 - h * np.arange(m + 1)
    xs[-1] = x1

    def rhs(x, y):
        G, Gx = y
        return [Gx, Gx - np.exp((3 - p) * x) * abs(G) ** (p - 1) * G]

    def overflow(x, y):
        return guard - abs(y[0])
    overflow.terminal = True

    y0 = [pic.g[0], r0 * pic.gp[0]]
    sol = solve_ivp(rhs, (x0, x1), y0, method="DOP853", t_eval=xs, rtol=rtol,
                    atol=1e-14, events=overflow)
    xr = sol.t
    r = np.exp(xr)[::-1]
    G, Gx = sol.y[0][::-1], sol.y[1][::-1]
    complete = sol.status == 0 and xr.size == xs.size
    reached = float(r[0]) if r.size else r0
    return OdeBranch(r, G, Gx / r, reached, complete, sol.message)


@lru_cache(maxsize=16)
def _base_solution(p, r0, n, r_min, rtol):
    pic = choose_r0(p, r0=r0, n=n)
    ode = extend_ode(pic, r_min, rtol=rtol)
    return pic, ode


@dataclass
class StationarySolution:
    """Z_l as matched data: ODE branch on [r_min, r0], Picard branch on [r0, R_max]."""

    p: float
    ell: float
    lam: float
    picard: PicardResult
    ode: OdeBranch
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        if self.ell == 0:
            raise ValueError("ell must be nonzero")
        r, g, gp = self.base_nodes()
        x = np.log(r)
        self._spline = CubicHermiteSpline(x, g, r * gp)

    # nodes of the l = 1 profile g = r Z_1, ascending in r, r0 shared once
    def base_nodes(self):
        r = np.concatenate([self.ode.r[:-1], self.picard.r])
        g = np.concatenate([self.ode.g[:-1], self.picard.g])
        gp = np.concatenate([self.ode.gp[:-1], self.picard.gp])
        return r, g, gp

    @property
    def r0(self) -> float:
        return float(self.picard.r[0])

    @property
    def R_max(self) -> float:
        return float(self.picard.r[-1]) * self.lam

    @property
    def r_min(self) -> float:
        return float(self.ode.r_reached) * self.lam

    @property
    def beta(self) -> float:
        return 2.0 / (self.p - 1)

    def _g1(self, rho):
        """(g, g') of the l = 1 solution at radii rho >= r_min."""
        rho = np.asarray(rho, dtype=float)
        r_lo = self.ode.r_reached
        if np.any(rho < r_lo * (1 - 1e-12)):
            raise ValueError(f"radius below the reached inner cutoff {r_lo:.3g}")
        R = self.picard.r[-1]
        inside = rho <= R
        xq = np.log(np.clip(rho, r_lo, R))
        g = self._spline(xq)
        gp = self._spline(xq, 1) / np.clip(rho, r_lo, R)
        c = self.picard.tail_coefficient
        k = self.p - 3
        g = np.where(inside, g, 1.0 - c * rho ** (-k))
        gp = np.where(inside, gp, c * k * rho ** (-k - 1))
        return g, gp

    def Z(self, r):
        r = np.asarray(r, dtype=float)
        rho = r / self.lam
        g, _ = self._g1(rho)
        return np.sign(self.ell) * self.lam ** (-self.beta) * g / rho

    def dZ(self, r):
        r = np.asarray(r, dtype=float)
        rho = r / self.lam
        g, gp = self._g1(rho)
        dz1 = (gp * rho - g) / rho ** 2
        return np.sign(self.ell) * self.lam ** (-self.beta - 1) * dz1

    def __call__(self, r):
        return self.Z(r)

    def phi(self):
        """Phi = g'^2/2 + |g|^(p+1)/((p+1) r^(p-1)) at the base nodes."""
        r, g, gp = self.base_nodes()
        p = self.p
        return r, 0.5 * gp ** 2 + np.abs(g) ** (p + 1) / ((p + 1) * r ** (p - 1))

    def phi_max_increase(self) -> float:
        """Largest relative rise (Phi[k+1] - Phi[k]) / Phi[k] between neighbouring nodes.

        Phi is nonincreasing in exact arithmetic; near zeros of g its true decrease
        per step is of order |g|^(p+1) and drowns in the integrator's relative error,
        so checks compare this number with a small multiple of the ODE tolerance.
        """
        _, ph = self.phi()
        return float(max(np.max(np.diff(ph) / ph[:-1]), 0.0))

    def phi_log_derivative_bound(self) -> float:
        """sup r |Phi'| / Phi over the nodes, using Phi' = -(p-1)|g|^(p+1)/((p+1) r^p)."""
        r, g, _ = self.base_nodes()
        p = self.p
        _, ph = self.phi()
        dphi = (p - 1) * np.abs(g) ** (p + 1) / ((p + 1) * r ** p)
        return float(np.max(r * dphi / ph))

    def residual(self, r_lo: Optional[float] = None):
        """Scaled ODE residual |g'' + r^(1-p)|g|^(p-1)g| / S(r).

        g'' comes from fourth-order differences of the stored g' in log r,
        separately on each branch.  Since g changes sign near the origin, the
        scale S is the envelope of the nonlinear term over the local
        oscillation, S = r^(1-p) ((p+1) r^(p-1) Phi)^(p/(p+1)), which bounds
        r^(1-p)|g|^p and equals it wherever g' = 0.  Returns (r, residual) for
        the l = 1 nodes in [r_lo, R_max]; r_lo defaults to twice the cutoff.
        """
        from .radial import derivative
        p = self.p
        if r_lo is None:
            r_lo = 2 * self.ode.r_reached
        rs, res = [], []
        for br in (self.ode, self.picard):
            r, g, gp = br.r, br.g, br.gp
            if r.size < 8:
                continue
            x = np.log(r)
            h = np.diff(x)
            # the ODE branch may end on a shortened last step; drop it
            keep = np.abs(h - h[len(h) // 2]) < 1e-9 * abs(h[len(h) // 2])
            start = np.argmax(keep)
            r, g, gp, x = r[start:], g[start:], gp[start:], x[start:]
            gpp = derivative(gp, x[1] - x[0]) / r
            nl = r ** (1 - p) * np.abs(g) ** (p - 1) * g
            phi = 0.5 * gp ** 2 + np.abs(g) ** (p + 1) / ((p + 1) * r ** (p - 1))
            scale = r ** (1 - p) * ((p + 1) * r ** (p - 1) * phi) ** (p / (p + 1))
            rel = np.abs(gpp + nl) / scale
            sel = r >= r_lo
            rs.append(r[sel])
            res.append(rel[sel])
        return np.concatenate(rs), np.concatenate(res)

    def matching_jump(self) -> float:
        """|g'(r0+) - g'(r0-)| from one-sided differences on the two branches."""
        h = np.log(self.picard.r[1]) - np.log(self.picard.r[0])
        gr = self.picard.g[:5]
        gl = self.ode.g[-5:][::-1]
        c = np.array([-25, 48, -36, 16, -3]) / 12.0
        right = np.dot(c, gr) / h
        left = -np.dot(c, gl) / h
        return float(abs(right - left) / self.r0)


def build_Z(ell: float, p: float = 7.0, cfg: Optional[PicardConfig] = None,
            r_min: float = 1e-4, rtol: float = 1e-12) -> StationarySolution:
    """Z_l from the l = 1 construction and the scaling law."""
    if ell == 0:
        raise ValueError("ell must be nonzero")
    cfg = cfg or PicardConfig(p=p)
    if cfg.p != p:
        raise ValueError("cfg.p and p disagree")
    pic, ode = _base_solution(float(p), float(cfg.r0), int(cfg.n), float(r_min), float(rtol))
    lam = abs(ell) ** ((p - 1) / (p - 3))
    return StationarySolution(p, ell, lam, pic, ode)


def _loglog_slope(r, y):
    A = np.vstack([np.log(r), np.ones_like(r)]).T
    slope = np.linalg.lstsq(A, np.log(np.abs(y)), rcond=None)[0][0]
    if not np.isfinite(slope):
        raise ValueError("non-finite log-log fit")
    return float(slope)


def verify_asymptotics(Z: StationarySolution, n_fit: int = 400) -> dict:
    """Decay constants at infinity and the power law at the origin.

    tail_constant = sup over [2 r0, R_max] of r^2 |r Z - l|; edge_slope = r^2 Z'(R_max);
    decay_slope is the log-log slope of |r Z - l| over [2 r0, R_max/2];
    origin_exponent is the power of the amplitude envelope of Z over
    [r_min, 4 r_min], read off the slope of Phi; the raw least-squares slope of
    log|Z| (which oscillates there) is reported as origin_exponent_pointwise.
    Radii are in the scaled variable of Z_l.
    """
    lam, ell = Z.lam, Z.ell
    r0 = Z.r0 * lam
    R = Z.R_max
    r_out = np.geomspace(2 * r0, R, n_fit)
    dev = r_out * Z.Z(r_out) - ell
    tail_constant = float(np.max(r_out ** 2 * np.abs(dev)))
    r_fit = np.geomspace(2 * r0, R / 2, n_fit)
    decay_slope = _loglog_slope(r_fit, r_fit * Z.Z(r_fit) - ell)
    edge_slope = float(R ** 2 * Z.dZ(np.array([R]))[0])
    # Z oscillates in sign near the origin, so the power law is read off the
    # monotone envelope Phi: if |Z| ~ r^-gamma then Phi ~ r^(2 - (p+1) gamma)
    p = Z.p
    rb, ph = Z.phi()
    rb = rb * lam
    sel = (rb >= Z.r_min * (1 - 1e-12)) & (rb <= 4 * Z.r_min * (1 + 1e-12))
    phi_slope = _loglog_slope(rb[sel], ph[sel])
    origin_exponent = (phi_slope - 2) / (p + 1)
    r_in = np.geomspace(Z.r_min, 4 * Z.r_min, n_fit)
    pointwise = _loglog_slope(r_in, Z.Z(r_in))
    out = dict(tail_constant=tail_constant, edge_slope=edge_slope, origin_exponent=origin_exponent,
               decay_slope=decay_slope, origin_exponent_pointwise=pointwise,
               sign_changes=int(np.count_nonzero(np.diff(np.sign(Z.base_nodes()[1])))),
               windows=dict(decay=[2 * r0, R / 2], origin=[Z.r_min, 4 * Z.r_min]))
    if not all(np.isfinite(v) for v in (tail_constant, edge_slope, origin_exponent, decay_slope)):
        raise ValueError("non-finite asymptotic fit")
    return out


def lq_mass(fn, q: float, r_min: float, r_max: float = 1.0, n: int = 20001) -> float:
    """int_{r_min}^{r_max} |f|^q r^2 dr on a logarithmic grid."""
    x = np.linspace(np.log(r_min), np.log(r_max), n)
    r = np.exp(x)
    return float(simpson(np.abs(fn(r)) ** q * r ** 3, dx=x[1] - x[0]))


def lqp_divergence(Z: StationarySolution, r_min_list) -> list:
    """Masses int_{r_min}^1 |Z|^(q_p) r^2 dr for each r_min (in decreasing order)."""
    q = 1.5 * (Z.p - 1)
    r_min_list = sorted(r_min_list, reverse=True)
    if r_min_list and r_min_list[-1] < Z.r_min * (1 - 1e-12):
        raise ValueError("solution does not reach the smallest requested radius")
    return [lq_mass(Z.Z, q, rm) for rm in r_min_list]


def regular_solution(p: float = 7.0, a: float = 1.0, r_max: float = 1.0, rtol: float = 1e-12):
    """Bounded stationary solution W'' + 2W'/r + |W|^(p-1)W = 0 with W(0) = a, W'(0) = 0.

    Started from the series W = a - a^p r^2/6 at a small radius; returns a
    callable on [0, r_max] (dense output of the integrator).
    """
    r_s = 1e-4 * a ** (-(p - 1) / 2)
    w_s = a - a ** p * r_s ** 2 / 6
    dw_s = -a ** p * r_s / 3

    def rhs(r, y):
        return [y[1], -2 * y[1] / r - abs(y[0]) ** (p - 1) * y[0]]

    sol = solve_ivp(rhs, (r_s, r_max), [w_s, dw_s], method="DOP853", rtol=rtol,
                    atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(sol.message)

    def W(r):
        r = np.asarray(r, dtype=float)
        inner = a - a ** p * r ** 2 / 6
        return np.where(r < r_s, inner, sol.sol(np.clip(r, r_s, r_max))[0])
    return W

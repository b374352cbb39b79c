"""Radial grids, profiles, quadrature and fractional Sobolev norms.

All integrals use the radial measure r^2 dr without the 4*pi factor of the
full three-dimensional norms.  A radial function f is carried through
v = r*f, which turns the 3D radial Laplacian into a 1D second derivative and
the radial Fourier transform into a sine transform.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.fft import dst
from scipy.integrate import simpson
from scipy.special import roots_legendre

__all__ = [
    "Params", "RadialGrid", "Compact", "AlgebraicTail", "RadialProfile",
    "StatePair", "UnderResolvedError", "derivative", "second_derivative",
    "interpolate", "integrate_values",
    "quadrature", "sine_transform", "hdot_norm", "exterior_identity",
    "strauss_ratio", "psi_truncate", "exterior_smallness", "smooth_step",
    "bump", "random_bump_profile",
]

_GL_X, _GL_W = roots_legendre(8)


class UnderResolvedError(ValueError):
    """The frequency grid does not resolve the profile."""


@dataclass(frozen=True)
class Params:
    """Exponent and sign of the nonlinearity in u_tt - Lap u = sign |u|^(p-1) u."""

    p: float
    sign: int = 1

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def s_p(self) -> float:
        return 1.5 - 2.0 / (self.p - 1)

    @property
    def q_p(self) -> float:
        return 1.5 * (self.p - 1)

    @property
    def alpha(self) -> float:
        return 2.0 / (self.p - 1) - 1.0

    @property
    def beta(self) -> float:
        """Self-similar amplitude exponent 2/(p-1)."""
        return 2.0 / (self.p - 1)

    @property
    def c_p(self) -> float:
        """Amplitude of the ODE blow-up solution c_p (T-t)^(-2/(p-1))."""
        return (2.0 * (self.p + 1) / (self.p - 1) ** 2) ** (1.0 / (self.p - 1))


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n: int

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.n < 16:
            raise ValueError("a radial grid needs at least 16 nodes")

    @property
    def dr(self) -> float:
        return self.r_max / (self.n - 1)

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n) * self.dr

    @classmethod
    def with_spacing(cls, dr: float, r_max: float) -> "RadialGrid":
        """Grid of spacing ``dr`` whose outer edge is at least ``r_max``."""
        n = int(np.ceil(r_max / dr - 1e-9)) + 1
        return cls((n - 1) * dr, n)


@dataclass(frozen=True)
class Compact:
    """Profile vanishes beyond ``support_radius``."""
    support_radius: float


@dataclass(frozen=True)
class AlgebraicTail:
    """Profile continues as coefficient * r**(-exponent) beyond the grid."""
    exponent: float
    coefficient: float

    def __call__(self, r):
        return self.coefficient * np.asarray(r, dtype=float) ** (-self.exponent)

    def derivative(self) -> "AlgebraicTail":
        return AlgebraicTail(self.exponent + 1, -self.exponent * self.coefficient)

    def __mul__(self, other: "AlgebraicTail") -> "AlgebraicTail":
        return AlgebraicTail(self.exponent + other.exponent,
                             self.coefficient * other.coefficient)

    def times_power(self, k: float) -> "AlgebraicTail":
        """Tail of r**k times this profile."""
        return AlgebraicTail(self.exponent - k, self.coefficient)

    def integral(self, a: float, b: float = np.inf) -> float:
        """Closed-form integral of the tail model over [a, b]."""
        k, c = self.exponent, self.coefficient
        if c == 0 or a >= b:
            return 0.0
        if np.isinf(b):
            if k <= 1:
                raise ValueError(f"tail r^-{k} is not integrable at infinity")
            return c * a ** (1 - k) / (k - 1)
        if k == 1:
            return c * np.log(b / a)
        return c * (a ** (1 - k) - b ** (1 - k)) / (k - 1)


Decay = Union[Compact, AlgebraicTail]


def _support_radius(r, values, tol=0.0):
    nz = np.flatnonzero(np.abs(values) > tol)
    return float(r[nz[-1]]) if nz.size else 0.0


@dataclass(frozen=True)
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray
    decay: Optional[Decay] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got {vals.shape}")
        object.__setattr__(self, "values", vals)
        if self.decay is None:
            object.__setattr__(self, "decay",
                               Compact(_support_radius(self.grid.r, vals)))

    @classmethod
    def from_function(cls, grid: RadialGrid, fn: Callable, tail: Optional[AlgebraicTail] = None):
        return cls(grid, np.asarray(fn(grid.r), dtype=float) * np.ones(grid.n), tail)

    @classmethod
    def zeros(cls, grid: RadialGrid):
        return cls(grid, np.zeros(grid.n))

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def tail(self) -> Optional[AlgebraicTail]:
        return self.decay if isinstance(self.decay, AlgebraicTail) else None

    def with_values(self, values, tail: Optional[AlgebraicTail] = None) -> "RadialProfile":
        return RadialProfile(self.grid, values, tail)

    def __call__(self, x):
        """Evaluate by local cubic interpolation, or the tail model beyond the grid."""
        x = np.asarray(x, dtype=float)
        out = interpolate(self.values, self.grid.dr, np.minimum(x, self.grid.r_max))
        outside = x > self.grid.r_max * (1 + 1e-14)
        if np.any(outside):
            out = np.where(outside, self.tail(np.maximum(x, self.grid.r_max))
                           if self.tail is not None else 0.0, out)
        return out

    def derivative(self) -> "RadialProfile":
        tail = self.tail.derivative() if self.tail is not None else None
        return RadialProfile(self.grid, derivative(self.values, self.grid.dr), tail)

    def support_radius(self, tol: float = 0.0) -> float:
        if self.tail is not None:
            return np.inf
        return _support_radius(self.r, self.values, tol)


@dataclass(frozen=True)
class StatePair:
    u: RadialProfile
    ut: RadialProfile
    params: Params
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise ValueError("position and velocity must share one grid")

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid


# ---------------------------------------------------------------------------
# finite differences and interpolation

def derivative(values, dr):
    """Fourth-order first derivative on a uniform grid (one-sided at the ends).

    Stencils act on differences from a reference node, so constants give exact zeros.
    """
    f = np.asarray(values, dtype=float)
    if f.size < 5:
        raise ValueError("need at least 5 samples")
    d = np.empty_like(f)
    m = f[2:-2]
    d[2:-2] = ((f[:-4] - m) - 8 * (f[1:-3] - m) + 8 * (f[3:-1] - m) - (f[4:] - m)) / 12.0
    lo, hi = f[:5] - f[0], f[-1:-6:-1] - f[-1]
    d[0] = (48 * lo[1] - 36 * lo[2] + 16 * lo[3] - 3 * lo[4]) / 12.0
    d[1] = (-10 * lo[1] + 18 * lo[2] - 6 * lo[3] + lo[4]) / 12.0
    d[-1] = -(48 * hi[1] - 36 * hi[2] + 16 * hi[3] - 3 * hi[4]) / 12.0
    d[-2] = -(-10 * hi[1] + 18 * hi[2] - 6 * hi[3] + hi[4]) / 12.0
    return d / dr


def second_derivative(values, dr):
    """Fourth-order second derivative on a uniform grid (one-sided at the ends).

    Stencils act on differences from a reference node, so constants give exact zeros.
    """
    f = np.asarray(values, dtype=float)
    if f.size < 6:
        raise ValueError("need at least 6 samples")
    d = np.empty_like(f)
    m = f[2:-2]
    d[2:-2] = (-(f[:-4] - m) + 16 * (f[1:-3] - m) + 16 * (f[3:-1] - m) - (f[4:] - m)) / 12.0
    c0 = np.array([-154, 214, -156, 61, -10]) / 12.0
    c1 = np.array([-15, -4, 14, -6, 1]) / 12.0
    lo, hi = f[:6] - f[0], f[-1:-7:-1] - f[-1]
    d[0] = np.dot(c0, lo[1:])
    d[1] = np.dot(c1, lo[1:])
    d[-1] = np.dot(c0, hi[1:])
    d[-2] = np.dot(c1, hi[1:])
    return d / (dr * dr)


def interpolate(values, dr, x):
    """Local four-point Lagrange interpolation of nodal values at points x."""
    f = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    n = f.size
    t = x / dr
    j = np.clip(np.floor(t).astype(int) - 1, 0, n - 4)
    s = t - j
    c0 = -(s - 1) * (s - 2) * (s - 3) / 6.0
    c1 = s * (s - 2) * (s - 3) / 2.0
    c2 = -s * (s - 1) * (s - 3) / 2.0
    c3 = s * (s - 1) * (s - 2) / 6.0
    return c0 * f[j] + c1 * f[j + 1] + c2 * f[j + 2] + c3 * f[j + 3]


# ---------------------------------------------------------------------------
# quadrature

def _weight_fn(weight, beta):
    if weight in ("1", 1, None):
        return lambda x: np.ones_like(x)
    if weight == "r2":
        return lambda x: x * x
    if weight == "cone":
        return lambda x: np.maximum(1 - x * x, 0.0) ** beta * x * x
    raise ValueError(f"unknown weight {weight!r}")


def _gauss(fn, a, b):
    if b <= a:
        return 0.0
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.dot(_GL_W, fn(x)))


def integrate_values(values, dr, weight="1", a=0.0, b=None, beta=None,
                     tail: Optional[AlgebraicTail] = None):
    """Integrate nodal samples against a radial weight.

    Parameters
    ----------
    values : array
        Samples of f on r_i = i*dr.
    weight : {"1", "r2", "cone"}
        ``cone`` is (1 - r^2)**beta * r^2 and requires b <= 1.
    a, b : float
        Integration range; ``b=None`` means the grid edge, or infinity when an
        algebraic tail is supplied.
    tail : AlgebraicTail, optional
        Model of f beyond the grid used for the part of [a, b] outside it.
    """
    f = np.asarray(values, dtype=float)
    n = f.size
    r_max = (n - 1) * dr
    if b is None:
        b = np.inf if tail is not None else r_max
    if a < 0 or b < a:
        raise ValueError(f"bad integration range [{a}, {b}]")
    if a == b:
        return 0.0
    if weight == "cone":
        if beta is None:
            raise ValueError("cone weight needs beta")
        if b > 1 + 1e-12:
            raise ValueError("cone weight is only defined on [0, 1]")
        b = min(b, 1.0)
    wfn = _weight_fn(weight, beta)

    total = 0.0
    if b > r_max:
        if tail is not None:
            lo = max(a, r_max)
            if weight == "r2":
                total += tail.times_power(2).integral(lo, b)
            elif weight == "cone":
                raise ValueError("cone weight cannot reach past the grid with a tail")
            else:
                total += tail.integral(lo, b)
        b = r_max
        if a >= b:
            return total

    # trim identically-zero outer part of compact data; this also makes the
    # singular cone weight harmless when the data vanish near r = 1
    if tail is None:
        nz = np.flatnonzero(f != 0.0)
        if nz.size == 0:
            return total
        edge = (nz[-1] + 2) * dr
        if edge < b:
            b = edge
            if a >= b:
                return total

    singular = weight == "cone" and beta < 0 and b > 1 - 2.5 * dr
    if singular and beta <= -1:
        raise ValueError(
            f"weight (1-r^2)^{beta} is not integrable against data that do not vanish near r = 1")
    c = b
    if singular:
        # Simpson stays where the weight is tame; the rest is graded
        c = max(np.floor(0.75 / dr) * dr, a)

    fw = lambda x: interpolate(f, dr, x) * wfn(x)
    if c > a:
        i0 = int(np.ceil(a / dr - 1e-9))
        i1 = int(np.floor(c / dr + 1e-9))
        if i1 - i0 >= 2:
            r = np.arange(i0, i1 + 1) * dr
            total += simpson(f[i0:i1 + 1] * wfn(r), dx=dr)
            total += _gauss(fw, a, i0 * dr) + _gauss(fw, i1 * dr, c)
        else:
            k = max(1, int(np.ceil((c - a) / dr)))
            edges = np.linspace(a, c, k + 1)
            total += sum(_gauss(fw, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    if singular:
        total += _graded(f, dr, wfn, c, b, beta, b == 1.0)
    return total


def _graded(f, dr, wfn, c, b, beta, to_one, floor=1e-10):
    """Geometric subdivision of [c, b] toward the singular endpoint."""
    fw = lambda x: interpolate(f, dr, x) * wfn(x)
    total = 0.0
    lo = c
    width = b - c
    while width > floor:
        width *= 0.5
        hi = b - width
        m = int(np.ceil((hi - lo) / dr - 1e-9))
        edges = np.linspace(lo, hi, m + 1)
        total += sum(_gauss(fw, x0, x1) for x0, x1 in zip(edges[:-1], edges[1:]))
        lo = hi
    if to_one:
        # last sliver: (1-r)^beta (1+r)^beta r^2 ~ 2^beta (1-r)^beta
        total += float(interpolate(f, dr, np.array([1.0]))[0]) * 2.0 ** beta \
            * width ** (beta + 1) / (beta + 1)
    else:
        total += _gauss(fw, lo, b)
    return total


def quadrature(f: RadialProfile, weight="1", a=0.0, b=None, beta=None) -> float:
    """Integral of a profile against 1, r^2 or (1-r^2)^beta r^2 over [a, b]."""
    return integrate_values(f.values, f.grid.dr, weight, a, b, beta, f.tail)


# ---------------------------------------------------------------------------
# sine transform and Sobolev norms

def _check_origin(v, tol=1e-8):
    scale = np.max(np.abs(v)) if v.size else 0.0
    if abs(v[0]) > tol * max(scale, 1e-300) and abs(v[0]) > 1e-300:
        raise ValueError(f"v(0) = {v[0]:.3e} is not zero; the odd extension is invalid")


def sine_transform(v: RadialProfile, xi=None, pad: int = 1):
    """V(xi) = int_0^inf v(r) sin(xi r) dr.

    Without ``xi`` the transform is taken with a type-I DST on the natural
    frequency grid xi_k = k*pi/(pad*r_max) and returned as a profile on that
    grid.  With an explicit ``xi`` array, V is evaluated there by direct
    trapezoidal summation and an array is returned.
    """
    vals = v.values
    _check_origin(vals)
    dr = v.grid.dr
    if xi is not None:
        xi = np.asarray(xi, dtype=float)
        w = np.full(vals.size, dr)
        w[-1] *= 0.5
        out = np.empty(xi.shape)
        flat = xi.ravel()
        for k0 in range(0, flat.size, 256):
            blk = flat[k0:k0 + 256]
            out.ravel()[k0:k0 + 256] = np.sin(np.outer(blk, v.r)) @ (w * vals)
        return out
    scale = np.max(np.abs(vals))
    if abs(vals[-1]) > 1e-6 * max(scale, 1e-300):
        raise ValueError("v does not decay at the grid edge; enlarge r_max")
    m = (v.grid.n - 1) * int(pad)
    body = np.zeros(m - 1)
    body[:vals.size - 2] = vals[1:-1]
    V = np.zeros(m)
    if m > 1:
        V[1:] = 0.5 * dr * dst(body, type=1)
    xi_grid = RadialGrid(np.pi * (m - 1) / (m * dr), m)
    return RadialProfile(xi_grid, V, Compact(xi_grid.r_max))


def hdot_norm(f: RadialProfile, s: float, pad: int = 1, tail_fraction: float = 0.01) -> float:
    """Homogeneous Sobolev norm N_s(f) of a radial function.

    N_s(f)^2 = (2/pi) int xi^(2s) V(xi)^2 dxi with V the sine transform of r*f.
    Raises UnderResolvedError when more than ``tail_fraction`` of the sum comes
    from the upper half of the frequency range.
    """
    if not 0 <= s <= 2:
        raise ValueError("s must lie in [0, 2]")
    v = f.with_values(f.r * f.values)
    ft = sine_transform(v, pad=pad)
    xi, V = ft.r, ft.values
    dens = xi[1:] ** (2 * s) * V[1:] ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    upper = dens[xi[1:] > 0.5 * xi[-1]].sum()
    if upper > tail_fraction * total:
        raise UnderResolvedError(
            f"N_{s:g}: {upper / total:.2%} of the spectral mass lies above xi_max/2 = "
            f"{0.5 * xi[-1]:.3g}; refine the grid")
    return float(np.sqrt(2.0 / np.pi * total * ft.grid.dr))


# ---------------------------------------------------------------------------
# elementary radial identities

def exterior_identity(u0: RadialProfile, r0: float):
    """Both sides of int_{r0}^inf u_r^2 r^2 dr = int_{r0}^inf v_r^2 dr + r0 u(r0)^2, v = r u."""
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    dr = u0.grid.dr
    du = derivative(u0.values, dr)
    tail = u0.tail
    lhs_tail = (tail.derivative() * tail.derivative()) if tail is not None else None
    lhs = integrate_values(du * du, dr, "r2", r0, None, tail=lhs_tail)
    dv = derivative(u0.r * u0.values, dr)
    rhs_tail = None
    if tail is not None:
        vt = tail.times_power(1).derivative()
        rhs_tail = vt * vt
    rhs = integrate_values(dv * dv, dr, "1", r0, None, tail=rhs_tail)
    rhs += r0 * float(u0(np.array([r0]))[0]) ** 2
    return float(lhs), float(rhs)


def strauss_ratio(f: RadialProfile, pad: int = 1) -> float:
    """sup_r sqrt(r)|f(r)| / N_1(f); at most 1 in the radial convention."""
    n1 = hdot_norm(f, 1.0, pad=pad)
    if n1 == 0:
        raise ValueError("N_1(f) vanishes; the ratio is undefined")
    r = f.r[1:]
    return float(np.max(np.sqrt(r) * np.abs(f.values[1:])) / n1)


def psi_truncate(f: RadialProfile, g: RadialProfile, R: float):
    """Freeze f at f(R) and zero g inside the ball of radius R."""
    if not 0 < R <= f.grid.r_max:
        raise ValueError("R must lie inside the grid")
    fR = float(f(np.array([R]))[0])
    r = f.r
    ft = np.where(r <= R, fR, f.values)
    gt = np.where(r < R, 0.0, g.values)
    return RadialProfile(f.grid, ft, f.tail), RadialProfile(g.grid, gt, g.tail)


def exterior_smallness(u0: RadialProfile, u1: RadialProfile, r0: float, p: float) -> float:
    """r0^(-(p-5)/(p-1)) int_{r0}^inf (u0_r^2 + u1^2) r^2 dr."""
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    dr = u0.grid.dr
    du = derivative(u0.values, dr)
    t0 = u0.tail.derivative() if u0.tail is not None else None
    e = integrate_values(du * du, dr, "r2", r0, None, tail=(t0 * t0) if t0 else None)
    t1 = u1.tail
    e += integrate_values(u1.values ** 2, u1.grid.dr, "r2", r0, None,
                          tail=(t1 * t1) if t1 else None)
    return float(r0 ** (-(p - 5) / (p - 1)) * e)


# ---------------------------------------------------------------------------
# smooth building blocks

def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    y = 1.0 - x
    b = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    return a / (a + b)


def bump(x):
    """C-infinity bump supported on (-1, 1) with bump(0) = 1."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    xs = np.where(inside, x, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - xs * xs)), 0.0)


def random_bump_profile(rng: np.random.Generator, grid: RadialGrid, support=1.0,
                        max_terms=3) -> RadialProfile:
    """Sum of 1 to ``max_terms`` random smooth bumps inside (0, support).

    Every bump stays away from the origin, so the result also serves as v = r*u.
    """
    r = grid.r
    out = np.zeros(grid.n)
    for _ in range(rng.integers(1, max_terms + 1)):
        width = rng.uniform(0.08, 0.35) * support
        centre = rng.uniform(width, support - width)
        out += rng.normal() * bump((r - centre) / width)
    return RadialProfile(grid, out)

"""Radial numerics for the model equation on balls and annuli.

Profiles are node/value pairs on a strictly increasing radial grid.  The
radial m-Laplacian of u(r) is evaluated in expanded form

    Δ_m u = Φ'(r) + (N-1) Φ(r) / r,       Φ = |u'|^(m-2) u',

with Φ' obtained from five-point finite-difference stencils (fourth order
on smooth interiors).  Stencils for interior targets avoid the outermost
node at each end, where Dirichlet data is allowed to be non-smooth.

The inverse operator T(v) (the radial solution of -Δ_m w = v, w(R) = 0,
w'(0) = 0) is computed from the first integral

    w(r) = ∫_r^R (F(s)/s^(N-1))^(1/(m-1)) ds,   F(s) = ∫_0^s t^(N-1) v(t) dt,

using a product-trapezoid rule that integrates s^w * (linear) exactly on
every cell, so constant sources invert to their closed form up to
rounding.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import fsolve

from .errors import DomainError, NonConvergence
from .params import ProblemParams, subcritical_margin

__all__ = [
    "OVERFLOW_CAP",
    "RadialGrid",
    "RadialProfile",
    "uniform_grid",
    "boundary_layer_grid",
    "solve_grid",
    "fornberg_weights",
    "first_derivative",
    "cumulative_power_trapezoid",
    "ResidualReport",
    "m_laplacian_residual",
    "invert_T",
    "m_harmonic",
    "p_equals_m_transform",
    "inverse_p_equals_m_transform",
    "singular_profile",
    "BubbleFit",
    "fit_explicit_bubble",
    "BlowupReport",
    "blowup_shoot",
    "rescale_blowup",
]

OVERFLOW_CAP = 1.0e12
_DEGENERATE_GRAD = 1.0e-10


# --------------------------------------------------------------------------
# grids and profiles


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial nodes; ``R`` is the outer radius."""

    nodes: np.ndarray
    R: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 16:
            raise DomainError("grid needs at least 16 nodes, got %d" % nodes.size)
        if not np.all(np.isfinite(nodes)):
            raise DomainError("grid nodes must be finite")
        if nodes[0] < 0.0:
            raise DomainError("grid must start at r >= 0, got %g" % nodes[0])
        if not np.all(np.diff(nodes) > 0.0):
            raise DomainError("grid nodes must be strictly increasing")
        if nodes[-1] > self.R * (1.0 + 1e-12):
            raise DomainError("grid exceeds its declared radius R=%g" % self.R)

    @property
    def n(self) -> int:
        return self.nodes.size


def uniform_grid(R: float, n: int = 2048, r_min: float = 0.0) -> RadialGrid:
    if not (R > r_min >= 0.0):
        raise DomainError("need 0 <= r_min < R, got r_min=%g, R=%g" % (r_min, R))
    return RadialGrid(nodes=np.linspace(r_min, R, n), R=R)


def boundary_layer_grid(R: float, n: int = 2048, d_min: float = 1e-9,
                        max_ratio: float = 1.05) -> RadialGrid:
    """Grid on [0, R] log-spaced in the boundary distance d = R - r.

    The innermost boundary distance is clamped to R*1e-12 so r = R - d
    stays resolvable in double precision; n is raised if needed to keep
    the geometric ratio at or below ``max_ratio``.
    """
    if not (R > 0.0):
        raise DomainError("R must be positive")
    d_min = max(d_min, R * 1e-12)
    if d_min >= R:
        raise DomainError("d_min=%g must be below R=%g" % (d_min, R))
    need = int(math.ceil(math.log(R / d_min) / math.log(max_ratio))) + 2
    n = max(n, need)
    d = np.geomspace(R, d_min, n - 1)
    nodes = np.concatenate([R - d, [R]])
    nodes[0] = 0.0
    return RadialGrid(nodes=nodes, R=R)


def solve_grid(R: float, n: int = 2048, tail_frac: float = 0.05,
               tail_rel_min: float = 1e-5, tail_share: float = 0.3) -> RadialGrid:
    """Solver grid: uniform on [0, (1-tail_frac) R], geometric toward r = R.

    The clustered tail resolves the boundary layer where sources of the
    form u^q |u'|^p with q < 1 lose smoothness at the Dirichlet boundary.
    Nodes are built on [0, 1] and scaled by R, so grids for different R
    are exact rescalings of each other.
    """
    if not (R > 0.0):
        raise DomainError("R must be positive")
    if n < 64:
        raise DomainError("solve grid needs n >= 64")
    nt = max(48, int(tail_share * n))
    ni = n - nt
    interior = np.linspace(0.0, 1.0 - tail_frac, ni)
    ratio = (tail_rel_min / tail_frac) ** (1.0 / (nt - 1))
    d = tail_frac * ratio ** np.arange(1, nt)
    unit = np.concatenate([interior, 1.0 - d, [1.0]])
    return RadialGrid(nodes=R * unit, R=R)


@dataclass(frozen=True)
class RadialProfile:
    """Radial function samples, optionally with an exact derivative.

    Closed-form constructors attach ``du`` analytically; generic profiles
    fall back to centered second-order differences.  Values must be finite
    and nonnegative unless ``meta['allow_blowup']`` is set.
    """

    grid: RadialGrid
    values: np.ndarray
    du: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.nodes.shape:
            raise DomainError("profile values do not match the grid")
        allow = bool(self.meta.get("allow_blowup", False))
        if not allow:
            if not np.all(np.isfinite(values)):
                raise DomainError("profile values must be finite")
            if np.min(values) < -1e-12 * max(1.0, float(np.max(np.abs(values)))):
                raise DomainError("profile values must be nonnegative")
        if self.du is not None:
            du = np.asarray(self.du, dtype=float)
            object.__setattr__(self, "du", du)
            if du.shape != values.shape:
                raise DomainError("stored derivative does not match the grid")

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def derivative(self) -> np.ndarray:
        if self.du is not None:
            return self.du
        return np.gradient(self.values, self.grid.nodes)

    def interp(self, radii: np.ndarray) -> np.ndarray:
        return np.interp(radii, self.grid.nodes, self.values)

    def without_stored_derivative(self) -> "RadialProfile":
        return dataclasses.replace(self, du=None)


# --------------------------------------------------------------------------
# finite differences


def fornberg_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Weights w with f^(order)(x0) ~= w @ f(x) for arbitrary nodes x."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def first_derivative(nodes: np.ndarray, values: np.ndarray,
                     stencil: int = 5) -> np.ndarray:
    """First derivative by sliding 5-point stencils (4th order interior).

    For interior targets the stencil is drawn from nodes[1:-1]; the two
    boundary nodes only ever appear in the stencils of their own
    neighbourhood.  This keeps interior accuracy when the data loses
    smoothness exactly at an endpoint (e.g. Dirichlet boundaries of
    sources with sublinear zero-order terms).
    """
    x = np.asarray(nodes, dtype=float)
    f = np.asarray(values, dtype=float)
    n = x.size
    if n < stencil + 2:
        raise DomainError("need at least %d nodes for the derivative" % (stencil + 2))
    out = np.empty(n)
    half = stencil // 2
    for i in range(n):
        if 2 <= i <= n - 3:
            j0 = min(max(i - half, 1), (n - 2) - (stencil - 1))
        else:
            j0 = min(max(i - half, 0), n - stencil)
        sl = slice(j0, j0 + stencil)
        w = fornberg_weights(x[sl], x[i], 1)
        out[i] = float(w @ f[sl])
    return out


def cumulative_power_trapezoid(nodes: np.ndarray, f: np.ndarray,
                               weight_pow: float) -> np.ndarray:
    """Cumulative ∫ s^w f(s) ds with f piecewise linear, cellwise exact.

    Each cell integrates s^w times the linear interpolant in closed form,
    so any f that is linear on every cell (in particular any constant) is
    integrated exactly.  Requires w > -1 when the grid starts at 0.
    """
    r = np.asarray(nodes, dtype=float)
    f = np.asarray(f, dtype=float)
    w = float(weight_pow)
    if r[0] == 0.0 and w <= -1.0:
        raise DomainError("weight power must exceed -1 on grids reaching r=0")
    a, b = r[:-1], r[1:]
    fa, fb = f[:-1], f[1:]
    p1 = (b ** (w + 1.0) - a ** (w + 1.0)) / (w + 1.0)
    p2 = (b ** (w + 2.0) - a ** (w + 2.0)) / (w + 2.0)
    # f_lin = fa + (fb-fa)(s-a)/(b-a):  cell = fa*p1 + (fb-fa)*(p2 - a*p1)/(b-a)
    cells = fa * p1 + (fb - fa) * (p2 - a * p1) / (b - a)
    out = np.empty_like(r)
    out[0] = 0.0
    np.cumsum(cells, out=out[1:])
    return out


# --------------------------------------------------------------------------
# the radial m-Laplacian residual


def _phi_of(du: np.ndarray, m: float):
    """Φ = |u'|^(m-2) u', regularised where 1 < m < 2 meets u' ~ 0."""
    adu = np.abs(du)
    if m == 2.0:
        return du.copy(), 0
    if m > 2.0:
        return adu ** (m - 2.0) * du, 0
    tiny = adu < _DEGENERATE_GRAD
    n_deg = int(np.count_nonzero(tiny))
    reg = (adu * adu + _DEGENERATE_GRAD ** 2) ** (0.5 * (m - 2.0)) * du
    raw = np.where(tiny, 1.0, adu) ** (m - 2.0) * du
    return np.where(tiny, reg, raw), n_deg


def _phi_inv(F, m: float):
    """Inverse of Φ: u' = sign(F) |F|^(1/(m-1))."""
    return np.sign(F) * np.abs(F) ** (1.0 / (m - 1.0))


@dataclass(frozen=True)
class ResidualReport:
    values: np.ndarray
    window: tuple
    max_abs_residual: float
    l2_residual: float
    n_degenerate: int
    n_excluded: int


def m_laplacian_residual(profile: RadialProfile, params: ProblemParams,
                         source: Optional[np.ndarray] = None) -> ResidualReport:
    """Residual of -Δ_m u = source (default source: u^q |u'|^p).

    Evaluated on the interior window that excludes the two outermost nodes
    at each end; nodes at or beyond the overflow cap are excluded from the
    max/l2 statistics.  Second-order convergence for generic profiles
    (finite-difference derivative), fourth-order when an exact derivative
    is stored.
    """
    r = profile.grid.nodes
    u = profile.values
    n = r.size
    m, N = params.m, params.N
    du = profile.derivative()
    phi, n_deg = _phi_of(du, m)
    dphi = first_derivative(r, phi)
    lap = np.empty(n)
    pos = r > 0.0
    lap[pos] = dphi[pos] + (N - 1.0) * phi[pos] / r[pos]
    # at r=0 symmetric profiles have Φ(0)=0 and Δ_m u -> N Φ'(0)
    lap[~pos] = N * dphi[~pos]
    if source is None:
        u_pos = np.maximum(u, 0.0)
        rhs = u_pos ** params.q * np.abs(du) ** params.p
    else:
        rhs = np.asarray(source, dtype=float)
        if rhs.shape != u.shape:
            raise DomainError("source does not match the grid")
    res = -lap - rhs
    i0, i1 = 2, n - 2
    window = res[i0:i1]
    ok = np.isfinite(window) & (np.abs(u[i0:i1]) < OVERFLOW_CAP)
    n_excluded = int(np.count_nonzero(~ok))
    if not np.any(ok):
        raise DomainError("no valid nodes left in the residual window")
    max_abs = float(np.max(np.abs(window[ok])))
    l2 = float(np.sqrt(np.mean(window[ok] ** 2)))
    return ResidualReport(values=res, window=(i0, i1), max_abs_residual=max_abs,
                          l2_residual=l2, n_degenerate=n_deg, n_excluded=n_excluded)


# --------------------------------------------------------------------------
# the inverse operator T


def invert_T(source: RadialProfile, m: float, N: int) -> RadialProfile:
    """Radial solution of -Δ_m w = v, w'(0) = 0, w(R) = 0, for v >= 0.

    Monotone in the source and order-preserving; the output carries the
    exact quadrature-consistent derivative du = -g where
    g = (F/r^(N-1))^(1/(m-1)).
    """
    if not (m > 1.0):
        raise DomainError("invert_T needs m > 1, got %g" % m)
    if N < 1:
        raise DomainError("invert_T needs N >= 1, got %d" % N)
    r = source.grid.nodes
    if r[0] != 0.0:
        raise DomainError("invert_T needs a grid reaching r = 0")
    v = source.values
    if np.min(v) < -1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise DomainError("invert_T needs a nonnegative source")
    v = np.maximum(v, 0.0)

    def _compute(rr, vv):
        kappa = 1.0 / (m - 1.0)
        F = cumulative_power_trapezoid(rr, vv, N - 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ghat = (F / rr ** N) ** kappa
        ghat[0] = (vv[0] / N) ** kappa
        g = rr ** kappa * ghat
        W = cumulative_power_trapezoid(rr, ghat, kappa)
        w = W[-1] - W
        return w, g

    w, g = _compute(r, v)
    est = math.nan
    if r.size >= 64:
        idx = np.arange(0, r.size, 2)
        if idx[-1] != r.size - 1:
            idx = np.append(idx, r.size - 1)
        w2, _ = _compute(r[idx], v[idx])
        est = float(np.max(np.abs(w2 - w[idx])))
    w[-1] = 0.0
    return RadialProfile(grid=source.grid, values=np.maximum(w, 0.0), du=-g,
                         meta={"quadrature_error_estimate": est})


# --------------------------------------------------------------------------
# closed-form families


def m_harmonic(N: int, m: float, a: float, b: float, r_in: float = 0.5,
               r_out: float = 2.0, n: int = 2048) -> RadialProfile:
    """Annulus m-harmonic v = a + b r^((m-N)/(m-1)) (zero m-Laplacian)."""
    if b != 0.0 and N <= m:
        raise DomainError(
            "the power m-harmonic degenerates for N <= m (log case); "
            "got N=%d, m=%g with b != 0" % (N, m)
        )
    if b != 0.0 and r_in <= 0.0:
        raise DomainError("singular m-harmonic needs r_in > 0")
    grid = uniform_grid(r_out, n=n, r_min=r_in)
    r = grid.nodes
    if b == 0.0:
        vals = np.full_like(r, a)
        du = np.zeros_like(r)
    else:
        e = (m - N) / (m - 1.0)
        vals = a + b * r ** e
        du = b * e * r ** (e - 1.0)
    if np.min(vals) < 0.0:
        raise DomainError("m-harmonic profile dips negative on the annulus")
    return RadialProfile(grid=grid, values=vals, du=du)


def p_equals_m_transform(profile: RadialProfile, m: float, q: float) -> RadialProfile:
    """Forward transform v = ∫_0^u exp(s^(q+1)/((q+1)(m-1))) ds at p = m.

    Maps solutions of -Δ_m u = u^q |grad u|^m to m-harmonic functions.
    The derivative is attached by the chain rule, so accuracy follows the
    input profile's derivative.
    """
    if not (m > 1.0) or q < 0.0:
        raise DomainError("transform needs m > 1 and q >= 0")
    u = profile.values
    if np.min(u) < 0.0:
        raise DomainError("transform needs u >= 0")
    c = (q + 1.0) * (m - 1.0)
    f = lambda s: math.exp(s ** (q + 1.0) / c)
    levels = np.unique(np.concatenate([[0.0], u]))
    acc = 0.0
    table = {0.0: 0.0}
    for lo, hi in zip(levels[:-1], levels[1:]):
        step, _ = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        acc += step
        table[hi] = acc
    v = np.array([table[x] for x in u])
    du = profile.derivative()
    dv = np.exp(np.power(u, q + 1.0) / c) * du
    return RadialProfile(grid=profile.grid, values=v, du=dv,
                         meta={"transform": "p=m forward", "m": m, "q": q})


def inverse_p_equals_m_transform(profile: RadialProfile, m: float,
                                 q: float) -> RadialProfile:
    """Inverse of the p = m transform: recover u from v >= 0.

    u(v) solves du/dv = exp(-u^(q+1)/((q+1)(m-1))), u(0) = 0, integrated
    with a high-order adaptive scheme and evaluated densely at the sample
    values.
    """
    if not (m > 1.0) or q < 0.0:
        raise DomainError("transform needs m > 1 and q >= 0")
    v = profile.values
    if np.min(v) < 0.0:
        raise DomainError("inverse transform needs v >= 0")
    c = (q + 1.0) * (m - 1.0)
    vmax = float(np.max(v))
    if vmax == 0.0:
        u = np.zeros_like(v)
        return RadialProfile(grid=profile.grid, values=u,
                             du=np.zeros_like(v),
                             meta={"transform": "p=m inverse", "m": m, "q": q})
    sol = solve_ivp(lambda t, y: [math.exp(-abs(y[0]) ** (q + 1.0) / c)],
                    (0.0, vmax * (1.0 + 1e-12)), [0.0], method="DOP853",
                    dense_output=True, rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise NonConvergence("inverse transform integration failed: %s" % sol.message)
    u = sol.sol(v)[0]
    u = np.maximum(u, 0.0)
    dv = profile.derivative()
    du = dv * np.exp(-np.power(u, q + 1.0) / c)
    return RadialProfile(grid=profile.grid, values=u, du=du,
                         meta={"transform": "p=m inverse", "m": m, "q": q})


def singular_profile(params: ProblemParams, r_min: float = 0.1, R: float = 1.0,
                     n: int = 4096):
    """Exact interior singular solution u = A r^(-theta) (supercritical only).

    theta = (m-p)/Q and A^Q = theta^(m-1-p) * K with
    K = N - 1 - (theta+1)(m-1) = -margin/Q, so K > 0 exactly when the
    subcritical margin is negative.  Returns (A, profile).
    """
    N, m, p = params.N, params.m, params.p
    Q = params.Q
    if not (Q > 0.0):
        raise DomainError("singular profile needs Q > 0, got Q=%g" % Q)
    if not (p < m):
        raise DomainError("singular profile needs p < m")
    theta = (m - p) / Q
    K = N - 1.0 - (theta + 1.0) * (m - 1.0)
    if not (K > 0.0):
        raise DomainError(
            "singular profile needs supercritical parameters "
            "(N-1-(theta+1)(m-1) > 0), got %g" % K
        )
    A = (theta ** (m - 1.0 - p) * K) ** (1.0 / Q)
    grid = uniform_grid(R, n=n, r_min=r_min)
    r = grid.nodes
    vals = A * r ** (-theta)
    du = -theta * A * r ** (-theta - 1.0)
    prof = RadialProfile(grid=grid, values=vals, du=du,
                         meta={"family": "interior singular", "A": A,
                               "theta": theta})
    return A, prof


# --------------------------------------------------------------------------
# explicit decaying family in the supercritical regime (m = 2)


@dataclass(frozen=True)
class BubbleFit:
    beta: float
    C: float
    min_residual: float
    feasible: bool
    levels: int


def _bubble_min_residual(N, p, q, beta, C_row, r):
    """min over r of -Δu - u^q |grad u|^p for u = C (1+r^2)^(-beta)."""
    w = 1.0 + r * r
    lhs_shape = 2.0 * beta * w ** (-beta - 2.0) * (N + (N - 2.0 * beta - 2.0) * r * r)
    rhs_shape = w ** (-beta * q) * (2.0 * beta) ** p * r ** p * w ** (-(beta + 1.0) * p)
    # residual(C) = C*lhs_shape - C^(q+p) * rhs_shape, vectorised over C
    res = C_row[:, None] * lhs_shape[None, :] \
        - C_row[:, None] ** (q + p) * rhs_shape[None, :]
    return res.min(axis=1)


def _bubble_residual_at(N, p, q, beta, C, r):
    w = 1.0 + r * r
    lhs = C * 2.0 * beta * w ** (-beta - 2.0) * (N + (N - 2.0 * beta - 2.0) * r * r)
    rhs = C ** (q + p) * (2.0 * beta) ** p * r ** p \
        * w ** (-beta * q - (beta + 1.0) * p)
    return lhs - rhs


def fit_explicit_bubble(params: ProblemParams, C_max: float = 10.0,
                        r_max: float = 20.0, tol: float = 1e-8,
                        grid_size: int = 48, refinements: int = 4) -> BubbleFit:
    """Largest-amplitude decaying supersolution of the form C (1+r^2)^(-beta).

    Scans (beta, C) over (0, N] x (0, C_max], keeps pairs whose pointwise
    residual stays >= -tol on [0, r_max], and picks the feasible pair of
    maximal C (ties broken toward larger beta), refining the grid around
    the winner.  At a supercritical exponent q = alpha with p = 0, m = 2
    the winner is the exact decaying solution.
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    if m != 2.0:
        raise DomainError("explicit bubble family requires m = 2, got m=%g" % m)
    margin = subcritical_margin(params)
    if not (margin < 0.0):
        raise DomainError(
            "explicit bubble family needs supercritical margin < 0, got %g" % margin
        )
    r = np.linspace(0.0, r_max, 2001)
    b_lo, b_hi = 0.0, float(N)
    c_lo, c_hi = 0.0, C_max
    best = None
    levels_done = 0
    for level in range(refinements + 1):
        betas = np.linspace(b_lo, b_hi, grid_size + 1)[1:]
        cs = np.linspace(c_lo, c_hi, grid_size + 1)[1:]
        best_here = None
        fallback = (-math.inf, None)
        for beta in betas:
            mins = _bubble_min_residual(N, p, q, beta, cs, r)
            feas = mins >= -tol
            if np.any(feas):
                j = int(np.flatnonzero(feas)[-1])  # max C
                cand = (cs[j], beta, float(mins[j]))
                if best_here is None or cand[:2] >= best_here[:2]:
                    best_here = cand
            j = int(np.argmax(mins))
            if mins[j] > fallback[0]:
                fallback = (float(mins[j]), (beta, cs[j]))
        levels_done = level + 1
        if best_here is None:
            if best is None:
                beta, C = fallback[1]
                return BubbleFit(beta=float(beta), C=float(C),
                                 min_residual=fallback[0], feasible=False,
                                 levels=levels_done)
            break
        C, beta, mr = best_here
        best = (beta, C, mr)
        db = (b_hi - b_lo) / grid_size
        dc = (c_hi - c_lo) / grid_size
        b_lo, b_hi = max(0.0, beta - 2 * db), min(float(N), beta + 2 * db)
        c_lo, c_hi = max(0.0, C - 2 * dc), min(C_max, C + 2 * dc)
    beta, C, mr = best
    # Newton polish: an exact family member zeroes the residual at every
    # radius, so solving res = 0 at two radii from inside the refined cell
    # recovers it to machine precision.  Accepted only when it stays near
    # the cell and shrinks the sup-residual (inexact families reject it).
    db = 0.5 * (b_hi - b_lo)
    dc = 0.5 * (c_hi - c_lo)
    sol, info, ier, _ = fsolve(
        lambda x: [_bubble_residual_at(N, p, q, x[0], x[1], 0.8),
                   _bubble_residual_at(N, p, q, x[0], x[1], 1.6)],
        [beta, C], full_output=True)
    if ier == 1:
        bb, cc = float(sol[0]), float(sol[1])
        if bb > 0.0 and cc > 0.0 and abs(bb - beta) <= db and abs(cc - C) <= dc:
            old_sup = float(np.max(np.abs(_bubble_residual_at(N, p, q, beta, C, r))))
            new_all = _bubble_residual_at(N, p, q, bb, cc, r)
            new_sup = float(np.max(np.abs(new_all)))
            new_min = float(np.min(new_all))
            if new_sup < old_sup and new_min >= -tol:
                beta, C, mr = bb, cc, new_min
    return BubbleFit(beta=float(beta), C=float(C), min_residual=mr,
                     feasible=True, levels=levels_done)


def bubble_profile(params: ProblemParams, beta: float, C: float,
                   R: float = 10.0, n: int = 2048) -> RadialProfile:
    """Sample u = C (1+r^2)^(-beta) on [0, R] with its exact derivative."""
    grid = uniform_grid(R, n=n)
    r = grid.nodes
    w = 1.0 + r * r
    vals = C * w ** (-beta)
    du = -2.0 * beta * C * r * w ** (-beta - 1.0)
    return RadialProfile(grid=grid, values=vals, du=du,
                         meta={"family": "decaying bubble", "beta": beta, "C": C})


# --------------------------------------------------------------------------
# boundary blow-up (large solutions of the absorption equation)


@dataclass(frozen=True)
class BlowupReport:
    profile: RadialProfile
    fitted_theta: float
    theta_predicted: float
    amplitude_predicted: float
    amplitude_fitted: float
    mode: str
    ladder: tuple
    cauchy_gaps: tuple
    fit_r2: float
    fit_window: tuple


def _blowup_rate(params: ProblemParams):
    m, p = params.m, params.p
    Q = params.Q
    theta = (m - p) / Q
    A = (theta ** (m - 1.0 - p) * (m - 1.0) * (theta + 1.0)) ** (1.0 / Q)
    return theta, A


def _absorption_rhs(params: ProblemParams):
    N, m, p, q = params.N, params.m, params.p, params.q

    def rhs(r, y):
        u, phi = y
        g = math.copysign(abs(phi) ** (1.0 / (m - 1.0)), phi)
        f = max(u, 0.0) ** q * abs(g) ** p
        return [g, f - (N - 1.0) * phi / r]

    return rhs


def _shoot_inward(params: ProblemParams, R: float, U: float, theta: float,
                  A: float, grid: RadialGrid) -> RadialProfile:
    """Integrate the absorption equation inward, bisecting the seed flux.

    Valid for p >= m-1.  The asymptote u ~ A (R - r + d0)^(-theta) fixes
    the leading flux at r = R, but its subleading correction (fed by the
    curvature term) is of order one in the conserved quantity, so the raw
    seed crashes through u = 0.  Seeds with too much flux crash; seeds
    with too little collapse their flux early and flatten (a legitimate
    dead-core solution, since the source vanishes with the gradient).
    Bisecting the boundary flux between the two drives the collapse
    radius to the center: the separatrix is the classical large solution.
    """
    m = params.m
    d0 = (A / U) ** (1.0 / theta)
    # leading-order flux of the asymptote u ~ A (R - r + d0)^(-theta)
    g_R = theta * A * d0 ** (-theta - 1.0)
    phi_seed = abs(g_R) ** (m - 1.0)
    rhs = _absorption_rhs(params)
    collapse_level = 1e-13 * phi_seed

    def flux_collapse(r, y):
        return y[1] - collapse_level

    flux_collapse.terminal = True
    flux_collapse.direction = -1.0

    def hits_zero(r, y):
        return y[0]

    hits_zero.terminal = True
    hits_zero.direction = -1.0

    first_pos = grid.nodes[1] if grid.nodes[0] == 0.0 else grid.nodes[0]
    r_stop = 0.5 * first_pos

    def trial(phi_R, dense=False):
        sol = solve_ivp(rhs, (R, r_stop), [U, phi_R], method="LSODA",
                        dense_output=dense, rtol=1e-10,
                        atol=[1e-12 * U, 1e-16 * phi_seed],
                        first_step=min(d0 / 10.0, (R - r_stop) / 10.0),
                        events=[flux_collapse, hits_zero])
        if not sol.success and sol.status != 1:
            raise NonConvergence("inward shooting failed: %s" % sol.message)
        if sol.t_events[1].size > 0:
            return "crash", sol
        if sol.t_events[0].size > 0:
            return "collapse", sol
        # reached r_stop: crash side if the remaining run would drain u
        g_end = abs(_phi_inv(float(sol.y[1, -1]), m))
        if g_end * r_stop > float(sol.y[0, -1]):
            return "crash", sol
        return "through", sol

    phi_hi = 2.0 * phi_seed
    for _ in range(6):
        side, _ = trial(phi_hi)
        if side == "crash":
            break
        phi_hi *= 4.0
    else:
        raise NonConvergence("inward shooting: no crashing seed found")
    phi_lo = 1e-6 * phi_seed
    for _ in range(8):
        side, _ = trial(phi_lo)
        if side != "crash":
            break
        phi_lo *= 0.1
    else:
        raise NonConvergence("inward shooting: no collapsing seed found")

    for _ in range(90):
        mid = 0.5 * (phi_lo + phi_hi)
        if mid == phi_lo or mid == phi_hi:
            break
        side, _ = trial(mid)
        if side == "crash":
            phi_hi = mid
        else:
            phi_lo = mid
    side, sol = trial(phi_lo, dense=True)
    if side == "crash":
        raise NonConvergence("inward shooting lost its bracket")
    r_end = float(sol.t[-1])
    r = grid.nodes
    vals = np.empty_like(r)
    dus = np.empty_like(r)
    inside = r <= r_end
    vals[inside] = float(sol.y[0, -1])
    dus[inside] = 0.0
    ys = sol.sol(r[~inside])
    vals[~inside] = ys[0]
    dus[~inside] = _phi_inv(ys[1], m)
    vals[-1] = U
    return RadialProfile(grid=grid, values=vals, du=dus,
                         meta={"mode": "inward", "d0": d0, "U": U,
                               "phi_R": phi_lo, "core_radius": r_end})


def _shoot_center(params: ProblemParams, R: float, U: float,
                  grid: RadialGrid) -> RadialProfile:
    """Shoot from the center, bisecting u(0) so that u(R) = U.

    For p < m-1 the inward problem is ill posed (the gradient equation is
    not Lipschitz from the boundary side) but the center value
    parametrises solutions monotonically; near r = 0 the local expansion
    u = c + kappa r^gamma with gamma = 1 + 1/(m-1-p) seeds the integrator.
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    gamma = 1.0 + 1.0 / (m - 1.0 - p)
    rhs = _absorption_rhs(params)
    r0 = 1e-4 * R

    def seed(c):
        kg = (c ** q / (N - 1.0 + (gamma - 1.0) * (m - 1.0))) ** (1.0 / (m - 1.0 - p))
        kappa = kg / gamma
        u0 = c + kappa * r0 ** gamma
        g0 = kappa * gamma * r0 ** (gamma - 1.0)
        return [u0, abs(g0) ** (m - 1.0) * (1.0 if g0 >= 0 else -1.0)]

    def reach(r, y):
        return y[0] - U

    reach.terminal = True
    reach.direction = 1.0

    def endpoint(c, dense=False):
        sol = solve_ivp(rhs, (r0, R), seed(c), method="LSODA",
                        dense_output=dense, rtol=1e-10, atol=1e-12 * max(c, 1.0),
                        events=[reach])
        if sol.t_events[0].size > 0 and sol.t_events[0][0] < R * (1.0 - 1e-12):
            return math.inf, sol
        if not sol.success and sol.status != 1:
            raise NonConvergence("center shooting failed: %s" % sol.message)
        return float(sol.y[0, -1]), sol

    c_hi = 1.0
    for _ in range(200):
        val, _ = endpoint(c_hi)
        if val >= U:
            break
        c_hi *= 2.0
    else:
        raise NonConvergence("center shooting: no overshoot up to c=%g" % c_hi)
    c_lo = c_hi / 2.0
    while True:
        val, _ = endpoint(c_lo)
        if val < U:
            break
        c_lo /= 2.0
        if c_lo < 1e-280:
            raise NonConvergence("center shooting: no undershoot bracket")
    for _ in range(90):
        c_mid = 0.5 * (c_lo + c_hi)
        if c_mid == c_lo or c_mid == c_hi:
            break
        val, _ = endpoint(c_mid)
        if val >= U:
            c_hi = c_mid
        else:
            c_lo = c_mid
    _, sol = endpoint(c_lo, dense=True)
    r = grid.nodes
    vals = np.empty_like(r)
    dus = np.empty_like(r)
    small = r < r0
    kg = (c_lo ** q / (N - 1.0 + (gamma - 1.0) * (m - 1.0))) ** (1.0 / (m - 1.0 - p))
    kappa = kg / gamma
    vals[small] = c_lo + kappa * r[small] ** gamma
    dus[small] = kappa * gamma * r[small] ** max(gamma - 1.0, 0.0)
    r_top = float(sol.t[-1])
    mid = (~small) & (r <= r_top)
    ys = sol.sol(r[mid])
    vals[mid] = ys[0]
    dus[mid] = _phi_inv(ys[1], m)
    tail = r > r_top
    if np.any(tail):
        vals[tail] = float(sol.y[0, -1])
        dus[tail] = _phi_inv(float(sol.y[1, -1]), m)
    return RadialProfile(grid=grid, values=vals, du=dus,
                         meta={"mode": "center", "c": c_lo, "U": U})


def blowup_shoot(params: ProblemParams, R: float = 1.0,
                 boundary_ladder=(1e2, 1e3, 1e4), n: int = 2048,
                 cauchy_tol: float = 1e-3) -> BlowupReport:
    """Realise the boundary blow-up family of Δ_m u = u^q |grad u|^p on B_R.

    Blow-up at the boundary requires the absorption orientation (diffusion
    and the mixed power on the same side); the source orientation admits no
    radial profile diverging at r = R.  The expected rate is
    u ~ A (R-r)^(-theta) with theta = (m-p)/Q and
    A^Q = theta^(m-1-p) (m-1)(theta+1).

    A ladder of Dirichlet data u(R) = U_k realises the family; interior
    values must be monotone and Cauchy along the ladder (the hallmark of a
    genuine limiting large solution), otherwise NonConvergence is raised.
    The fitted decay exponent comes from a log-log fit of u against R - r
    in a window clear of both the data offset and the interior.

    Ladder guidance for the inward mode: the separatrix integration
    amplifies local error by roughly (R/d0)^2 with d0 = (A/U)^(1/theta),
    so interior values lose accuracy once d0 drops below about
    sqrt(rtol) * R ~ 1e-5 R.  Keep the top rung below that scale.
    """
    m, p = params.m, params.p
    Q = params.Q
    if not (p < m):
        raise DomainError("blow-up family needs p < m, got p=%g, m=%g" % (p, m))
    if not (Q > 0.0):
        raise DomainError(
            "blow-up rate undefined: needs p + q > m - 1 (Q > 0), got Q=%g" % Q
        )
    ladder = tuple(float(U) for U in boundary_ladder)
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise DomainError("boundary ladder must be increasing with >= 2 rungs")
    if not (R > 0.0):
        raise DomainError("R must be positive")

    theta, A = _blowup_rate(params)
    d0_last = (A / ladder[-1]) ** (1.0 / theta)
    grid = boundary_layer_grid(R, n=n, d_min=max(d0_last / 10.0, R * 1e-12))
    mode = "inward" if p >= m - 1.0 else "center"

    profiles = []
    for U in ladder:
        if mode == "inward":
            profiles.append(_shoot_inward(params, R, U, theta, A, grid))
        else:
            profiles.append(_shoot_center(params, R, U, grid))

    rc = np.linspace(0.0, 0.9 * R, 256)
    gaps = []
    worst_drop = 0.0
    for a, b in zip(profiles[:-1], profiles[1:]):
        diff = b.interp(rc) - a.interp(rc)
        gaps.append(float(np.max(np.abs(diff))))
        worst_drop = min(worst_drop, float(np.min(diff)))
    scale = 1.0 + float(np.max(np.abs(profiles[-1].interp(rc))))
    if gaps and gaps[-1] > cauchy_tol * scale:
        raise NonConvergence(
            "interior values not Cauchy along the ladder: gaps %s" % (gaps,),
            reports=tuple(gaps),
        )
    if worst_drop < -1e-6 * scale:
        raise NonConvergence(
            "ladder interior values are not monotone in the boundary datum "
            "(largest drop %g)" % worst_drop,
            reports=tuple(gaps),
        )

    last = profiles[-1]
    d = R - last.grid.nodes[:-1]
    uvals = last.values[:-1]
    lo, hi = 50.0 * d0_last, 0.02 * R
    mask = (d >= lo) & (d <= hi) & (uvals > 0.0)
    if np.count_nonzero(mask) < 8:
        lo, hi = 20.0 * d0_last, 0.05 * R
        mask = (d >= lo) & (d <= hi) & (uvals > 0.0)
    if np.count_nonzero(mask) < 8:
        raise NonConvergence("too few nodes in the blow-up fit window")
    x = np.log(d[mask])
    y = np.log(uvals[mask])
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return BlowupReport(
        profile=last, fitted_theta=float(-slope), theta_predicted=theta,
        amplitude_predicted=A, amplitude_fitted=float(math.exp(intercept)),
        mode=mode, ladder=ladder, cauchy_gaps=tuple(gaps), fit_r2=r2,
        fit_window=(float(lo), float(hi)),
    )


def rescale_blowup(profile: RadialProfile, S: float,
                   params: ProblemParams) -> RadialProfile:
    """Exact scaling w(r) = u(M r)/S with M = S^(Q/(p-m)).

    The scaling symmetry of the pure equation: if u solves it, so does w.
    Implemented as exact grid resampling (nodes divided by M), with no
    interpolation.
    """
    if not (S > 0.0):
        raise DomainError("scale factor S must be positive")
    m, p = params.m, params.p
    Q = params.Q
    if p == m:
        raise DomainError("scaling symmetry degenerates at p = m")
    M = S ** (Q / (p - m))
    grid = RadialGrid(nodes=profile.grid.nodes / M, R=profile.grid.R / M)
    du = profile.du * (M / S) if profile.du is not None else None
    meta = dict(profile.meta)
    meta["rescaled"] = {"S": S, "M": M}
    return RadialProfile(grid=grid, values=profile.values / S, du=du, meta=meta)

"""Quantitative checks on radial profiles: Harnack-type ratios, integral
growth laws, and an ODE probe for entire positive solutions.

Everything here consumes profiles produced elsewhere (or synthesized in
tests) and measures; nothing in this module solves the Dirichlet problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError
from .params import ProblemParams, derive_exponents
from .radial import RadialProfile, cumulative_power_trapezoid, _phi_inv

__all__ = [
    "sphere_area",
    "harnack_ratio",
    "weak_harnack",
    "ScalingReport",
    "integral_scalings",
    "LiouvilleLeg",
    "SlopeProbe",
    "LiouvilleProbeReport",
    "liouville_probe",
]


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N: 2 pi^(N/2) / Gamma(N/2)."""
    if N < 1:
        raise DomainError("sphere_area needs N >= 1")
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def _range_extrema(profile: RadialProfile, lo: float, hi: float):
    """Max and min of the profile over the radius interval [lo, hi]."""
    r = profile.grid.nodes
    if lo < r[0] - 1e-12 * profile.grid.R or hi > r[-1] * (1.0 + 1e-12):
        raise DomainError(
            "radius interval [%g, %g] leaves the profile domain [%g, %g]"
            % (lo, hi, r[0], r[-1])
        )
    inside = (r >= lo) & (r <= hi)
    samples = [profile.interp(lo), profile.interp(hi)]
    if np.any(inside):
        vals = profile.values[inside]
        samples.append(float(np.max(vals)))
        samples.append(float(np.min(vals)))
        return max(samples), min(samples)
    return max(samples), min(samples)


def harnack_ratio(profile: RadialProfile, R: float, lam: float,
                  m: float = 2.0, center: float = 0.0) -> float:
    """sup_{B_R(c)} u / (inf_{B_R(c)} u + R^m lam) for a radial u.

    On a radial profile the ball B_R(c) with |c| = center sweeps the radius
    interval [max(0, center - R), center + R].  The profile must be
    positive on the doubled ball B_2R(c), which must itself stay inside the
    profile's domain.  The additive R^m lam term is what makes the ratio
    scale-invariant for sources of size lam.
    """
    if not (R > 0.0):
        raise DomainError("harnack_ratio needs R > 0")
    if lam < 0.0:
        raise DomainError("harnack_ratio needs lam >= 0")
    c = abs(float(center))
    lo2, hi2 = max(0.0, c - 2.0 * R), c + 2.0 * R
    sup2, inf2 = _range_extrema(profile, lo2, hi2)
    if inf2 <= 0.0:
        raise DomainError(
            "profile is not positive on the doubled ball (min %g)" % inf2
        )
    lo, hi = max(0.0, c - R), c + R
    sup, inf = _range_extrema(profile, lo, hi)
    return sup / (inf + R ** m * lam)


def weak_harnack(profile: RadialProfile, R: float, gamma: float,
                 params: ProblemParams) -> float:
    """inf_{B_R} u * R^(N/gamma) / ||u||_{L^gamma(B_2R)}, centered balls.

    The exponent gamma must satisfy 1 <= gamma < N(m-1)/(N-m), the
    integrability ceiling below the critical Sobolev-type index; that
    requires m < N.  The profile's grid must start at the origin and cover
    B_2R.
    """
    dx = derive_exponents(params)
    if dx.m_star is None:
        raise DomainError("weak_harnack needs m < N")
    ceiling = dx.m_star - 1.0
    if not (1.0 <= gamma < ceiling):
        raise DomainError(
            "gamma must lie in [1, %g), got %g" % (ceiling, gamma)
        )
    if not (R > 0.0):
        raise DomainError("weak_harnack needs R > 0")
    r = profile.grid.nodes
    if r[0] > 0.0:
        raise DomainError("weak_harnack needs a grid that reaches r = 0")
    if 2.0 * R > r[-1] * (1.0 + 1e-12):
        raise DomainError("doubled ball leaves the profile domain")
    u = profile.values
    if np.any(u < 0.0):
        raise DomainError("weak_harnack needs a nonnegative profile")
    N = params.N
    mass = cumulative_power_trapezoid(r, u ** gamma, N - 1.0)
    mass_2R = float(np.interp(2.0 * R, r, mass)) * sphere_area(N)
    norm = mass_2R ** (1.0 / gamma)
    _, inf_R = _range_extrema(profile, 0.0, R)
    return inf_R * R ** (N / gamma) / norm


@dataclass(frozen=True)
class ScalingReport:
    radii: tuple
    slopes: tuple
    predicted: tuple
    r_squared: tuple
    well_resolved: bool
    integrals: tuple


def _loglog_fit(x, y):
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    fit = slope * lx + intercept
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), r2


def integral_scalings(profile: RadialProfile, params: ProblemParams,
                      gamma: float, mu: float, radii) -> ScalingReport:
    """Growth exponents of the three structural integrals over B_R.

    I1(R) = ∫ u^gamma, I2(R) = ∫ |grad u|^mu, and
    I3(R) = ∫ u^(gamma - alpha1 - 1) |grad u|^m, all with the radial volume
    weight.  For a profile with the scale-invariant decay u ~ r^(-theta)
    the predicted log-log slopes are N - theta*gamma, N - (theta+1)*mu and
    again N - theta*gamma (the third integral trades gradient weight for
    value weight exactly).  Slopes come from a least-squares line through
    log I(R) at the supplied radii; fits with r^2 below 0.99 mark the
    report as not well resolved.
    """
    dx = derive_exponents(params)
    if dx.alpha1 is None or dx.theta is None:
        raise DomainError("integral scalings need p < m and Q > 0")
    radii = np.asarray(radii, dtype=float)
    if radii.size < 4:
        raise DomainError("need at least 4 radii for a credible fit")
    if np.any(np.diff(radii) <= 0.0) or radii[0] <= 0.0:
        raise DomainError("radii must be positive and strictly increasing")
    if radii[-1] / radii[0] < 10.0 * (1.0 - 1e-12):
        raise DomainError("radii must span at least one decade")
    r = profile.grid.nodes
    if radii[0] < r[0] or radii[-1] > r[-1] * (1.0 + 1e-12):
        raise DomainError("radii leave the profile domain")
    u = profile.values
    if np.any(u <= 0.0):
        raise DomainError("scaling integrals need a positive profile")
    du = profile.derivative()
    N, m = params.N, params.m
    area = sphere_area(N)
    integrands = (
        u ** gamma,
        np.abs(du) ** mu,
        u ** (gamma - dx.alpha1 - 1.0) * np.abs(du) ** m,
    )
    predicted = (
        N - dx.theta * gamma,
        N - (dx.theta + 1.0) * mu,
        N - dx.theta * gamma,
    )
    slopes, r2s, vals = [], [], []
    for f in integrands:
        mass = area * cumulative_power_trapezoid(r, f, N - 1.0)
        at_radii = np.interp(radii, r, mass)
        if np.any(at_radii <= 0.0):
            raise DomainError("an integral vanished at a requested radius")
        slope, r2 = _loglog_fit(radii, at_radii)
        slopes.append(slope)
        r2s.append(r2)
        vals.append(tuple(float(v) for v in at_radii))
    well = all(r2 >= 0.99 for r2 in r2s)
    return ScalingReport(
        radii=tuple(float(x) for x in radii), slopes=tuple(slopes),
        predicted=predicted, r_squared=tuple(r2s), well_resolved=well,
        integrals=tuple(vals),
    )


# --------------------------------------------------------------------------
# entire-solution probe


@dataclass(frozen=True)
class LiouvilleLeg:
    outcome: str
    r_end: float
    u_end: float


@dataclass(frozen=True)
class SlopeProbe:
    slope: float
    outward: Optional[LiouvilleLeg]
    inward: Optional[LiouvilleLeg]
    classification: str


@dataclass(frozen=True)
class LiouvilleProbeReport:
    params: ProblemParams
    r0: float
    R_max: float
    probes: tuple
    all_failed: bool


_U_CAP = 1e8
_FLUX_CAP = 1e16


def _probe_leg(params: ProblemParams, r0: float, u0: float, s0: float,
               r_target: float) -> LiouvilleLeg:
    """Integrate the radial equation from (r0, u0, u' = s0) toward r_target."""
    N, m, p, q = params.N, params.m, params.p, params.q
    phi0 = abs(s0) ** (m - 2.0) * s0 if s0 != 0.0 else 0.0

    def rhs(r, y):
        u, flux = y
        du = _phi_inv(np.asarray([flux]), m)[0]
        uq = max(u, 0.0) ** q
        return [du, -uq * abs(du) ** p - (N - 1.0) * flux / r]

    def hits_zero(r, y):
        return y[0]
    hits_zero.terminal = True
    hits_zero.direction = -1.0

    def unbounded(r, y):
        return y[0] - _U_CAP
    unbounded.terminal = True
    unbounded.direction = 1.0

    def gradient_blowup(r, y):
        return abs(y[1]) - _FLUX_CAP
    gradient_blowup.terminal = True
    gradient_blowup.direction = 1.0

    events = (hits_zero, unbounded, gradient_blowup)
    sol = solve_ivp(rhs, (r0, r_target), [u0, phi0], method="LSODA",
                    rtol=1e-8, atol=1e-10, events=events, dense_output=False)
    if sol.status < 0:
        return LiouvilleLeg(outcome="breakdown", r_end=float(sol.t[-1]),
                            u_end=float(sol.y[0, -1]))
    if sol.status == 1:
        names = ("hits-zero", "unbounded", "gradient-blowup")
        for name, hits in zip(names, sol.t_events):
            if len(hits):
                return LiouvilleLeg(outcome=name, r_end=float(hits[0]),
                                    u_end=float(sol.y[0, -1]))
    return LiouvilleLeg(outcome="clean", r_end=float(sol.t[-1]),
                        u_end=float(sol.y[0, -1]))


def liouville_probe(params: ProblemParams, r0: float = 1.0,
                    slopes=(-1.0, -0.1, 0.1, 1.0),
                    R_max: float = 100.0) -> LiouvilleProbeReport:
    """Shoot the radial equation from u(r0) = 1 with trial slopes.

    Each slope spawns an outward leg (r0 to R_max) and an inward leg
    (r0 down to r0 * 1e-6).  A slope "extends" only if both legs stay
    positive, bounded and integrable; otherwise its classification names
    the first obstruction (hits-zero, unbounded, gradient-blowup or
    breakdown).  An inward leg that stays clean but grows by more than
    1e3 marks the profile singular-at-origin.  Zero slope with p > 0 is
    the constant solution and is classified as such without integrating.
    ``all_failed`` is True when no trial slope extends — the numerical
    shadow of a nonexistence statement, not a proof of one.
    """
    if not (r0 > 0.0):
        raise DomainError("liouville_probe needs r0 > 0")
    if not (R_max > r0):
        raise DomainError("R_max must exceed r0")
    probes = []
    for s in slopes:
        s = float(s)
        if abs(s) < 1e-14 and params.p > 0.0:
            probes.append(SlopeProbe(slope=s, outward=None, inward=None,
                                     classification="constant"))
            continue
        out = _probe_leg(params, r0, 1.0, s, R_max)
        inw = _probe_leg(params, r0, 1.0, s, r0 * 1e-6)
        if out.outcome == "clean" and inw.outcome == "clean":
            if inw.u_end > 1e3:
                cls = "singular-at-origin"
            else:
                cls = "extends"
        elif out.outcome != "clean":
            cls = out.outcome
        else:
            cls = inw.outcome
        probes.append(SlopeProbe(slope=s, outward=out, inward=inw,
                                 classification=cls))
    all_failed = not any(
        pr.classification in ("extends", "constant") for pr in probes
    )
    return LiouvilleProbeReport(params=params, r0=r0, R_max=R_max,
                                probes=tuple(probes), all_failed=all_failed)

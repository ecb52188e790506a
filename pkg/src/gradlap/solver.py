"""Dirichlet solver for the canonical structured source on a ball.

The problem is -Δ_m u = f(u, grad u) + lam on B_R, u = 0 on the boundary,
with the canonical structure

    f(u, grad u) = u^q |grad u|^p + M1 u^alpha1 [+ M2 u^alpha2],

solved by damped fixed-point iteration u <- (1-w) u + w T(f(u) + lam),
where T is the monotone inverse of -Δ_m from the radial module.  The
iteration's divergence for large lam is not a defect: it is the observable
used by the nonexistence probe, which brackets the lambda where solutions
stop being found.  The probe never claims nonexistence, it reports where
no solution was found.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import BracketNotFound, DomainError, NonConvergence, ToleranceError
from .params import ProblemParams, StructureBounds, nonexistence_rate
from .radial import (
    RadialProfile,
    cumulative_power_trapezoid,
    invert_T,
    m_laplacian_residual,
    solve_grid,
)
from .verify import harnack_ratio

__all__ = [
    "TOL_PDE",
    "TOL_FP",
    "K_MAX",
    "DirichletProblem",
    "SolveReport",
    "canonical_source",
    "fixed_point_solve",
    "homotopy_solve",
    "EigenPair",
    "principal_eigenpair",
    "PiconeReport",
    "picone_check",
    "NonexistenceBracket",
    "nonexistence_probe",
]

TOL_PDE = 1e-6
TOL_FP = 1e-10
K_MAX = 500


@dataclass(frozen=True)
class DirichletProblem:
    params: ProblemParams
    bounds: StructureBounds
    lam: float
    R: float = 1.0
    n: int = 2048
    include_alpha2_term: bool = False

    def __post_init__(self):
        if self.lam < 0.0:
            raise DomainError("lam must be nonnegative, got %g" % self.lam)
        if not (self.R > 0.0):
            raise DomainError("R must be positive, got %g" % self.R)
        if self.n < 64:
            raise DomainError("n must be at least 64, got %d" % self.n)
        self.bounds.validate_for(self.params)


def canonical_source(prob: DirichletProblem, profile: RadialProfile) -> np.ndarray:
    """f(u, grad u) + lam, clipped to stay a nonnegative source."""
    b = prob.bounds
    u = np.maximum(profile.values, 0.0)
    du = profile.derivative()
    f = u ** prob.params.q * np.abs(du) ** prob.params.p + b.M1 * u ** b.alpha1
    if prob.include_alpha2_term:
        f = f + b.M2 * u ** b.alpha2
    return np.clip(f, 0.0, None) + prob.lam


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    iterations: int
    lam: float
    profile: RadialProfile
    fp_gap: float
    omega_final: float
    final_residual: Optional[float] = None
    residual_l2: Optional[float] = None
    harnack_ratio: Optional[float] = None
    picone_slack: Optional[float] = None
    positive_interior: Optional[bool] = None
    stage_lambdas: Optional[tuple] = None


def _zero_profile(grid) -> RadialProfile:
    z = np.zeros_like(grid.nodes)
    return RadialProfile(grid=grid, values=z, du=z.copy())


def fixed_point_solve(prob: DirichletProblem, u0: Optional[RadialProfile] = None,
                      omega: float = 0.5, k_max: int = K_MAX,
                      tol_fp: float = TOL_FP,
                      diagnostics: bool = True) -> SolveReport:
    """Damped fixed-point iteration for the Dirichlet problem.

    Cold start: u0 = T(constant lam source) for lam > 0, zero for lam = 0
    (whose fixed point it already is).  The damping omega is halved, at
    most four times, whenever the fixed-point gap ||T(N(u)) - u|| grows.
    Divergence (sup u beyond 1e8) and iteration exhaustion raise
    NonConvergence.  With diagnostics on, the converged profile's PDE
    residual is measured against the final source and must meet TOL_PDE,
    and the Harnack ratio and Picone slack are attached.
    """
    if not (0.0 < omega <= 1.0):
        raise DomainError("damping omega must lie in (0, 1], got %g" % omega)
    grid = solve_grid(prob.R, prob.n)
    m, N = prob.params.m, prob.params.N

    if u0 is None:
        if prob.lam > 0.0:
            const = RadialProfile(grid=grid, values=np.full(grid.n, prob.lam))
            u = invert_T(const, m, N)
        else:
            u = _zero_profile(grid)
    else:
        if u0.grid.n == grid.n and np.array_equal(u0.grid.nodes, grid.nodes):
            u = u0
        else:
            vals = np.interp(grid.nodes, u0.grid.nodes, u0.values)
            u = RadialProfile(grid=grid, values=vals)

    gap_prev = math.inf
    halvings = 0
    gap = math.inf
    iterations = 0
    for k in range(1, k_max + 1):
        iterations = k
        f = canonical_source(prob, u)
        w = invert_T(RadialProfile(grid=grid, values=f), m, N)
        gap = float(np.max(np.abs(w.values - u.values)))
        if gap > gap_prev and halvings < 4:
            omega *= 0.5
            halvings += 1
        vals = (1.0 - omega) * u.values + omega * w.values
        dvals = (1.0 - omega) * u.derivative() + omega * w.derivative()
        u = RadialProfile(grid=grid, values=vals, du=dvals)
        sup = float(np.max(np.abs(vals)))
        if not math.isfinite(sup) or sup > 1e8:
            raise NonConvergence(
                "iteration diverged at lam=%g (sup u = %g after %d steps)"
                % (prob.lam, sup, k),
                iterations=k,
            )
        if gap <= tol_fp * (1.0 + sup):
            break
        gap_prev = gap
    else:
        raise NonConvergence(
            "no fixed point within %d iterations at lam=%g (gap %g)"
            % (k_max, prob.lam, gap),
            iterations=k_max,
        )

    if not diagnostics:
        return SolveReport(converged=True, iterations=iterations, lam=prob.lam,
                           profile=u, fp_gap=gap, omega_final=omega)

    f = canonical_source(prob, u)
    rr = m_laplacian_residual(u, prob.params, source=f)
    if rr.max_abs_residual > TOL_PDE:
        raise ToleranceError(
            "converged iterate misses the PDE tolerance: residual %g > %g "
            "(raise n for this lam=%g)" % (rr.max_abs_residual, TOL_PDE, prob.lam)
        )
    interior = u.values[:-1]
    positive = bool(np.all(interior[1:] > 0.0) and interior[0] >= 0.0
                    and (interior[0] > 0.0 or float(np.max(interior)) == 0.0))
    hr = None
    try:
        hr = harnack_ratio(u, 0.25 * prob.R, prob.lam, m=m)
    except DomainError:
        pass
    eig = principal_eigenpair(N, m, prob.R, prob.n)
    slack = picone_check(f, u, eig).slack
    return SolveReport(
        converged=True, iterations=iterations, lam=prob.lam, profile=u,
        fp_gap=gap, omega_final=omega, final_residual=rr.max_abs_residual,
        residual_l2=rr.l2_residual, harnack_ratio=hr, picone_slack=slack,
        positive_interior=positive,
    )


def homotopy_solve(prob: DirichletProblem, lam0: float,
                   schedule=(1.0, 0.5, 0.25, 0.0), **kwargs) -> SolveReport:
    """Continuation in lam: stage k solves at lam = prob.lam + t_k * lam0.

    Each stage warm-starts from the previous profile; the first stage cold
    starts.  A singleton schedule (0.0,) reproduces fixed_point_solve
    exactly.  Intermediate stages are scaffolding and run without
    diagnostics; only the last stage carries the accuracy contract.  On a
    stage failure the raised NonConvergence carries the stage index and
    the lambdas already completed.
    """
    if len(schedule) == 0:
        raise DomainError("homotopy schedule must be nonempty")
    if lam0 < 0.0:
        raise DomainError("lam0 must be nonnegative, got %g" % lam0)
    stage_lams = tuple(prob.lam + t * lam0 for t in schedule)
    if any(l < 0.0 for l in stage_lams):
        raise DomainError("homotopy schedule produced a negative lam")
    final_diagnostics = kwargs.pop("diagnostics", True)
    u = None
    done = []
    rep = None
    for idx, lam_k in enumerate(stage_lams):
        stage = dataclasses.replace(prob, lam=lam_k)
        last = idx == len(stage_lams) - 1
        try:
            rep = fixed_point_solve(stage, u0=u,
                                    diagnostics=final_diagnostics and last,
                                    **kwargs)
        except NonConvergence as exc:
            raise NonConvergence(
                "homotopy stage %d of %d (lam=%g) failed: %s"
                % (idx, len(stage_lams), lam_k, exc),
                iterations=exc.iterations, stage=idx, reports=tuple(done),
            ) from exc
        u = rep.profile
        done.append(lam_k)
    return dataclasses.replace(rep, stage_lambdas=stage_lams)


# --------------------------------------------------------------------------
# principal eigenpair of the radial m-Laplacian


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    profile: RadialProfile
    iterations: int
    rayleigh: float
    power_estimate: float
    residual_max: float
    N: int = 0
    m: float = 0.0


def _weighted_integral(r, f, N):
    return float(cumulative_power_trapezoid(r, f, N - 1.0)[-1])


@lru_cache(maxsize=64)
def _eigen_cached(N: int, m: float, R: float, n: int) -> EigenPair:
    grid = solve_grid(R, n)
    r = grid.nodes
    phi = invert_T(RadialProfile(grid=grid, values=np.ones(grid.n)), m, N)
    phi = RadialProfile(grid=grid, values=phi.values / np.max(phi.values),
                        du=phi.du / np.max(phi.values))
    lam = math.nan
    iterations = 0
    for k in range(1, K_MAX + 1):
        iterations = k
        psi = invert_T(RadialProfile(grid=grid, values=phi.values ** (m - 1.0)),
                       m, N)
        top = float(np.max(psi.values))
        lam_new = top ** (1.0 - m)
        phi = RadialProfile(grid=grid, values=psi.values / top, du=psi.du / top)
        if math.isfinite(lam) and abs(lam_new - lam) <= 1e-10 * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    else:
        raise NonConvergence("eigen iteration did not settle in %d steps" % K_MAX,
                             iterations=K_MAX)
    du = phi.derivative()
    num = _weighted_integral(r, np.abs(du) ** m, N)
    den = _weighted_integral(r, phi.values ** m, N)
    rayleigh = num / den
    if abs(rayleigh - lam) > 1e-3 * abs(rayleigh):
        raise ToleranceError(
            "eigenvalue estimates disagree: rayleigh=%g vs power=%g"
            % (rayleigh, lam)
        )
    probe_params = ProblemParams(N=N, m=m, p=0.0, q=0.0)
    rr = m_laplacian_residual(phi, probe_params,
                              source=rayleigh * phi.values ** (m - 1.0))
    return EigenPair(lambda1=rayleigh, profile=phi, iterations=iterations,
                     rayleigh=rayleigh, power_estimate=lam,
                     residual_max=rr.max_abs_residual, N=N, m=m)


def principal_eigenpair(N: int, m: float, R: float = 1.0, n: int = 4096) -> EigenPair:
    """First Dirichlet eigenpair of -Δ_m on B_R by inverse power iteration.

    phi is normalised to max phi = 1; lambda1 is the Rayleigh quotient of
    the converged iterate, cross-checked against the power-iteration value
    max(psi)^(1-m).  Results are cached per (N, m, R, n); grids for
    different R are exact rescalings, so lambda1 scales as R^(-m) to
    rounding.
    """
    if N < 1:
        raise DomainError("principal_eigenpair needs N >= 1")
    if not (m > 1.0):
        raise DomainError("principal_eigenpair needs m > 1")
    if not (R > 0.0):
        raise DomainError("principal_eigenpair needs R > 0")
    return _eigen_cached(int(N), float(m), float(R), int(n))


@dataclass(frozen=True)
class PiconeReport:
    slack: float
    lhs: float
    rhs: float


def picone_check(h: np.ndarray, u: RadialProfile, eig: EigenPair) -> PiconeReport:
    """Slack of the Picone-type inequality for -Δ_m u = h with u >= 0.

    slack = lambda1 * ∫ phi1^m r^(N-1) dr - ∫ h phi1^m / u^(m-1) r^(N-1) dr,
    the ratio taken on {u > 0} (and zero elsewhere).  Nonnegative slack is
    the necessary condition a genuine solution must satisfy; equality holds
    when u is proportional to phi1 and h is the matching eigen-source.
    """
    phi = eig.profile
    if not np.array_equal(phi.grid.nodes, u.grid.nodes):
        raise DomainError("picone_check needs u and phi1 on the same grid")
    h = np.asarray(h, dtype=float)
    if h.shape != u.values.shape:
        raise DomainError("source shape does not match the grid")
    m, N = eig.m, eig.N
    r = u.grid.nodes
    wphi = phi.values ** m
    lhs = eig.lambda1 * _weighted_integral(r, wphi, N)
    pos = u.values > 0.0
    ratio = np.zeros_like(u.values)
    ratio[pos] = h[pos] * wphi[pos] / u.values[pos] ** (m - 1.0)
    rhs = _weighted_integral(r, ratio, N)
    return PiconeReport(slack=lhs - rhs, lhs=lhs, rhs=rhs)


_CEILING_MARGIN = 0.2


@dataclass(frozen=True)
class NonexistenceBracket:
    lambda_lo: float
    lambda_hi: float
    rate_lo: float
    rate_hi: float
    lambda1: float
    consistent: bool
    ceiling_crossed: bool
    ladder: tuple
    converged: tuple


def nonexistence_probe(params: ProblemParams, bounds: StructureBounds,
                       R: float = 1.0, ladder=None, n: int = 2048,
                       jobs: Optional[int] = None) -> NonexistenceBracket:
    """Bracket the lam beyond which the solver stops finding solutions.

    Runs the fixed-point solver up an ascending lam ladder spanning at
    least two decades and returns (last convergent, first divergent).
    This probes, it does not prove: the report says where no solution was
    FOUND.  The sharp coefficient l(lam) = min_t (lam + M1 t^alpha1)/t^(m-1)
    is evaluated at both ends; a genuine solution forces l(lam) below the
    principal eigenvalue, so ``consistent`` records l(lambda_lo) < lambda1.
    ``ceiling_crossed`` records l(lambda_hi) > lambda1 * 1.2: the first
    failing rung violates the necessary condition outright, certifying the
    failure.  The iteration typically stops at its own stability fold
    below that ceiling, so on finely spaced ladders the flag is usually
    False; coarse ladders whose first failing rung jumps past the ceiling
    set it.
    """
    if ladder is None:
        ladder = np.logspace(-2.0, 3.0, 11)
    ladder = tuple(float(x) for x in ladder)
    if len(ladder) < 3:
        raise DomainError("ladder needs at least 3 rungs")
    if any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] <= 0.0:
        raise DomainError("ladder must be positive and strictly increasing")
    if math.log10(ladder[-1] / ladder[0]) < 2.0 - 1e-9:
        raise DomainError("ladder must span at least two decades")

    def attempt(lam):
        prob = DirichletProblem(params=params, bounds=bounds, lam=lam, R=R, n=n)
        try:
            fixed_point_solve(prob, diagnostics=False)
            return True
        except NonConvergence:
            return False

    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            flags = tuple(ex.map(attempt, ladder))
    else:
        flags = tuple(attempt(lam) for lam in ladder)

    first_fail = next((i for i, ok in enumerate(flags) if not ok), None)
    if first_fail is None:
        raise BracketNotFound(
            "solver converged on every rung up to lam=%g; no divergence "
            "bracketed" % ladder[-1],
            reports=flags,
        )
    prior = [i for i in range(first_fail) if flags[i]]
    if not prior:
        raise BracketNotFound(
            "solver failed already at the smallest rung lam=%g" % ladder[0],
            reports=flags,
        )
    lam_lo = ladder[prior[-1]]
    lam_hi = ladder[first_fail]
    b = bounds
    rate_lo = nonexistence_rate(lam_lo, b.M1, b.alpha1, params.m)
    rate_hi = nonexistence_rate(lam_hi, b.M1, b.alpha1, params.m)
    lam1 = principal_eigenpair(params.N, params.m, R, n).lambda1
    return NonexistenceBracket(
        lambda_lo=lam_lo, lambda_hi=lam_hi, rate_lo=rate_lo, rate_hi=rate_hi,
        lambda1=lam1, consistent=bool(rate_lo < lam1),
        ceiling_crossed=bool(rate_hi > lam1 * (1.0 + _CEILING_MARGIN)),
        ladder=ladder, converged=flags,
    )

"""Parameter space of the quasilinear model equation.

The equation under study is

    -div(|grad u|^(m-2) grad u) = u^q |grad u|^p      on R^N or a ball,

with m > 1, p >= 0, q >= 0.  Everything in this module is exponent
arithmetic: the derived exponents that control the analysis, the regime
classification with its inequality certificates, the feasibility scan of
the strip m-1 < p < m, and the power substitutions used to rule out
positive supersolutions in the subcritical range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError

__all__ = [
    "ProblemParams",
    "DerivedExponents",
    "Certificate",
    "RegimeReport",
    "StructureBounds",
    "REGIMES",
    "derive_exponents",
    "classify_liouville",
    "subcritical",
    "subcritical_margin",
    "strong_max_applicable",
    "nonexistence_rate",
    "supersolution_exponent",
    "SubstitutionWitness",
    "admissible_substitution",
    "PREDICATE_NAMES",
    "predicate_values",
    "FeasibilityReport",
    "feasibility_scan",
]


@dataclass(frozen=True)
class ProblemParams:
    """Exponent quadruple (N, m, p, q) of the model equation."""

    N: int
    m: float
    p: float
    q: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise DomainError("dimension N must be an integer, got %r" % (self.N,))
        if self.N < 1:
            raise DomainError("dimension N must satisfy N >= 1, got N=%d" % self.N)
        if not (self.m > 1.0):
            raise DomainError("diffusion exponent must satisfy m > 1, got m=%g" % self.m)
        if not (self.p >= 0.0):
            raise DomainError("gradient exponent must satisfy p >= 0, got p=%g" % self.p)
        if not (self.q >= 0.0):
            raise DomainError("zero-order exponent must satisfy q >= 0, got q=%g" % self.q)
        for name in ("m", "p", "q"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError("%s must be finite" % name)

    @property
    def Q(self) -> float:
        """Combined exponent p + q - m + 1 measuring total nonlinearity."""
        return self.p + self.q - self.m + 1.0


@dataclass(frozen=True)
class DerivedExponents:
    """Derived exponents; entries whose defining condition fails are None.

    ``undefined`` lists the names that could not be formed together with the
    condition that failed, so reports never silently carry a NaN.
    """

    Q: float
    alpha1: Optional[float]
    m_star: Optional[float]
    theta: Optional[float]
    subcritical_margin: float
    undefined: tuple = ()


def derive_exponents(params: ProblemParams) -> DerivedExponents:
    N, m, p, q = params.N, params.m, params.p, params.q
    Q = params.Q
    undefined = []

    if p < m:
        alpha1 = (p + m * q) / (m - p)
    else:
        alpha1 = None
        undefined.append("alpha1 (needs p < m)")

    if m < N:
        m_star = m * (N - 1) / (N - m)
    else:
        m_star = None
        undefined.append("m_star (needs m < N)")

    if Q != 0.0:
        theta = (m - p) / Q
    else:
        theta = None
        undefined.append("theta (needs Q != 0)")

    margin = subcritical_margin(params)
    return DerivedExponents(
        Q=Q,
        alpha1=alpha1,
        m_star=m_star,
        theta=theta,
        subcritical_margin=margin,
        undefined=tuple(undefined),
    )


def subcritical_margin(params: ProblemParams) -> float:
    """N(m-1) - q(N-m) - p(N-1); positive in the subcritical regime."""
    N, m, p, q = params.N, params.m, params.p, params.q
    return N * (m - 1.0) - q * (N - m) - p * (N - 1.0)


def subcritical(params: ProblemParams) -> bool:
    return subcritical_margin(params) > 0.0


def strong_max_applicable(alpha: float, m: float) -> bool:
    """Zero-set dichotomy holds for -Δ_m u + u^alpha ≤ 0 iff alpha >= m - 1.

    For alpha < m - 1 the absorption term is too strong near u = 0 and
    compactly supported nonnegative solutions exist (dead cores), so a
    touching zero no longer forces u ≡ 0.
    """
    if not (alpha > 0.0) or not (m > 1.0):
        raise DomainError("strong_max_applicable needs alpha > 0 and m > 1")
    return alpha >= m - 1.0


# --------------------------------------------------------------------------
# regime classification


@dataclass(frozen=True)
class Certificate:
    """One evaluated inequality: ``lhs op rhs`` with its outcome."""

    name: str
    lhs: float
    rhs: float
    op: str
    passed: bool


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _cert(name: str, lhs: float, op: str, rhs: float) -> Certificate:
    return Certificate(name=name, lhs=float(lhs), rhs=float(rhs), op=op,
                       passed=bool(_OPS[op](lhs, rhs)))


REGIME_P_EQUALS_M = "liouville-p-equals-m"
REGIME_BOUNDED_LARGE_Q = "liouville-bounded-large-q"
REGIME_BOUNDED_SMALL_Q = "liouville-bounded-small-q"
REGIME_SUPERSOLUTION = "liouville-supersolution-subcritical"
REGIME_BUBBLE = "supercritical-bubble"
REGIME_UNCLASSIFIED = "unclassified"

REGIMES = (
    REGIME_P_EQUALS_M,
    REGIME_BOUNDED_LARGE_Q,
    REGIME_BOUNDED_SMALL_Q,
    REGIME_SUPERSOLUTION,
    REGIME_BUBBLE,
    REGIME_UNCLASSIFIED,
)


@dataclass(frozen=True)
class RegimeReport:
    classification: str
    certificates: tuple

    def certificate(self, name: str) -> Certificate:
        for c in self.certificates:
            if c.name == name:
                return c
        raise KeyError(name)


def classify_liouville(params: ProblemParams) -> RegimeReport:
    """Classify (N, m, p, q) into the strongest applicable Liouville regime.

    The regimes are tested in a fixed order and the first hit wins; every
    inequality evaluated along the way is recorded as a certificate, so a
    report is auditable even when the answer is ``unclassified``.  Order:

    1. p = m: entire-solution rigidity for all q >= 0, any N >= 1.
    2. bounded-solution regimes (need N >= 2, p < m, Q > 0):
       a. q >= 1 with Q < 4(m-1)/(N-1),
       b. 0 <= q < 1 with Q < (m-1)(q+1)^2 / (q(N-1))  (no bound at q = 0).
    3. supersolution regime: 1 < m < N with positive subcritical margin.
    4. supercritical: negative margin; an explicit decaying radial family
       exists for m = 2, so no Liouville statement can hold there.
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    Q = params.Q
    margin = subcritical_margin(params)
    certs = []

    certs.append(_cert("p=m", p, "==", m))
    if certs[-1].passed:
        return RegimeReport(REGIME_P_EQUALS_M, tuple(certs))

    certs.append(_cert("N>=2", N, ">=", 2))
    weak_guard = certs[-1].passed
    certs.append(_cert("p<m", p, "<", m))
    weak_guard = weak_guard and certs[-1].passed
    certs.append(_cert("Q>0", Q, ">", 0.0))
    weak_guard = weak_guard and certs[-1].passed

    if weak_guard:
        # branch (a): q >= 1.  The bound q < (m-1)(N+3)/(N-1) is implied by
        # Q < 4(m-1)/(N-1) together with p >= 0; it is recorded anyway.
        certs.append(_cert("q>=1", q, ">=", 1.0))
        large_q = certs[-1].passed
        certs.append(_cert("q<(m-1)(N+3)/(N-1)", q, "<", (m - 1.0) * (N + 3.0) / (N - 1.0)))
        large_q = large_q and certs[-1].passed
        certs.append(_cert("Q<4(m-1)/(N-1)", Q, "<", 4.0 * (m - 1.0) / (N - 1.0)))
        large_q = large_q and certs[-1].passed
        if large_q:
            return RegimeReport(REGIME_BOUNDED_LARGE_Q, tuple(certs))

        certs.append(_cert("q<1", q, "<", 1.0))
        small_q = certs[-1].passed
        bound = math.inf if q == 0.0 else (m - 1.0) * (q + 1.0) ** 2 / (q * (N - 1.0))
        certs.append(_cert("Q<(m-1)(q+1)^2/(q(N-1))", Q, "<", bound))
        small_q = small_q and certs[-1].passed
        if small_q:
            return RegimeReport(REGIME_BOUNDED_SMALL_Q, tuple(certs))

    certs.append(_cert("m<N", m, "<", N))
    super_ok = certs[-1].passed
    certs.append(_cert("subcritical margin>0", margin, ">", 0.0))
    super_ok = super_ok and certs[-1].passed
    if super_ok:
        return RegimeReport(REGIME_SUPERSOLUTION, tuple(certs))

    certs.append(_cert("margin<0", margin, "<", 0.0))
    if certs[-1].passed:
        return RegimeReport(REGIME_BUBBLE, tuple(certs))

    return RegimeReport(REGIME_UNCLASSIFIED, tuple(certs))


# --------------------------------------------------------------------------
# nonexistence rate for the Dirichlet source problem


def nonexistence_rate(lam: float, M1: float, alpha1: float, m: float) -> float:
    """Sharp coefficient l(lam) = min_{t>0} (lam + M1 t^alpha1) / t^(m-1).

    A positive solution of the Dirichlet problem forces lam1 > l(lam), so
    l(lam) growing past lam1 is the mechanism behind nonexistence for large
    lam.  Requires alpha1 > m - 1 (superhomogeneous absorption).
    """
    if lam < 0.0:
        raise DomainError("nonexistence_rate needs lam >= 0, got %g" % lam)
    if not (M1 > 0.0):
        raise DomainError("nonexistence_rate needs M1 > 0, got %g" % M1)
    if not (m > 1.0):
        raise DomainError("nonexistence_rate needs m > 1, got %g" % m)
    if not (alpha1 > m - 1.0):
        raise DomainError(
            "nonexistence_rate needs alpha1 > m-1, got alpha1=%g, m-1=%g"
            % (alpha1, m - 1.0)
        )
    if lam == 0.0:
        return 0.0
    # minimiser of (lam + M1 t^a) t^(1-m):  t* = ((m-1) lam / ((a-m+1) M1))^(1/a)
    t_star = ((m - 1.0) * lam / ((alpha1 - m + 1.0) * M1)) ** (1.0 / alpha1)
    return lam * t_star ** (1.0 - m) * alpha1 / (alpha1 - m + 1.0)


def _nonexistence_rate_bruteforce(lam, M1, alpha1, m):
    """Numerical oracle for the closed form (kept importable for tests)."""
    if lam == 0.0:
        return 0.0
    obj = lambda t: (lam + M1 * t ** alpha1) / t ** (m - 1.0)
    t_star = ((m - 1.0) * lam / ((alpha1 - m + 1.0) * M1)) ** (1.0 / alpha1)
    res = minimize_scalar(obj, bounds=(t_star * 1e-3, t_star * 1e3), method="bounded",
                          options={"xatol": 1e-14})
    return float(res.fun)


# --------------------------------------------------------------------------
# power substitutions u = v^b behind the supersolution regime


def _signed_pow(x: float, e: float) -> float:
    """sign(x) * |x|^e  (the signed power that appears with b^(m-1))."""
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** e, x)


def supersolution_exponent(params: ProblemParams, b: float) -> float:
    """Gradient-integrability exponent alpha produced by u = v^b.

    With s = m - p - 1 + b*Q the substitution turns a positive supersolution
    u into v with  Δ_m v >= c v^s |grad v|^p, and the test-function argument
    bounds grad v in L^alpha_loc with alpha = (2s + p - m + 2)/(s + 1)
    = (m - p + 2bQ)/(m - p + bQ).  Requires (b-1) * b^(m-1) > 0 so the
    substitution preserves the supersolution inequality.
    """
    m, p = params.m, params.p
    Q = params.Q
    if (b - 1.0) * _signed_pow(b, m - 1.0) <= 0.0:
        raise DomainError(
            "substitution exponent must satisfy (b-1)*b^(m-1) > 0 "
            "(b > 1 or b < 0), got b=%g" % b
        )
    den = m - p + b * Q
    if den == 0.0:
        raise DomainError("degenerate substitution: m - p + b*Q = 0 at b=%g" % b)
    return (m - p + 2.0 * b * Q) / den


@dataclass(frozen=True)
class SubstitutionWitness:
    """A concrete substitution certifying the supersolution argument.

    ``b`` is None exactly in the Q = 0 case, where the exponential
    substitution u = exp(v) is used instead and any alpha in
    ``alpha_interval`` works.
    """

    case: str
    b: Optional[float]
    alpha: float
    s: Optional[float]
    alpha_interval: Optional[tuple] = None


def admissible_substitution(params: ProblemParams) -> SubstitutionWitness:
    """Pick a substitution witnessing s > 0, 1 < alpha < N(m-1)/(N-1).

    Case split follows the sign of Q.  For Q > 0 with m >= 2 the witness
    always exists under the subcritical margin; for 1 < m < 2 the available
    prescription (b < min{0, A}) forces alpha < 1 whenever s > 0, so no
    witness of this form exists and a DomainError says so.  For Q < 0 a
    small negative b works iff the cap N(m-1)/(N-1) exceeds 1.
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    Q = params.Q
    if N < 2:
        raise DomainError("admissible_substitution needs N >= 2, got N=%d" % N)
    if not subcritical(params):
        raise DomainError(
            "admissible_substitution needs positive subcritical margin, got %g"
            % subcritical_margin(params)
        )
    alpha_cap = N * (m - 1.0) / (N - 1.0)

    if Q > 0.0:
        if m >= 2.0:
            # alpha(b) increases from alpha(1) = 1 + Q/(q+1) toward 2 as
            # b -> inf; the margin guarantees alpha(1) < alpha_cap.
            alpha_at_1 = 1.0 + Q / (q + 1.0)
            if alpha_cap >= 2.0:
                b = 2.0
            else:
                if alpha_at_1 >= alpha_cap:
                    raise DomainError(
                        "no admissible substitution: case Q>0, m>=2 requires "
                        "1 + Q/(q+1) < N(m-1)/(N-1), got %g >= %g"
                        % (alpha_at_1, alpha_cap)
                    )
                target = 0.5 * (alpha_at_1 + alpha_cap)
                b = (target - 1.0) * (m - p) / (Q * (2.0 - target))
            alpha = supersolution_exponent(params, b)
            s = m - p - 1.0 + b * Q
            if not (s > 0.0 and 1.0 < alpha < alpha_cap):
                raise DomainError(
                    "internal witness check failed in case Q>0, m>=2: "
                    "b=%g, s=%g, alpha=%g, cap=%g" % (b, s, alpha, alpha_cap)
                )
            return SubstitutionWitness(case="Q>0, m>=2", b=b, alpha=alpha, s=s)
        # 1 < m < 2: the prescription is b < min{0, A}, but any such b with
        # s = m-p-1+bQ > 0 gives alpha - 1 = bQ/(s+1) < 0, so the triple
        # (s > 0, alpha > 1, alpha < cap) is unattainable in this form.
        raise DomainError(
            "no admissible substitution in case Q>0, 1<m<2: the negative-b "
            "prescription forces alpha < 1 whenever s > 0"
        )

    if Q < 0.0:
        # b = -eps: s = m-p-1 + b*Q = m-p-1 + eps*|Q| > 0 automatically
        # (Q < 0 and p, q >= 0 force p < m - 1).  alpha -> 1+ as eps -> 0,
        # so a witness exists iff alpha_cap > 1.
        for k in range(1, 60):
            b = -(0.5 ** k)
            s = m - p - 1.0 + b * Q
            if s <= 0.0:
                continue
            alpha = supersolution_exponent(params, b)
            if 1.0 < alpha < alpha_cap:
                return SubstitutionWitness(case="Q<0", b=b, alpha=alpha, s=s)
        raise DomainError(
            "no admissible substitution in case Q<0: requires "
            "N(m-1)/(N-1) > 1 (i.e. m > 2 - 1/N), cap=%g" % alpha_cap
        )

    # Q == 0: exponential substitution u = exp(v); any alpha in
    # (q, min{m, cap}) works.
    lo = q
    hi = min(m, alpha_cap)
    if not (lo < hi):
        raise DomainError(
            "no admissible exponent in case Q=0: interval (q, min(m, cap)) "
            "= (%g, %g) is empty" % (lo, hi)
        )
    alpha = 0.5 * (lo + hi)
    return SubstitutionWitness(
        case="Q=0 exponential substitution",
        b=None,
        alpha=alpha,
        s=None,
        alpha_interval=(lo, hi),
    )


# --------------------------------------------------------------------------
# feasibility scan of the strip m-1 < p < m

PREDICATE_NAMES = (
    "m-1<p<m",
    "m-(p-m+1)N<0",
    "Q>0",
    "subcritical",
    "alpha2-interval",
)


def predicate_values(N: int, m: float, p: float, q: float) -> dict:
    """Evaluate the five scan predicates at a single point."""
    params = ProblemParams(N=N, m=m, p=p, q=q)
    Q = params.Q
    out = {
        "m-1<p<m": (m - 1.0 < p) and (p < m),
        "m-(p-m+1)N<0": m - (p - m + 1.0) * N < 0.0,
        "Q>0": Q > 0.0,
        "subcritical": subcritical(params),
    }
    # the interval (m-1, alpha1*m/(alpha1+1)) for the second structure
    # exponent is nonempty iff alpha1 > m-1, i.e. iff Q > 0 (when p < m)
    if p < m:
        alpha1 = (p + m * q) / (m - p)
        out["alpha2-interval"] = alpha1 > m - 1.0
    else:
        out["alpha2-interval"] = False
    return out


@dataclass(frozen=True)
class FeasibilityReport:
    N: int
    m: float
    resolution: int
    q_max: float
    predicates: tuple
    excluded: tuple
    counts: dict
    pair_counts: dict
    feasible_count: int
    feasible_points: np.ndarray  # shape (k, 2): columns p, q
    empty: bool
    conflicting_pair: Optional[tuple]
    first_fail_counts: dict


def feasibility_scan(N: int, m: float, grid_resolution: int,
                     q_max: Optional[float] = None,
                     exclude: tuple = ()) -> FeasibilityReport:
    """Scan the strip m-1 < p < m, 0 <= q <= q_max on a uniform grid.

    Reports which predicate combinations are satisfiable.  When the full
    conjunction is empty, ``conflicting_pair`` names a pair of predicates
    that are individually well-populated but never hold together, which is
    the usual shape of the obstruction.
    """
    if grid_resolution < 2:
        raise DomainError("grid_resolution must be >= 2")
    if not (m > 1.0):
        raise DomainError("feasibility_scan needs m > 1, got m=%g" % m)
    if N < 1:
        raise DomainError("feasibility_scan needs N >= 1, got N=%d" % N)
    for name in exclude:
        if name not in PREDICATE_NAMES:
            raise DomainError("unknown predicate %r; known: %s"
                              % (name, ", ".join(PREDICATE_NAMES)))
    if q_max is None:
        if m < N:
            q_max = N * (m - 1.0) / (N - m) + 1.0
        else:
            q_max = N * (m - 1.0) + 1.0
    if not (q_max > 0.0):
        raise DomainError("q_max must be positive, got %g" % q_max)

    p_axis = np.linspace(m - 1.0, m, grid_resolution)
    q_axis = np.linspace(0.0, q_max, grid_resolution)
    P, Qm = np.meshgrid(p_axis, q_axis, indexing="ij")
    Qv = P + Qm - m + 1.0

    masks = {}
    masks["m-1<p<m"] = (P > m - 1.0) & (P < m)
    masks["m-(p-m+1)N<0"] = (m - (P - m + 1.0) * N) < 0.0
    masks["Q>0"] = Qv > 0.0
    masks["subcritical"] = (N * (m - 1.0) - Qm * (N - m) - P * (N - 1.0)) > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha1 = (P + m * Qm) / (m - P)
    masks["alpha2-interval"] = (P < m) & (alpha1 > m - 1.0)

    active = tuple(nm for nm in PREDICATE_NAMES if nm not in exclude)
    flat = {nm: masks[nm].ravel() for nm in active}
    counts = {nm: int(flat[nm].sum()) for nm in active}

    all_mask = np.ones(P.size, dtype=bool)
    for nm in active:
        all_mask &= flat[nm]
    feasible_idx = np.flatnonzero(all_mask)
    pts = np.column_stack([P.ravel()[feasible_idx], Qm.ravel()[feasible_idx]])

    pair_counts = {}
    for i, a in enumerate(active):
        for b in active[i + 1:]:
            pair_counts[(a, b)] = int(np.count_nonzero(flat[a] & flat[b]))

    conflicting = None
    if pts.shape[0] == 0:
        dead = [(a, b) for (a, b), c in pair_counts.items()
                if c == 0 and counts[a] > 0 and counts[b] > 0]
        if dead:
            # rank by how well-populated both members are individually
            dead.sort(key=lambda ab: (-min(counts[ab[0]], counts[ab[1]]), ab))
            conflicting = dead[0]

    # first failing predicate, in canonical order, for every failing point
    first_fail = {nm: 0 for nm in active}
    remaining = ~all_mask
    for nm in active:
        hit = remaining & ~flat[nm]
        first_fail[nm] = int(hit.sum())
        remaining &= flat[nm]

    return FeasibilityReport(
        N=N, m=m, resolution=grid_resolution, q_max=float(q_max),
        predicates=active, excluded=tuple(exclude),
        counts=counts, pair_counts=pair_counts,
        feasible_count=int(pts.shape[0]), feasible_points=pts,
        empty=pts.shape[0] == 0, conflicting_pair=conflicting,
        first_fail_counts=first_fail,
    )


# --------------------------------------------------------------------------
# structure bounds for the Dirichlet solver


@dataclass(frozen=True)
class StructureBounds:
    """Coefficients (c0, M1, M2, alpha1, alpha2) of the canonical source

        f(u, grad u) = u^q |grad u|^p + M1 u^alpha1  [+ M2 u^alpha2]

    used by the fixed-point solver.  ``alpha2`` must sit strictly inside
    (m-1, alpha1*m/(alpha1+1)), which is nonempty iff alpha1 > m-1.
    """

    c0: float
    M1: float
    M2: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not (self.c0 >= 1.0):
            raise DomainError("structure constant c0 must satisfy c0 >= 1, got %g" % self.c0)
        if not (self.M1 > 0.0):
            raise DomainError("M1 must be positive, got %g" % self.M1)
        if not (self.M2 >= 0.0):
            raise DomainError("M2 must be nonnegative, got %g" % self.M2)

    def validate_for(self, params: ProblemParams) -> None:
        m = params.m
        if not (self.alpha1 > m - 1.0):
            raise DomainError(
                "alpha1 must exceed m-1 (got alpha1=%g, m-1=%g)" % (self.alpha1, m - 1.0)
            )
        hi = self.alpha1 * m / (self.alpha1 + 1.0)
        if not (m - 1.0 < self.alpha2 < hi):
            raise DomainError(
                "alpha2 must lie in (m-1, alpha1*m/(alpha1+1)) = (%g, %g), got %g"
                % (m - 1.0, hi, self.alpha2)
            )

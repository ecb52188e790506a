"""Discriminant machinery behind the interior gradient estimate.

For bounded solutions the substitution u = v^(-beta) followed by the
Bohn-type rescaling z = |grad v|^2 = v^(-lambda) Y turns the equation into
a differential inequality whose principal part is the quadratic form

    T0(t) = A6 t^2 + A2 t + A1,        t = v^(s+1-lambda(p-m)/2) Y^((p-m)/2),

with coefficients A1..A7 depending on (N, m, p, q, beta, lambda) and
s = m - p - 1 - beta*Q.  If the discriminant D = A2^2 - 4 A6 A1 is
negative, T0 is uniformly positive-definite and a Harnack/test-function
loop yields the scale-invariant bound

    |grad (u^alpha)(0)| <= C R^(-1 - alpha (m-p)/Q),   alpha = -(lambda+2)/(2 beta).

Finding (beta, lambda) with D < 0 reduces, after clearing the positive
factor N Q beta^(2(m-p-1)) / (lambda+2)^2, to making

    D2(s_bar, l) = Q (l - s_bar/2)^2 + c2 s_bar^2 + (m-1)(q-1) s_bar + (m-1) q

negative, where c2 = (N-1) Q / 4 - (m-1), l = lambda/(lambda+2) and
s_bar = (2 s - lambda (p - m + 1)) / (lambda + 2).  The search picks
l = s_bar/2 to kill the square and then studies the remaining univariate
trinomial T(s_bar) case by case in the sign of c2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NoAdmissibleFrame
from .params import ProblemParams

__all__ = [
    "BernsteinFrame",
    "TrinomialCoeffs",
    "SearchResult",
    "coefficients",
    "discriminant_raw",
    "reduced_discriminant",
    "trinomial_T",
    "frame_from",
    "search",
    "gradient_bound_exponent",
    "positivity_margin",
]

_SCAN_RATIO = 1.25
_SCAN_CAP = 1.0e6
_FRAME_TOL = 1e-12


def _signed_pow(x: float, e: float) -> float:
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** e, x)


@dataclass(frozen=True)
class BernsteinFrame:
    """A substitution frame (beta, lambda) with its derived coordinates.

    Invariants (checked by ``validate``): lambda != -2, beta != 0,
    l = lambda/(lambda+2), s = m-p-1 - beta*Q and s_bar is the affine
    renormalisation of s fixed by lambda.
    """

    beta: float
    lam: float
    s: float
    s_bar: float
    l: float
    eps0: float

    def __post_init__(self):
        if self.lam == -2.0:
            raise DomainError("frame requires lambda != -2")
        if self.beta == 0.0:
            raise DomainError("frame requires beta != 0")

    def validate(self, params: ProblemParams, tol: float = _FRAME_TOL) -> None:
        m, p = params.m, params.p
        Q = params.Q
        checks = {
            "s": (self.s, m - p - 1.0 - self.beta * Q),
            "l": (self.l, self.lam / (self.lam + 2.0)),
            "s_bar": (self.s_bar,
                      (2.0 * self.s - self.lam * (p - m + 1.0)) / (self.lam + 2.0)),
        }
        for name, (got, want) in checks.items():
            err = abs(got - want) / max(1.0, abs(want))
            if err > tol:
                raise DomainError(
                    "inconsistent frame: %s=%.17g but derived value is %.17g"
                    % (name, got, want)
                )

    @property
    def alpha(self) -> float:
        """Gradient-bound exponent alpha = -(lambda+2)/(2 beta) (positive)."""
        return -(self.lam + 2.0) / (2.0 * self.beta)


def frame_from(params: ProblemParams, beta: float, lam: float,
               eps0: float = 0.0) -> BernsteinFrame:
    """Build a frame from (beta, lambda), deriving s, s_bar and l."""
    m, p = params.m, params.p
    if lam == -2.0:
        raise DomainError("lambda = -2 is a removable but excluded degeneracy")
    if beta == 0.0:
        raise DomainError("beta must be nonzero")
    s = m - p - 1.0 - beta * params.Q
    return BernsteinFrame(
        beta=beta, lam=lam, s=s,
        s_bar=(2.0 * s - lam * (p - m + 1.0)) / (lam + 2.0),
        l=lam / (lam + 2.0), eps0=eps0,
    )


@dataclass(frozen=True)
class TrinomialCoeffs:
    A1: float
    A2: float
    A3: float
    A4: float
    A5: float
    A6: float
    A7: float


def coefficients(params: ProblemParams, beta: float, lam: float) -> TrinomialCoeffs:
    """Coefficients of the rescaled gradient inequality at frame (beta, lambda).

    Powers of beta follow the convention of the derivation: |beta|^e * beta
    for odd combinations and (beta^2)^e for even ones, so negative beta is
    admissible throughout.
    """
    N, m, p = params.N, params.m, params.p
    Q = params.Q
    if not (p < m):
        raise DomainError("coefficients need p < m, got p=%g, m=%g" % (p, m))
    if beta == 0.0:
        raise DomainError("beta must be nonzero")
    if lam == -2.0:
        raise DomainError("lambda must differ from -2")

    mm2 = m - 2.0
    bp1 = beta + 1.0
    s = m - p - 1.0 - beta * Q
    odd_beta = _signed_pow(beta, p - m) * beta          # |beta|^(p-m) * beta

    A1 = ((m - 1.0) ** 2 * bp1 ** 2 / N
          - (m - 1.0) * bp1
          - 0.5 * lam * ((0.5 * m - mm2 ** 2 / (2.0 * N)) * lam
                         + (m - 1.0) * (beta + 2.0 - 2.0 * mm2 * bp1 / N)))
    A2 = (2.0 * (m - 1.0) * bp1 / N + s
          - lam * (0.5 * (p - m + 1.0) - mm2 / N)) * odd_beta
    A3 = (0.5 * m - mm2 ** 2 / (2.0 * N)) * lam + (m - 1.0) * (1.0 - mm2 / N) * bp1
    A4 = -0.25 * mm2
    A5 = 0.5 * mm2 + mm2 ** 2 / (4.0 * N)
    A6 = (beta * beta) ** (p - m + 1.0) / N
    A7 = (0.5 * (p - m + 2.0) - mm2 / N) * odd_beta
    return TrinomialCoeffs(A1=A1, A2=A2, A3=A3, A4=A4, A5=A5, A6=A6, A7=A7)


def discriminant_raw(coeffs: TrinomialCoeffs) -> float:
    """D = A2^2 - 4 A6 A1 of the principal quadratic form."""
    return coeffs.A2 ** 2 - 4.0 * coeffs.A6 * coeffs.A1


def reduced_discriminant(params: ProblemParams, s_bar: float, l: float) -> float:
    """D2(s_bar, l): the cleared discriminant in frame coordinates.

    D2 = Q (l - s_bar/2)^2 + T(s_bar) where T is the scan trinomial; it
    equals N Q beta^(2(m-p-1)) D / (lambda+2)^2 for the frame determined by
    (s_bar, l).
    """
    Q = params.Q
    if not (Q > 0.0):
        raise DomainError("reduced discriminant needs Q > 0, got Q=%g" % Q)
    return Q * (l - 0.5 * s_bar) ** 2 + trinomial_T(params, s_bar)


def trinomial_T(params: ProblemParams, s_bar: float) -> float:
    """T(s_bar) = c2 s_bar^2 + (m-1)(q-1) s_bar + (m-1) q with the square killed."""
    N, m, q = params.N, params.m, params.q
    Q = params.Q
    c2 = (N - 1.0) * Q / 4.0 - (m - 1.0)
    return c2 * s_bar ** 2 + (m - 1.0) * (q - 1.0) * s_bar + (m - 1.0) * q


def positivity_margin(params: ProblemParams, lam: float) -> float:
    """L_bar = Q lambda^2 + (m-1) q (lambda+2)^2, positive whenever Q > 0.

    This is the quantity whose positivity lets the cleared discriminant be
    divided through; it is exposed so the identity can be property-tested.
    """
    Q = params.Q
    return Q * lam * lam + (params.m - 1.0) * params.q * (lam + 2.0) ** 2


@dataclass(frozen=True)
class SearchResult:
    frame: BernsteinFrame
    coeffs: TrinomialCoeffs
    D: float
    D2: float
    case_label: str
    alpha: float
    gradient_exponent: float


def gradient_bound_exponent(params: ProblemParams, alpha: float) -> float:
    """Exponent of R in |grad(u^alpha)(0)| <= C R^(-1 - alpha (m-p)/Q)."""
    Q = params.Q
    if Q == 0.0:
        raise DomainError("gradient bound exponent needs Q != 0")
    return -1.0 - alpha * (params.m - params.p) / Q


def _conditions(params: ProblemParams):
    """The two sufficient conditions for a negative-discriminant frame."""
    N, m, q = params.N, params.m, params.q
    Q = params.Q
    cond_i = (q >= 1.0
              and q < (m - 1.0) * (N + 3.0) / (N - 1.0)
              and Q < 4.0 * (m - 1.0) / (N - 1.0))
    bound_ii = math.inf if q == 0.0 else (m - 1.0) * (q + 1.0) ** 2 / (q * (N - 1.0))
    cond_ii = 0.0 <= q < 1.0 and Q < bound_ii
    return cond_i, cond_ii, bound_ii


def _frame_at(params: ProblemParams, s_bar: float, l: float):
    """Recover (beta, lambda) from scan coordinates and package the frame."""
    m, p = params.m, params.p
    Q = params.Q
    if l == 1.0:
        raise DomainError("scan coordinate l = 1 corresponds to lambda = inf")
    lam = 2.0 * l / (1.0 - l)
    beta = (lam + 2.0) * (m - p - 1.0 - s_bar) / (2.0 * Q)
    if beta == 0.0:
        raise DomainError("degenerate frame: beta = 0 at s_bar=%g" % s_bar)
    return frame_from(params, beta, lam)


def _eps0_for(coeffs: TrinomialCoeffs, D: float) -> float:
    """Slack eps0 > 0 keeping the perturbed form T_eps0 negative-discriminant.

    In a successful frame D < 0 forces A6 A1 > A2^2/4 >= 0, and A6 > 0 by
    construction, hence A1 > 0 as well; shrinking both by eps0 keeps the
    discriminant negative for eps0 small against min(A1, A6, |D|).
    """
    A1, A2, A6 = coeffs.A1, coeffs.A2, coeffs.A6
    if not (A1 > 0.0 and A6 > 0.0):
        raise DomainError(
            "eps0 slack undefined: needs A1 > 0 and A6 > 0, got A1=%g, A6=%g"
            % (A1, A6)
        )
    eps0 = min(A1, A6, abs(D) / (4.0 * (A1 + A6))) / 10.0
    for _ in range(60):
        if A2 ** 2 - 4.0 * (A6 - eps0) * (A1 - eps0) < 0.0 and eps0 > 0.0:
            return eps0
        eps0 *= 0.5
    raise DomainError("could not certify an eps0 slack for D=%g" % D)


def search(params: ProblemParams) -> SearchResult:
    """Find a frame (beta, lambda) with negative discriminant, or fail.

    Preconditions: N >= 2, p < m, Q > 0.  Succeeds exactly when one of the
    two regime conditions holds (q >= 1 small-Q, or q < 1 below the
    (m-1)(q+1)^2/(q(N-1)) bound); otherwise raises NoAdmissibleFrame.

    Case split on c2 = (N-1)Q/4 - (m-1):

    * c2 < 0: T eventually negative; geometric scan of s_bar upward from
      max{0, m-p-1, 2} + 1, preferring the first scan point that also puts
      beta >= 1 (geometry of the original derivation), else the first
      negative point (beta > 0 there automatically).
    * c2 = 0: T is affine with negative slope (q < 1 here); same scan with
      the extra floor q/(1-q).
    * c2 > 0: T negative only between its roots; evaluated at the vertex
      s_bar* = (m-1)(1-q)/(2 c2), with an epsilon-shift of l when the
      vertex lands on the removable point s_bar = 2 (l = 1).
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    Q = params.Q
    if N < 2:
        raise DomainError("discriminant search needs N >= 2, got N=%d" % N)
    if not (p < m):
        raise DomainError("discriminant search needs p < m, got p=%g, m=%g" % (p, m))
    if not (Q > 0.0):
        raise DomainError("discriminant search needs Q > 0, got Q=%g" % Q)

    cond_i, cond_ii, bound_ii = _conditions(params)
    if not (cond_i or cond_ii):
        raise NoAdmissibleFrame(
            "no admissible frame: requires q >= 1 with Q < 4(m-1)/(N-1) "
            "(here Q=%g vs %g) or 0 <= q < 1 with Q < (m-1)(q+1)^2/(q(N-1)) "
            "(here Q=%g vs %g)"
            % (Q, 4.0 * (m - 1.0) / (N - 1.0), Q, bound_ii)
        )

    c2 = (N - 1.0) * Q / 4.0 - (m - 1.0)

    if c2 > 0.0:
        case = "III"
        # (q < 1 is guaranteed: cond_i would need Q < 4(m-1)/(N-1) <=> c2 < 0)
        disc_T = ((m - 1.0) * (q - 1.0)) ** 2 - 4.0 * c2 * (m - 1.0) * q
        if disc_T <= 0.0:
            raise NoAdmissibleFrame(
                "vertex case: T has no negative values (discriminant %g <= 0)"
                % disc_T
            )
        s_bar = (m - 1.0) * (1.0 - q) / (2.0 * c2)
        if s_bar <= max(0.0, m - p - 1.0):
            raise DomainError(
                "vertex s_bar=%g fails s_bar > max(0, m-p-1); frame degenerate"
                % s_bar
            )
        T_val = trinomial_T(params, s_bar)
        if s_bar == 2.0:
            # l = s_bar/2 = 1 is the removable point lambda = inf; shift l by
            # eps with Q eps^2 < |T| so D2 stays negative.
            eps = 0.5 * math.sqrt(-T_val / Q)
            l = 0.5 * s_bar + eps
        else:
            l = 0.5 * s_bar
        chosen = (s_bar, l)
    else:
        case = "I" if c2 < 0.0 else "II"
        floor = max(0.0, m - p - 1.0, 2.0)
        if c2 == 0.0:
            floor = max(floor, q / (1.0 - q))
        start = floor + 1.0
        hit = None
        k = 0
        while True:
            s_bar = start * _SCAN_RATIO ** k
            if s_bar > _SCAN_CAP:
                break
            if trinomial_T(params, s_bar) < 0.0:
                hit = k
                break
            k += 1
        if hit is None:
            raise NoAdmissibleFrame(
                "scan exhausted: T(s_bar) >= 0 for all s_bar <= %g (c2=%g)"
                % (_SCAN_CAP, c2)
            )
        # prefer a scan point whose frame has beta >= 1, as in the original
        # geometry; fall back to the first negative point (beta > 0 there).
        chosen = None
        for k in range(hit, hit + 41):
            s_bar = start * _SCAN_RATIO ** k
            if s_bar > _SCAN_CAP or trinomial_T(params, s_bar) >= 0.0:
                break
            frame_try = _frame_at(params, s_bar, 0.5 * s_bar)
            if frame_try.beta >= 1.0:
                chosen = (s_bar, 0.5 * s_bar)
                break
        if chosen is None:
            s_bar = start * _SCAN_RATIO ** hit
            chosen = (s_bar, 0.5 * s_bar)

    s_bar, l = chosen
    D2 = reduced_discriminant(params, s_bar, l)
    if not (D2 < 0.0):
        raise NoAdmissibleFrame(
            "internal scan inconsistency: D2=%g not negative at s_bar=%g, l=%g"
            % (D2, s_bar, l)
        )
    frame = _frame_at(params, s_bar, l)
    frame.validate(params)
    coeffs = coefficients(params, frame.beta, frame.lam)
    D = discriminant_raw(coeffs)
    if not (D < 0.0):
        raise NoAdmissibleFrame(
            "reduced discriminant negative but raw discriminant D=%g is not; "
            "frame beta=%g lambda=%g" % (D, frame.beta, frame.lam)
        )
    eps0 = _eps0_for(coeffs, D)
    frame = BernsteinFrame(beta=frame.beta, lam=frame.lam, s=frame.s,
                           s_bar=frame.s_bar, l=frame.l, eps0=eps0)
    alpha = frame.alpha
    if not (alpha > 0.0):
        raise DomainError("frame produced nonpositive alpha=%g" % alpha)
    return SearchResult(
        frame=frame, coeffs=coeffs, D=D, D2=D2, case_label=case,
        alpha=alpha, gradient_exponent=gradient_bound_exponent(params, alpha),
    )

"""Acceptance gate: twelve end-to-end checks against closed-form oracles.

Each test is one criterion and prints a single pass line on success; a
failure surfaces as an ordinary assertion error.  Everything here runs
against deterministic seeds and completes in well under ten minutes.
"""

import math
from fractions import Fraction as F

import numpy as np
import sympy

from gradlap import ProblemParams, StructureBounds
from gradlap.bernstein import (
    coefficients,
    discriminant_raw,
    frame_from,
    reduced_discriminant,
    search,
)
from gradlap.errors import NoAdmissibleFrame
from gradlap.params import derive_exponents, feasibility_scan
from gradlap.radial import (
    blowup_shoot,
    bubble_profile,
    fit_explicit_bubble,
    inverse_p_equals_m_transform,
    invert_T,
    m_harmonic,
    m_laplacian_residual,
    singular_profile,
    solve_grid,
    RadialProfile,
)
from gradlap.solver import (
    DirichletProblem,
    homotopy_solve,
    nonexistence_probe,
    principal_eigenpair,
)
from gradlap.verify import integral_scalings, liouville_probe

CANONICAL = ProblemParams(N=3, m=2.0, p=1.2, q=0.3)
CANONICAL_BOUNDS = StructureBounds(c0=1.0, M1=1.0, M2=0.1,
                                   alpha1=2.25, alpha2=1.2)


def _passed(label):
    print("ACCEPTANCE %s: PASS" % label)


# --------------------------------------------------------------------------


def test_criterion_01_reduction_chain_identity():
    """D2(s_bar, l) = N Q beta^(2(m-p-1)) (A2^2 - 4 A6 A1) / (lam+2)^2."""
    rng = np.random.default_rng(20240817)
    checked = 0
    worst = 0.0
    while checked < 1000:
        N = int(rng.integers(2, 11))
        m = float(rng.uniform(1.05, 4.0))
        p = float(rng.uniform(0.0, m * 0.999))
        q = float(rng.uniform(0.0, 6.0))
        params = ProblemParams(N=N, m=m, p=p, q=q)
        if params.Q <= 1e-9:
            continue
        beta = float(rng.uniform(1.0, 8.0))
        lam = float(rng.uniform(-9.0, -2.05))
        frame = frame_from(params, beta, lam)
        coeffs = coefficients(params, beta, lam)
        lhs = reduced_discriminant(params, frame.s_bar, frame.l)
        rhs = (N * params.Q * beta ** (2.0 * (m - p - 1.0))
               * discriminant_raw(coeffs) / (lam + 2.0) ** 2)
        scale = max(abs(lhs), abs(rhs), 1e-30)
        worst = max(worst, abs(lhs - rhs) / scale)
        checked += 1
    assert worst <= 1e-9, worst
    _passed("1 reduction-chain identity (1000 draws, worst rel %.2e)" % worst)


def test_criterion_02_worked_frame():
    params = ProblemParams(N=2, m=2.0, p=0.0, q=2.0)
    res = search(params)
    assert abs(res.D2 - (-1.75)) <= 1e-12
    assert abs(res.alpha - 0.5) <= 1e-12
    assert abs(res.gradient_exponent - (-2.0)) <= 1e-12
    coeffs = coefficients(params, 4.0, -6.0)
    assert abs(coeffs.A1 - 7.5) <= 1e-12
    assert abs(coeffs.A2 - (-0.25)) <= 1e-12
    assert abs(coeffs.A6 - 1.0 / 32.0) <= 1e-12
    _passed("2 worked frame (2,2,0,2) exact")


def test_criterion_03_search_matches_constancy_conditions():
    """Search succeeds exactly where condition (i) or (ii) holds."""

    def conditions_hold(N, m, p, q):
        # recomputed from the inequality statements, not the search gate
        Q = p + q - m + 1.0
        cond_i = (1.0 <= q < (m - 1.0) * (N + 3.0) / (N - 1.0)
                  and Q < 4.0 * (m - 1.0) / (N - 1.0))
        if q == 0.0:
            cond_ii = True  # bound (m-1)(q+1)^2/(q(N-1)) -> infinity
        else:
            cond_ii = (0.0 <= q < 1.0
                       and Q < (m - 1.0) * (q + 1.0) ** 2 / (q * (N - 1.0)))
        return cond_i or cond_ii

    grid = []
    for N in (2, 3, 4, 6, 10):
        for m in np.linspace(1.1, 3.9, 8):
            for frac in np.linspace(0.0, 0.95, 10):
                p = frac * m
                for q in np.linspace(0.0, 6.0, 30):
                    if p + q - m + 1.0 > 1e-9:
                        grid.append((N, float(m), float(p), float(q)))
    assert len(grid) >= 10 ** 4
    grid = grid[:10 ** 4]

    mismatches = 0
    successes = 0
    for N, m, p, q in grid:
        params = ProblemParams(N=N, m=m, p=p, q=q)
        try:
            search(params)
            found = True
            successes += 1
        except NoAdmissibleFrame:
            found = False
        if found != conditions_hold(N, m, p, q):
            mismatches += 1
    assert mismatches == 0, mismatches
    assert 0 < successes < len(grid)  # both branches exercised
    _passed("3 search <=> sufficiency conditions on 10^4 grid "
            "(%d admissible)" % successes)


def test_criterion_04_operator_inversion_oracle():
    for m, N in ((2.0, 3), (3.0, 3), (1.5, 4)):
        grid = solve_grid(1.0, n=4096)
        src = RadialProfile(grid=grid, values=np.ones(grid.n),
                            du=np.zeros(grid.n))
        u = invert_T(src, m, N)
        e = m / (m - 1.0)
        want = (m - 1.0) / m * N ** (-1.0 / (m - 1.0)) * (1.0 - grid.nodes ** e)
        err = float(np.max(np.abs(u.values - want)))
        assert err <= 1e-8, (m, N, err)
    _passed("4 inversion matches closed form for (m,N) in "
            "{(2,3),(3,3),(1.5,4)}")


def test_criterion_05_gradient_equal_diffusion_transform():
    for q, a in ((0.0, 0.0), (1.0, -0.5)):
        v = m_harmonic(3, 2.0, a=a, b=1.0, n=8192)
        u = inverse_p_equals_m_transform(v, 2.0, q)
        rep = m_laplacian_residual(u, ProblemParams(N=3, m=2.0, p=2.0, q=q))
        assert rep.max_abs_residual <= 1e-5, (q, rep.max_abs_residual)
        # second-order decay: residual of the value-only profile drops ~4x
        res = {}
        for n in (2048, 4096):
            vn = m_harmonic(3, 2.0, a=a, b=1.0, n=n)
            un = inverse_p_equals_m_transform(vn, 2.0, q)
            rn = m_laplacian_residual(un.without_stored_derivative(),
                                      ProblemParams(N=3, m=2.0, p=2.0, q=q))
            res[n] = rn.max_abs_residual
        ratio = res[2048] / res[4096]
        assert ratio >= 3.5, (q, ratio)
    _passed("5 p=m transform residual <= 1e-5 at n=8192, second-order decay")


def test_criterion_06_explicit_bubble():
    params = ProblemParams(N=3, m=2.0, p=0.0, q=5.0)
    fit = fit_explicit_bubble(params)
    assert fit.feasible
    assert abs(fit.beta - 0.5) <= 1e-3
    assert abs(fit.C - 3.0 ** 0.25) <= 1e-3
    prof = bubble_profile(params, fit.beta, fit.C)
    rep = m_laplacian_residual(prof, params)
    assert rep.max_abs_residual <= 1e-6, rep.max_abs_residual
    _passed("6 bubble beta=0.5, C=3^(1/4) within 1e-3, residual <= 1e-6")


def test_criterion_07_singular_profile_and_scalings():
    params = ProblemParams(N=3, m=2.0, p=0.0, q=4.0)
    # balance-equation root computed independently with rationals
    theta = sympy.Rational(2, 3)
    K = 3 - 1 - (theta + 1) * (2 - 1)
    oracle = float((theta ** (2 - 1 - 0) * K) ** sympy.Rational(1, 3))
    A, prof = singular_profile(params, r_min=0.001, R=100.0, n=8192)
    assert abs(A - oracle) <= 1e-9 * oracle

    radii = np.logspace(0.0, 1.5, 12)
    rep = integral_scalings(prof, params, gamma=1.0, mu=1.0, radii=radii)
    for slope, want in zip(rep.slopes, rep.predicted):
        assert abs(slope / want - 1.0) <= 0.02, (slope, want)

    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        m = float(rng.uniform(1.05, 4.0))
        p = float(rng.uniform(0.0, m * 0.98))
        q = float(rng.uniform(0.0, 5.0))
        gamma = float(rng.uniform(0.5, 3.0))
        pp = ProblemParams(N=int(rng.integers(2, 8)), m=m, p=p, q=q)
        if pp.Q <= 1e-6:
            continue
        dx = derive_exponents(pp)
        lhs = m * gamma / (dx.alpha1 - m + 1.0)
        rhs = dx.theta * gamma
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs)), pp
        checked += 1
    _passed("7 singular amplitude, scaling slopes within 2%, exponent "
            "identity on 100 draws")


def test_criterion_08_boundary_blowup_rate():
    rep1 = blowup_shoot(ProblemParams(N=3, m=2.0, p=0.0, q=4.0), n=1024)
    assert abs(rep1.fitted_theta / (2.0 / 3.0) - 1.0) <= 0.05, rep1.fitted_theta
    rep2 = blowup_shoot(ProblemParams(N=2, m=2.0, p=1.0, q=1.0),
                        boundary_ladder=(1e2, 1e3, 1e4, 1e5), n=2048,
                        cauchy_tol=2e-3)
    assert abs(rep2.fitted_theta / 1.0 - 1.0) <= 0.05, rep2.fitted_theta
    _passed("8 blow-up rates within 5%%: %.5f (want 2/3), %.5f (want 1)"
            % (rep1.fitted_theta, rep2.fitted_theta))


def test_criterion_09_eigenpair():
    pair = principal_eigenpair(3, 2.0, 1.0, n=8192)
    assert abs(pair.lambda1 / math.pi ** 2 - 1.0) <= 1e-3
    assert pair.residual_max <= 1e-6, pair.residual_max
    base = principal_eigenpair(3, 2.0, 1.0, n=2048).lambda1
    for R in (0.5, 2.0):
        scaled = principal_eigenpair(3, 2.0, R, n=2048).lambda1
        assert abs(scaled * R ** 2.0 / base - 1.0) <= 1e-6, R
    _passed("9 lambda1 = pi^2 within 1e-3, R^-m scaling within 1e-6, "
            "residual <= 1e-6")


def test_criterion_10_existence_pipeline():
    prob = DirichletProblem(params=CANONICAL, bounds=CANONICAL_BOUNDS,
                            lam=0.5, R=1.0, n=1024)
    rep = homotopy_solve(prob, lam0=5.0)
    assert rep.converged
    assert rep.final_residual <= 1e-6, rep.final_residual
    assert rep.positive_interior
    assert rep.picone_slack >= -1e-6, rep.picone_slack
    bracket = nonexistence_probe(CANONICAL, CANONICAL_BOUNDS, n=512)
    # default ladder spans 10^-2 .. 10^3: five decades
    assert math.log10(bracket.ladder[-1] / bracket.ladder[0]) >= 5.0 - 1e-9
    assert 0.0 < bracket.lambda_lo < bracket.lambda_hi < math.inf
    assert bracket.consistent
    _passed("10 homotopy existence at lam=0.5 and finite bracket "
            "(%.5f, %.5f)" % (bracket.lambda_lo, bracket.lambda_hi))


def _fm_satisfiable(rows):
    """Decide a linear system by Fourier-Motzkin over exact rationals.

    Each row (coeffs, const, strict) asserts sum(coeffs*x) + const > 0
    (>= 0 when strict is False).  Exact for linear systems: after all
    variables are eliminated the surviving constant rows decide it.
    """
    nvar = len(rows[0][0])
    for k in range(nvar - 1, -1, -1):
        lowers, uppers, passed = [], [], []
        for coeffs, c, strict in rows:
            a, rest = coeffs[k], coeffs[:k]
            if a == 0:
                passed.append((rest, c, strict))
            elif a > 0:
                lowers.append((a, rest, c, strict))
            else:
                uppers.append((-a, rest, c, strict))
        for la, lrest, lc, ls in lowers:
            for ua, urest, uc, us in uppers:
                coeffs = tuple(la * ur + ua * lr
                               for lr, ur in zip(lrest, urest))
                passed.append((coeffs, la * uc + ua * lc, ls or us))
        rows = passed
    return all(c > 0 if strict else c >= 0 for _, c, strict in rows)


def test_criterion_11_feasibility_conflict():
    def strip_rows(N, m, with_gradient_floor=True):
        # variables (p, q); all entries exact rationals
        rows = [
            ((F(0), F(1)), F(0), False),                       # q >= 0
            ((F(1), F(0)), 1 - m, True),                       # p > m - 1
            ((F(-1), F(0)), m, True),                          # p < m
            ((1 - N, m - N), N * (m - 1), True),               # subcritical
        ]
        if with_gradient_floor:
            rows.append(((F(N), F(0)), N - N * m - m, True))   # m-(p-m+1)N<0
        return rows

    for N, m in ((3, F(2)), (5, F(3, 2)), (4, F(3))):
        # oracle first: the exact linear system must already be empty...
        assert not _fm_satisfiable(strip_rows(N, m)), (N, m)
        # ...and only because of the gradient floor (control instance)
        assert _fm_satisfiable(strip_rows(N, m, with_gradient_floor=False))
        rep = feasibility_scan(N, float(m), grid_resolution=200)
        assert rep.empty, (N, m)
        assert rep.feasible_count == 0
        assert set(rep.conflicting_pair) == {"m-(p-m+1)N<0", "subcritical"}
    _passed("11 feasibility strip empty for (3,2), (5,1.5), (4,3); "
            "conflict pair matches the exact elimination oracle")


def test_criterion_12_liouville_probe():
    rep = liouville_probe(ProblemParams(N=2, m=2.0, p=0.0, q=2.0),
                          r0=1.0, R_max=100.0)
    assert rep.all_failed
    for probe in rep.probes:
        assert probe.slope != 0.0
        assert probe.classification == "hits-zero"
        # the obstruction appears strictly before the probe horizon
        failing = probe.outward if probe.outward.outcome != "clean" \
            else probe.inward
        assert failing.outcome == "hits-zero"
        assert failing.r_end < 100.0
    _passed("12 all nonzero-slope shots fail positivity before R=100")

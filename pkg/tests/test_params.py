"""Parameter arithmetic, regime classification and the feasibility scan."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from gradlap import (
    DomainError,
    ProblemParams,
    StructureBounds,
    admissible_substitution,
    classify_liouville,
    derive_exponents,
    feasibility_scan,
    nonexistence_rate,
    subcritical_margin,
    supersolution_exponent,
)
from gradlap.params import PREDICATE_NAMES, predicate_values, strong_max_applicable

# strategies: keep m-p away from 0 so alpha1/theta stay finite
_N = st.integers(min_value=1, max_value=9)
_m = st.floats(min_value=1.05, max_value=5.0, allow_nan=False)
_frac = st.floats(min_value=0.0, max_value=0.95, allow_nan=False)
_q = st.floats(min_value=0.0, max_value=8.0, allow_nan=False)


# --------------------------------------------------------------------------
# construction and validation


def test_params_frozen_and_validated():
    pp = ProblemParams(N=3, m=2.0, p=1.2, q=0.3)
    assert pp.Q == pytest.approx(1.2 + 0.3 - 2.0 + 1.0)
    with pytest.raises(AttributeError):
        pp.N = 4  # frozen dataclass
    with pytest.raises(DomainError):
        ProblemParams(N=0, m=2.0, p=1.0, q=1.0)
    with pytest.raises(DomainError):
        ProblemParams(N=3, m=1.0, p=0.5, q=1.0)  # m must exceed 1
    with pytest.raises(DomainError):
        ProblemParams(N=3, m=2.0, p=-0.1, q=1.0)
    with pytest.raises(DomainError):
        ProblemParams(N=3, m=2.0, p=1.0, q=-0.5)


def test_structure_bounds_interval():
    pp = ProblemParams(N=3, m=2.0, p=1.2, q=0.3)
    # alpha2 must sit in (m-1, alpha1*m/(alpha1+1)): here (1, 18/13)
    StructureBounds(c0=1.0, M1=1.0, M2=0.1, alpha1=2.25, alpha2=1.2).validate_for(pp)
    hi = 2.25 * 2.0 / 3.25
    with pytest.raises(DomainError):
        StructureBounds(c0=1.0, M1=1.0, M2=0.1, alpha1=2.25,
                        alpha2=hi + 1e-6).validate_for(pp)
    with pytest.raises(DomainError):
        StructureBounds(c0=1.0, M1=1.0, M2=0.1, alpha1=2.25,
                        alpha2=1.0).validate_for(pp)
    with pytest.raises(DomainError):
        # alpha1 must exceed m-1
        StructureBounds(c0=1.0, M1=1.0, M2=0.0, alpha1=0.9,
                        alpha2=0.95).validate_for(pp)


# --------------------------------------------------------------------------
# derived exponents


def test_derived_worked_instance():
    dx = derive_exponents(ProblemParams(N=2, m=2.0, p=0.0, q=2.0))
    assert dx.Q == pytest.approx(1.0, abs=1e-15)
    assert dx.alpha1 == pytest.approx(2.0, abs=1e-15)
    assert dx.theta == pytest.approx(2.0, abs=1e-15)
    assert dx.subcritical_margin == pytest.approx(2.0, abs=1e-15)
    assert dx.m_star is None  # m = N has no Sobolev-type exponent
    assert any("m_star" in entry for entry in dx.undefined)


def test_derived_canonical(canonical_params):
    dx = derive_exponents(canonical_params)
    assert dx.m_star == pytest.approx(2.0 * 2.0 / 1.0)   # m(N-1)/(N-m) = 4
    assert dx.alpha1 == pytest.approx((1.2 + 0.6) / 0.8)  # (p+mq)/(m-p)
    assert dx.theta == pytest.approx(0.8 / canonical_params.Q)


@settings(max_examples=200, deadline=None)
@given(_N, _m, _frac, _q)
def test_derived_identities(N, m, frac, q):
    p = frac * m
    pp = ProblemParams(N=N, m=m, p=p, q=q)
    dx = derive_exponents(pp)
    assert dx.Q == pytest.approx(p + q - m + 1.0, rel=1e-12, abs=1e-12)
    margin = N * (m - 1.0) - q * (N - m) - p * (N - 1.0)
    assert dx.subcritical_margin == pytest.approx(margin, rel=1e-12, abs=1e-12)
    assert subcritical_margin(pp) == dx.subcritical_margin
    if pp.Q > 1e-9:
        # theta * Q = m - p and the absorption-exponent identity
        assert dx.theta * pp.Q == pytest.approx(m - p, rel=1e-12)
        assert dx.theta * (dx.alpha1 + 1.0) == pytest.approx(
            (dx.theta + 1.0) * m, rel=1e-10, abs=1e-10)
    if m < N:
        assert dx.m_star == pytest.approx(m * (N - 1.0) / (N - m), rel=1e-12)
    else:
        assert dx.m_star is None
        assert any("m_star" in entry for entry in dx.undefined)


# --------------------------------------------------------------------------
# classification


@pytest.mark.parametrize("pt,label", [
    ((2, 2.0, 0.0, 2.0), "liouville-bounded-large-q"),
    ((4, 2.0, 0.5, 1.0), "liouville-bounded-large-q"),
    ((3, 2.0, 2.0, 1.0), "liouville-p-equals-m"),
    ((3, 2.0, 1.5, 0.2), "liouville-bounded-small-q"),
    ((5, 2.0, 0.3, 0.5), "liouville-supersolution-subcritical"),
    ((3, 2.0, 0.0, 5.0), "supercritical-bubble"),
    ((3, 3.0, 1.0, 1.0), "unclassified"),
])
def test_classification_labels(pt, label):
    rep = classify_liouville(ProblemParams(N=pt[0], m=pt[1], p=pt[2], q=pt[3]))
    assert rep.classification == label
    # every certificate is a concrete checked inequality
    for cert in rep.certificates:
        assert cert.op in ("<", "<=", ">", ">=", "==")
        assert isinstance(cert.passed, bool)


def test_classification_certificates_match_label():
    rep = classify_liouville(ProblemParams(N=2, m=2.0, p=0.0, q=2.0))
    by_name = {c.name: c for c in rep.certificates}
    assert by_name["q<(m-1)(N+3)/(N-1)"].passed
    assert by_name["Q<4(m-1)/(N-1)"].passed
    assert not by_name["p=m"].passed


# --------------------------------------------------------------------------
# nonexistence rate l(lam): oracle first, then the implementation


def _rate_oracle(lam, M1, alpha1, m):
    # independent minimisation of (lam + M1 s^alpha1) / s^(m-1) over s > 0
    def objective(log_s):
        s = math.exp(log_s)
        return (lam + M1 * s ** alpha1) / s ** (m - 1.0)

    out = minimize_scalar(objective, bounds=(-25.0, 25.0), method="bounded",
                          options={"xatol": 1e-13})
    return out.fun


def test_nonexistence_rate_against_minimizer():
    rng = np.random.default_rng(7)
    for _ in range(100):
        lam = float(rng.uniform(0.05, 50.0))
        M1 = float(rng.uniform(0.1, 10.0))
        m = float(rng.uniform(1.3, 4.0))
        alpha1 = float(rng.uniform(m - 1.0 + 0.05, m + 3.0))
        want = _rate_oracle(lam, M1, alpha1, m)
        got = nonexistence_rate(lam, M1, alpha1, m)
        assert got == pytest.approx(want, rel=1e-6), (lam, M1, alpha1, m)


def test_nonexistence_rate_power_law():
    # closed form: l(lam) = K * lam^(1 - (m-1)/alpha1); ratios must match
    m, alpha1, M1 = 2.0, 2.25, 1.0
    expo = 1.0 - (m - 1.0) / alpha1
    l1 = nonexistence_rate(1.0, M1, alpha1, m)
    l4 = nonexistence_rate(4.0, M1, alpha1, m)
    assert l4 / l1 == pytest.approx(4.0 ** expo, rel=1e-8)
    with pytest.raises(DomainError):
        nonexistence_rate(-1.0, M1, alpha1, m)
    with pytest.raises(DomainError):
        nonexistence_rate(1.0, M1, m - 1.0, m)  # needs alpha1 > m-1


# --------------------------------------------------------------------------
# substitution witness and strong maximum principle window


def test_substitution_witness_canonical(canonical_params):
    N, m, p = canonical_params.N, canonical_params.m, canonical_params.p
    w = admissible_substitution(canonical_params)
    assert w.b > 1.0
    # defining identities of the witness
    assert w.s == pytest.approx(m - p - 1.0 + w.b * canonical_params.Q,
                                rel=1e-12)
    assert w.alpha == pytest.approx(
        supersolution_exponent(canonical_params, w.b), rel=1e-12)
    # and the constraints it certifies
    assert w.s > 0.0
    assert 1.0 < w.alpha < N * (m - 1.0) / (N - 1.0)


def test_strong_max_threshold():
    # dead cores appear exactly below alpha = m - 1
    assert strong_max_applicable(1.0, 2.0)
    assert strong_max_applicable(1.5, 2.0)
    assert not strong_max_applicable(0.99, 2.0)
    assert strong_max_applicable(2.0, 3.0)
    assert not strong_max_applicable(1.9, 3.0)
    with pytest.raises(DomainError):
        strong_max_applicable(-1.0, 2.0)
    with pytest.raises(DomainError):
        strong_max_applicable(1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(_m, st.floats(min_value=1.01, max_value=4.0, allow_nan=False))
def test_supersolution_exponent_monotone(m, b):
    # for fixed params the exponent grows with the slope parameter b
    pp = ProblemParams(N=3, m=m, p=0.45 * m, q=0.5)
    if pp.Q <= 1e-9:
        return
    s1 = supersolution_exponent(pp, b)
    s2 = supersolution_exponent(pp, b + 0.5)
    assert s2 >= s1 - 1e-12


# --------------------------------------------------------------------------
# feasibility scan


def test_feasibility_counts_cross_check():
    rep = feasibility_scan(3, 2.0, grid_resolution=24)
    # recompute every predicate on the same grid straight from the pointwise map
    p_axis = np.linspace(1.0, 2.0, 24)
    q_axis = np.linspace(0.0, rep.q_max, 24)
    counts = {nm: 0 for nm in PREDICATE_NAMES}
    feasible = 0
    for p in p_axis:
        for q in q_axis:
            vals = predicate_values(3, 2.0, float(p), float(q))
            for nm in PREDICATE_NAMES:
                counts[nm] += bool(vals[nm])
            feasible += all(vals.values())
    for nm in PREDICATE_NAMES:
        assert rep.counts[nm] == counts[nm], nm
    assert rep.feasible_count == feasible
    assert rep.empty == (feasible == 0)


def test_feasibility_conflict_pair_n3():
    rep = feasibility_scan(3, 2.0, grid_resolution=200)
    assert rep.empty
    assert rep.feasible_count == 0
    assert set(rep.conflicting_pair) == {"m-(p-m+1)N<0", "subcritical"}
    assert rep.q_max == pytest.approx(4.0)  # N(m-1)/(N-m) + 1


def test_feasibility_exclusion_opens_strip():
    # dropping the dimension-gap predicate leaves a nonempty region
    rep = feasibility_scan(3, 2.0, grid_resolution=60,
                           exclude=("m-(p-m+1)N<0",))
    assert not rep.empty
    assert rep.feasible_points.shape[1] == 2
    assert "m-(p-m+1)N<0" in rep.excluded
    assert "m-(p-m+1)N<0" not in rep.predicates
    # every reported point satisfies the remaining predicates
    for p, q in rep.feasible_points[:10]:
        vals = predicate_values(3, 2.0, float(p), float(q))
        assert all(vals[nm] for nm in rep.predicates)


def test_feasibility_unknown_predicate():
    with pytest.raises(DomainError):
        feasibility_scan(3, 2.0, grid_resolution=16, exclude=("no-such",))

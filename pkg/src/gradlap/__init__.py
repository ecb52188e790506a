"""Regimes, gradient bounds and radial solution families for the
quasilinear equation -Δ_m u = u^q |grad u|^p (+ structured lower-order
terms) on balls and on all of R^N.

The library is organised by task:

- :mod:`gradlap.params` — parameter validation, derived exponents, regime
  classification with inequality certificates, feasibility scans;
- :mod:`gradlap.bernstein` — the substitution frames and discriminant
  algebra behind pointwise gradient bounds, and the frame search;
- :mod:`gradlap.radial` — grids, profiles, high-order residuals, the
  monotone inverse of -Δ_m, closed-form families, boundary blow-up;
- :mod:`gradlap.solver` — Dirichlet fixed-point solver, continuation,
  principal eigenpairs, Picone slack, nonexistence bracketing;
- :mod:`gradlap.verify` — Harnack ratios, integral growth laws, and the
  entire-solution ODE probe;
- :mod:`gradlap.service` / :mod:`gradlap.cli` — HTTP facade and the thin
  command-line client in front of it.
"""

__version__ = "0.1.0"

from .errors import (
    BracketNotFound,
    DomainError,
    GradlapError,
    NoAdmissibleFrame,
    NonConvergence,
    ToleranceError,
)
from .params import (
    Certificate,
    DerivedExponents,
    FeasibilityReport,
    ProblemParams,
    RegimeReport,
    StructureBounds,
    SubstitutionWitness,
    admissible_substitution,
    classify_liouville,
    derive_exponents,
    feasibility_scan,
    nonexistence_rate,
    subcritical,
    subcritical_margin,
    supersolution_exponent,
)
from .bernstein import (
    BernsteinFrame,
    SearchResult,
    TrinomialCoeffs,
    coefficients,
    discriminant_raw,
    frame_from,
    gradient_bound_exponent,
    positivity_margin,
    reduced_discriminant,
    search,
    trinomial_T,
)
from .radial import (
    BlowupReport,
    BubbleFit,
    RadialGrid,
    RadialProfile,
    blowup_shoot,
    boundary_layer_grid,
    bubble_profile,
    cumulative_power_trapezoid,
    first_derivative,
    fit_explicit_bubble,
    fornberg_weights,
    inverse_p_equals_m_transform,
    invert_T,
    m_harmonic,
    m_laplacian_residual,
    p_equals_m_transform,
    rescale_blowup,
    singular_profile,
    solve_grid,
    uniform_grid,
)
from .solver import (
    DirichletProblem,
    EigenPair,
    NonexistenceBracket,
    SolveReport,
    canonical_source,
    fixed_point_solve,
    homotopy_solve,
    nonexistence_probe,
    picone_check,
    principal_eigenpair,
)
from .verify import (
    LiouvilleProbeReport,
    ScalingReport,
    harnack_ratio,
    integral_scalings,
    liouville_probe,
    sphere_area,
    weak_harnack,
)
from .serialize import canonical_json, read_profile_csv, write_profile_csv

__all__ = [name for name in dir() if not name.startswith("_")]

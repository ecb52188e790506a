"""HTTP facade over the library.

Every endpoint is a thin shim: deserialize, call the core function, lay the
report out as a JSON object.  Library errors map onto status codes by kind:
domain -> 422, nonconvergence -> 409, tolerance (and any other library
failure) -> 500, always with a body {"detail": ..., "kind": ...}.
"""

from __future__ import annotations

import dataclasses

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bernstein import coefficients, discriminant_raw, frame_from, positivity_margin, search
from ..errors import DomainError, GradlapError
from ..params import classify_liouville, derive_exponents, feasibility_scan
from ..radial import (
    RadialProfile,
    blowup_shoot,
    bubble_profile,
    fit_explicit_bubble,
    singular_profile,
)
from ..solver import (
    DirichletProblem,
    fixed_point_solve,
    homotopy_solve,
    nonexistence_probe,
    principal_eigenpair,
)
from ..verify import harnack_ratio, integral_scalings, liouville_probe, weak_harnack
from . import schemas

app = FastAPI(title="gradlap", version=__version__)

_STATUS_BY_KIND = {"domain": 422, "nonconvergence": 409, "tolerance": 500}


@app.exception_handler(GradlapError)
async def _library_error(request: Request, exc: GradlapError) -> JSONResponse:
    status = _STATUS_BY_KIND.get(exc.kind, 500)
    return JSONResponse(status_code=status,
                        content={"detail": str(exc), "kind": exc.kind})


def _profile_payload(profile: RadialProfile) -> dict:
    return {
        "r": profile.grid.nodes.tolist(),
        "u": profile.values.tolist(),
        "du": profile.derivative().tolist(),
    }


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/classify")
def classify(req: schemas.ClassifyRequest) -> dict:
    params = req.params.build()
    report = classify_liouville(params)
    dx = derive_exponents(params)
    return {
        "classification": report.classification,
        "certificates": [dataclasses.asdict(c) for c in report.certificates],
        "derived": {
            "Q": dx.Q,
            "alpha1": dx.alpha1,
            "m_star": dx.m_star,
            "theta": dx.theta,
            "subcritical_margin": dx.subcritical_margin,
            "undefined": list(dx.undefined),
        },
    }


@app.post("/bernstein")
def bernstein(req: schemas.BernsteinRequest) -> dict:
    params = req.params.build()
    if (req.beta is None) != (req.lam is None):
        raise DomainError("manual mode needs both beta and lam")
    if req.beta is not None:
        frame = frame_from(params, req.beta, req.lam)
        coeffs = coefficients(params, req.beta, req.lam)
        return {
            "mode": "manual",
            "beta": frame.beta,
            "lam": frame.lam,
            "s": frame.s,
            "s_bar": frame.s_bar,
            "l": frame.l,
            "coefficients": dataclasses.asdict(coeffs),
            "D": discriminant_raw(coeffs),
            "positivity_margin": positivity_margin(params, req.lam),
        }
    res = search(params)
    return {
        "mode": "search",
        "case_label": res.case_label,
        "beta": res.frame.beta,
        "lam": res.frame.lam,
        "s": res.frame.s,
        "s_bar": res.frame.s_bar,
        "l": res.frame.l,
        "eps0": res.frame.eps0,
        "alpha": res.alpha,
        "gradient_exponent": res.gradient_exponent,
        "D": res.D,
        "D2": res.D2,
        "coefficients": dataclasses.asdict(res.coeffs),
    }


@app.post("/feasibility")
def feasibility(req: schemas.FeasibilityRequest) -> dict:
    rep = feasibility_scan(req.N, req.m, req.resolution, q_max=req.q_max)
    body = {
        "N": rep.N,
        "m": rep.m,
        "resolution": rep.resolution,
        "q_max": rep.q_max,
        "predicates": list(rep.predicates),
        "excluded": list(rep.excluded),
        "counts": dict(rep.counts),
        "pair_counts": {"%s & %s" % ab: c for ab, c in rep.pair_counts.items()},
        "feasible_count": rep.feasible_count,
        "empty": rep.empty,
        "conflicting_pair": list(rep.conflicting_pair) if rep.conflicting_pair else None,
        "first_fail_counts": dict(rep.first_fail_counts),
    }
    if req.include_points:
        body["points"] = rep.feasible_points.tolist()
    return body


@app.post("/solve")
def solve(req: schemas.SolveRequest) -> dict:
    params = req.params.build()
    bounds = req.bounds.build(params)
    prob = DirichletProblem(params=params, bounds=bounds, lam=req.lam,
                            R=req.R, n=req.n,
                            include_alpha2_term=req.include_alpha2_term)
    if req.homotopy:
        if req.lam0 is None:
            raise DomainError("homotopy mode needs lam0")
        schedule = tuple(req.schedule) if req.schedule is not None \
            else (1.0, 0.5, 0.25, 0.0)
        rep = homotopy_solve(prob, req.lam0, schedule=schedule,
                             omega=req.omega, k_max=req.k_max)
    else:
        rep = fixed_point_solve(prob, omega=req.omega, k_max=req.k_max)
    return {
        "converged": rep.converged,
        "iterations": rep.iterations,
        "lam": rep.lam,
        "fp_gap": rep.fp_gap,
        "omega_final": rep.omega_final,
        "final_residual": rep.final_residual,
        "residual_l2": rep.residual_l2,
        "harnack_ratio": rep.harnack_ratio,
        "picone_slack": rep.picone_slack,
        "positive_interior": rep.positive_interior,
        "stage_lambdas": list(rep.stage_lambdas) if rep.stage_lambdas else None,
        "sup_u": float(max(rep.profile.values.max(), 0.0)),
        "profile": _profile_payload(rep.profile),
    }


@app.post("/eigen")
def eigen(req: schemas.EigenRequest) -> dict:
    pair = principal_eigenpair(req.N, req.m, req.R, req.n)
    return {
        "lambda1": pair.lambda1,
        "iterations": pair.iterations,
        "rayleigh": pair.rayleigh,
        "power_estimate": pair.power_estimate,
        "residual_max": pair.residual_max,
        "N": pair.N,
        "m": pair.m,
        "R": req.R,
        "n": req.n,
        "profile": _profile_payload(pair.profile),
    }


@app.post("/harnack")
def harnack(req: schemas.HarnackRequest) -> dict:
    profile = req.profile.build()
    ratio = harnack_ratio(profile, req.R, req.lam, m=req.m, center=req.center)
    return {"ratio": ratio, "R": req.R, "lam": req.lam, "m": req.m,
            "center": req.center}


@app.post("/weak-harnack")
def weak_harnack_endpoint(req: schemas.WeakHarnackRequest) -> dict:
    profile = req.profile.build()
    params = req.params.build()
    const = weak_harnack(profile, req.R, req.gamma, params)
    return {"constant": const, "R": req.R, "gamma": req.gamma}


@app.post("/scalings")
def scalings(req: schemas.ScalingsRequest) -> dict:
    params = req.params.build()
    amplitude = None
    if req.profile is not None:
        profile = req.profile.build()
    else:
        radii = sorted(float(x) for x in req.radii)
        r_min = req.r_min if req.r_min is not None else radii[0] / 4.0
        R = req.R if req.R is not None else radii[-1]
        amplitude, profile = singular_profile(params, r_min=r_min, R=R, n=req.n)
    rep = integral_scalings(profile, params, req.gamma, req.mu, req.radii)
    return {
        "slopes": list(rep.slopes),
        "predicted": list(rep.predicted),
        "r_squared": list(rep.r_squared),
        "well_resolved": rep.well_resolved,
        "radii": list(rep.radii),
        "integrals": [list(v) for v in rep.integrals],
        "amplitude": amplitude,
    }


@app.post("/bubble")
def bubble(req: schemas.BubbleRequest) -> dict:
    params = req.params.build()
    fit = fit_explicit_bubble(params, C_max=req.C_max, r_max=req.r_max,
                              tol=req.tol, grid_size=req.grid_size,
                              refinements=req.refinements)
    body = {
        "feasible": fit.feasible,
        "beta": fit.beta,
        "C": fit.C,
        "min_residual": fit.min_residual,
        "levels": fit.levels,
    }
    if req.with_profile and fit.feasible:
        prof = bubble_profile(params, fit.beta, fit.C, R=req.R, n=req.n)
        body["profile"] = _profile_payload(prof)
    return body


@app.post("/blowup")
def blowup(req: schemas.BlowupRequest) -> dict:
    params = req.params.build()
    rep = blowup_shoot(params, R=req.R, boundary_ladder=tuple(req.ladder),
                       n=req.n, cauchy_tol=req.cauchy_tol)
    body = {
        "mode": rep.mode,
        "theta_predicted": rep.theta_predicted,
        "fitted_theta": rep.fitted_theta,
        "amplitude_predicted": rep.amplitude_predicted,
        "amplitude_fitted": rep.amplitude_fitted,
        "ladder": list(rep.ladder),
        "cauchy_gaps": list(rep.cauchy_gaps),
        "fit_r2": rep.fit_r2,
        "fit_window": list(rep.fit_window),
    }
    if req.with_profile:
        body["profile"] = _profile_payload(rep.profile)
    return body


@app.post("/probe-nonexistence")
def probe_nonexistence(req: schemas.ProbeRequest) -> dict:
    params = req.params.build()
    bounds = req.bounds.build(params)
    ladder = tuple(req.ladder) if req.ladder is not None else None
    bracket = nonexistence_probe(params, bounds, R=req.R, ladder=ladder,
                                 n=req.n, jobs=req.jobs)
    return {
        "lambda_lo": bracket.lambda_lo,
        "lambda_hi": bracket.lambda_hi,
        "rate_lo": bracket.rate_lo,
        "rate_hi": bracket.rate_hi,
        "lambda1": bracket.lambda1,
        "consistent": bracket.consistent,
        "ceiling_crossed": bracket.ceiling_crossed,
        "ladder": list(bracket.ladder),
        "converged": list(bracket.converged),
    }


@app.post("/liouville-probe")
def liouville(req: schemas.LiouvilleRequest) -> dict:
    params = req.params.build()
    rep = liouville_probe(params, r0=req.r0, slopes=tuple(req.slopes),
                          R_max=req.R_max)
    probes = []
    for pr in rep.probes:
        probes.append({
            "slope": pr.slope,
            "classification": pr.classification,
            "outward": dataclasses.asdict(pr.outward) if pr.outward else None,
            "inward": dataclasses.asdict(pr.inward) if pr.inward else None,
        })
    return {"r0": rep.r0, "R_max": rep.R_max, "all_failed": rep.all_failed,
            "probes": probes}

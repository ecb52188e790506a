"""Command-line client for the analysis service.

Every subcommand serialises its arguments into a request, posts it to the
service, and renders the JSON reply.  By default the service runs
in-process (no sockets); ``--server URL`` switches to a remote instance of
``gradlap serve``.  Exit codes mirror error kinds: 1 for domain errors and
CLI misuse, 2 when an iteration fails to converge, 3 when a converged
result misses its accuracy contract.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .serialize import canonical_json

_EXIT_BY_KIND = {"domain": 1, "nonconvergence": 2, "tolerance": 3}

_COMMANDS = (
    "classify", "bernstein", "feasibility", "solve", "eigen", "harnack",
    "weak-harnack", "scalings", "bubble", "blowup", "probe-nonexistence",
    "liouville-probe", "serve",
)

_REQUIRED = {
    "classify": ("N", "m", "p", "q"),
    "bernstein": ("N", "m", "p", "q"),
    "feasibility": ("N", "m"),
    "solve": ("N", "m", "p", "q", "lam", "alpha1"),
    "eigen": ("N", "m"),
    "harnack": ("profile", "R", "lam"),
    "weak-harnack": ("profile", "R", "gamma", "N", "m", "p", "q"),
    "scalings": ("N", "m", "p", "q", "gamma", "mu", "radii"),
    "bubble": ("N", "m", "p", "q"),
    "blowup": ("N", "m", "p", "q"),
    "probe-nonexistence": ("N", "m", "p", "q", "alpha1"),
    "liouville-probe": ("N", "m", "p", "q"),
    "serve": (),
}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(1)


def _floats(text: str) -> list:
    try:
        items = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise _CliError("expected a comma-separated list of numbers, got %r"
                        % text)
    if not items:
        raise _CliError("empty number list %r" % text)
    return items


def _add_params(sub):
    sub.add_argument("--N", type=int, default=None, help="space dimension")
    sub.add_argument("--m", type=float, default=None,
                     help="diffusion exponent of the m-Laplacian")
    sub.add_argument("--p", type=float, default=None,
                     help="gradient power in the source")
    sub.add_argument("--q", type=float, default=None,
                     help="zero-order power in the source")


def _add_bounds(sub):
    sub.add_argument("--alpha1", type=float, default=None,
                     help="leading superlinear exponent of the source")
    sub.add_argument("--alpha2", type=float, default=None,
                     help="secondary exponent (default: admissible midpoint)")
    sub.add_argument("--c0", type=float, default=None, help="structure constant")
    sub.add_argument("--M1", type=float, default=None,
                     help="coefficient of u^alpha1")
    sub.add_argument("--M2", type=float, default=None,
                     help="coefficient of u^alpha2")


def build_parser() -> _Parser:
    parser = _Parser(prog="gradlap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version="gradlap %s" % __version__)
    parser.add_argument("--json", action="store_true",
                        help="print the raw response as canonical JSON")
    parser.add_argument("--out", default=None, metavar="DIR",
                        help="write response.json plus profile.csv/.svg here")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any randomised auxiliaries")
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="'key = value' defaults; flags override")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="talk to a running service instead of in-process")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    sp = subs.add_parser("classify", parents=(), help="regime of (N, m, p, q)")
    _add_params(sp)

    sp = subs.add_parser("bernstein",
                         help="admissible substitution frame and discriminants")
    _add_params(sp)
    sp.add_argument("--beta", type=float, default=None,
                    help="evaluate this frame instead of searching")
    sp.add_argument("--lam", type=float, default=None,
                    help="frame exponent lambda (with --beta)")

    sp = subs.add_parser("feasibility",
                         help="scan the (p, q) strip for the joint window")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--m", type=float, default=None)
    sp.add_argument("--resolution", type=int, default=None)
    sp.add_argument("--q-max", type=float, default=None)
    sp.add_argument("--points", action="store_true",
                    help="include feasible grid points in the response")

    sp = subs.add_parser("solve", help="Dirichlet problem on a ball")
    _add_params(sp)
    _add_bounds(sp)
    sp.add_argument("--lam", type=float, default=None, help="constant source")
    sp.add_argument("--R", type=float, default=None, help="ball radius")
    sp.add_argument("--n", type=int, default=None, help="grid size")
    sp.add_argument("--alpha2-term", action="store_true",
                    help="include the M2 u^alpha2 term")
    sp.add_argument("--omega", type=float, default=None, help="damping factor")
    sp.add_argument("--k-max", type=int, default=None, help="iteration cap")
    sp.add_argument("--homotopy", action="store_true",
                    help="continue down from lam + lam0")
    sp.add_argument("--lam0", type=float, default=None,
                    help="homotopy offset (with --homotopy)")
    sp.add_argument("--schedule", type=str, default=None,
                    help="comma list of homotopy fractions, e.g. 1,0.5,0")

    sp = subs.add_parser("eigen", help="principal Dirichlet eigenpair")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--m", type=float, default=None)
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)

    sp = subs.add_parser("harnack", help="Harnack ratio of a stored profile")
    sp.add_argument("--profile", default=None, metavar="CSV",
                    help="profile file written by --out or solve")
    sp.add_argument("--R", type=float, default=None, help="ball radius")
    sp.add_argument("--lam", type=float, default=None, help="source size")
    sp.add_argument("--m", type=float, default=None,
                    help="diffusion exponent (default 2)")
    sp.add_argument("--center", type=float, default=None,
                    help="|center| of the ball (default 0)")

    sp = subs.add_parser("weak-harnack",
                         help="weak Harnack constant of a stored profile")
    sp.add_argument("--profile", default=None, metavar="CSV")
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None,
                    help="integrability exponent")
    _add_params(sp)

    sp = subs.add_parser("scalings",
                         help="growth exponents of the structural integrals")
    _add_params(sp)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--radii", type=str, default=None,
                    help="comma list of radii spanning a decade or more")
    sp.add_argument("--profile", default=None, metavar="CSV",
                    help="measure this profile instead of the model one")
    sp.add_argument("--r-min", type=float, default=None)
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)

    sp = subs.add_parser("bubble", help="explicit decaying family, fitted")
    _add_params(sp)
    sp.add_argument("--c-max", type=float, default=None)
    sp.add_argument("--r-max", type=float, default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--grid-size", type=int, default=None)
    sp.add_argument("--refinements", type=int, default=None)
    sp.add_argument("--with-profile", action="store_true")
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)

    sp = subs.add_parser("blowup", help="boundary blow-up family by shooting")
    _add_params(sp)
    sp.add_argument("--ladder", type=str, default=None,
                    help="comma list of boundary data, e.g. 1e2,1e3,1e4")
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--cauchy-tol", type=float, default=None)
    sp.add_argument("--with-profile", action="store_true")

    sp = subs.add_parser("probe-nonexistence",
                         help="bracket the lam where solutions stop appearing")
    _add_params(sp)
    _add_bounds(sp)
    sp.add_argument("--ladder", type=str, default=None,
                    help="comma list of lam rungs (>= 2 decades)")
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--jobs", type=int, default=None,
                    help="solve ladder rungs in this many threads")

    sp = subs.add_parser("liouville-probe",
                         help="shoot for entire positive solutions")
    _add_params(sp)
    sp.add_argument("--r0", type=float, default=None)
    sp.add_argument("--slopes", type=str, default=None,
                    help="comma list of trial slopes at r0")
    sp.add_argument("--R-max", type=float, default=None, dest="R_max")

    sp = subs.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)

    return parser


# --------------------------------------------------------------------------
# config file


def _extract_config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise _CliError("--config needs a file argument")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _extract_command(argv):
    for tok in argv:
        if tok in _COMMANDS:
            return tok
    return None


def _parse_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliError("cannot read config file: %s" % exc)
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _CliError("config line %d is not 'key = value': %r"
                            % (lineno, raw.strip()))
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise _CliError("config line %d has an empty key" % lineno)
        entries[key.replace("-", "_")] = val
    return entries


def _as_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise _CliError("expected a boolean, got %r" % text)


def _apply_config(parser, subparsers_by_name, command, entries):
    scopes = [parser]
    if command is not None:
        scopes.append(subparsers_by_name[command])
    for key, sval in entries.items():
        action = None
        owner = None
        for scope in reversed(scopes):  # subcommand options shadow globals
            for cand in scope._actions:
                if cand.dest == key and cand.dest != argparse.SUPPRESS:
                    action, owner = cand, scope
                    break
            if action is not None:
                break
        if action is None:
            raise _CliError("unknown config key %r for command %r"
                            % (key, command or "(none)"))
        if action.nargs == 0:  # store_true
            value = _as_bool(sval)
        elif action.type is not None:
            try:
                value = action.type(sval)
            except (TypeError, ValueError):
                raise _CliError("config key %r: cannot parse %r" % (key, sval))
        else:
            value = sval
        owner.set_defaults(**{key: value})


# --------------------------------------------------------------------------
# transport and payloads


class _Transport:
    def __init__(self, server):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"),
                                        timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette warns about the httpx-based TestClient on import
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path, payload):
        resp = self._client.post(path, json=payload)
        try:
            body = resp.json()
        except ValueError:
            body = {"detail": resp.text}
        return resp.status_code, body


def _require(args, command):
    missing = ["--" + name.replace("_", "-") if name != "N" and name != "R"
               else "--" + name
               for name in _REQUIRED[command]
               if getattr(args, name, None) is None]
    if missing:
        raise _CliError("%s: missing required arguments: %s"
                        % (command, ", ".join(missing)))


def _maybe(payload, key, value):
    if value is not None:
        payload[key] = value


def _params_payload(args):
    return {"N": args.N, "m": args.m, "p": args.p, "q": args.q}


def _bounds_payload(args):
    payload = {"alpha1": args.alpha1}
    _maybe(payload, "alpha2", args.alpha2)
    _maybe(payload, "c0", args.c0)
    _maybe(payload, "M1", args.M1)
    _maybe(payload, "M2", args.M2)
    return payload


def _profile_payload_from_csv(path):
    from .serialize import read_profile_csv

    try:
        profile = read_profile_csv(path)
    except OSError as exc:
        raise _CliError("cannot read profile CSV: %s" % exc)
    return {
        "r": profile.grid.nodes.tolist(),
        "u": profile.values.tolist(),
        "du": profile.derivative().tolist(),
    }


def _build_request(args):
    cmd = args.command
    if cmd == "classify":
        return "/classify", {"params": _params_payload(args)}
    if cmd == "bernstein":
        payload = {"params": _params_payload(args)}
        _maybe(payload, "beta", args.beta)
        _maybe(payload, "lam", args.lam)
        return "/bernstein", payload
    if cmd == "feasibility":
        payload = {"N": args.N, "m": args.m}
        _maybe(payload, "resolution", args.resolution)
        _maybe(payload, "q_max", args.q_max)
        if args.points:
            payload["include_points"] = True
        return "/feasibility", payload
    if cmd == "solve":
        payload = {
            "params": _params_payload(args),
            "bounds": _bounds_payload(args),
            "lam": args.lam,
        }
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        if args.alpha2_term:
            payload["include_alpha2_term"] = True
        _maybe(payload, "omega", args.omega)
        _maybe(payload, "k_max", args.k_max)
        if args.homotopy:
            payload["homotopy"] = True
        _maybe(payload, "lam0", args.lam0)
        if args.schedule is not None:
            payload["schedule"] = _floats(args.schedule)
        return "/solve", payload
    if cmd == "eigen":
        payload = {"N": args.N, "m": args.m}
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        return "/eigen", payload
    if cmd == "harnack":
        payload = {
            "profile": _profile_payload_from_csv(args.profile),
            "R": args.R,
            "lam": args.lam,
        }
        _maybe(payload, "m", args.m)
        _maybe(payload, "center", args.center)
        return "/harnack", payload
    if cmd == "weak-harnack":
        return "/weak-harnack", {
            "profile": _profile_payload_from_csv(args.profile),
            "params": _params_payload(args),
            "R": args.R,
            "gamma": args.gamma,
        }
    if cmd == "scalings":
        payload = {
            "params": _params_payload(args),
            "gamma": args.gamma,
            "mu": args.mu,
            "radii": _floats(args.radii),
        }
        if args.profile is not None:
            payload["profile"] = _profile_payload_from_csv(args.profile)
        _maybe(payload, "r_min", args.r_min)
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        return "/scalings", payload
    if cmd == "bubble":
        payload = {"params": _params_payload(args)}
        _maybe(payload, "C_max", args.c_max)
        _maybe(payload, "r_max", args.r_max)
        _maybe(payload, "tol", args.tol)
        _maybe(payload, "grid_size", args.grid_size)
        _maybe(payload, "refinements", args.refinements)
        if args.with_profile:
            payload["with_profile"] = True
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        return "/bubble", payload
    if cmd == "blowup":
        payload = {"params": _params_payload(args)}
        if args.ladder is not None:
            payload["ladder"] = _floats(args.ladder)
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        _maybe(payload, "cauchy_tol", args.cauchy_tol)
        if args.with_profile:
            payload["with_profile"] = True
        return "/blowup", payload
    if cmd == "probe-nonexistence":
        payload = {
            "params": _params_payload(args),
            "bounds": _bounds_payload(args),
        }
        if args.ladder is not None:
            payload["ladder"] = _floats(args.ladder)
        _maybe(payload, "R", args.R)
        _maybe(payload, "n", args.n)
        _maybe(payload, "jobs", args.jobs)
        return "/probe-nonexistence", payload
    if cmd == "liouville-probe":
        payload = {"params": _params_payload(args)}
        _maybe(payload, "r0", args.r0)
        if args.slopes is not None:
            payload["slopes"] = _floats(args.slopes)
        _maybe(payload, "R_max", args.R_max)
        return "/liouville-probe", payload
    raise _CliError("unknown command %r" % cmd)


# --------------------------------------------------------------------------
# rendering


def _fmt(x):
    if x is None:
        return "n/a"
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return "%.6g" % x
    return str(x)


def _human(cmd, body, out):
    w = out.write
    if cmd == "classify":
        w("classification: %s\n" % body["classification"])
        d = body["derived"]
        w("derived: Q=%s alpha1=%s m*=%s theta=%s margin=%s\n" % (
            _fmt(d["Q"]), _fmt(d["alpha1"]), _fmt(d["m_star"]),
            _fmt(d["theta"]), _fmt(d["subcritical_margin"])))
        for cert in body["certificates"]:
            w("  [%s] %s: %s %s %s\n" % (
                "pass" if cert["passed"] else "fail", cert["name"],
                _fmt(cert["lhs"]), cert["op"], _fmt(cert["rhs"])))
    elif cmd == "bernstein":
        if body["mode"] == "manual":
            w("manual frame: beta=%s lambda=%s (s=%s, s_bar=%s, l=%s)\n" % (
                _fmt(body["beta"]), _fmt(body["lam"]), _fmt(body["s"]),
                _fmt(body["s_bar"]), _fmt(body["l"])))
            w("D=%s positivity_margin=%s\n" % (
                _fmt(body["D"]), _fmt(body["positivity_margin"])))
        else:
            w("%s: beta=%s lambda=%s (s=%s, s_bar=%s, l=%s)\n" % (
                body["case_label"], _fmt(body["beta"]), _fmt(body["lam"]),
                _fmt(body["s"]), _fmt(body["s_bar"]), _fmt(body["l"])))
            w("D=%s D2=%s eps0=%s\n" % (
                _fmt(body["D"]), _fmt(body["D2"]), _fmt(body["eps0"])))
            w("alpha=%s gradient_exponent=%s\n" % (
                _fmt(body["alpha"]), _fmt(body["gradient_exponent"])))
        coeffs = body["coefficients"]
        w("coefficients: %s\n" % " ".join(
            "%s=%s" % (k, _fmt(v)) for k, v in coeffs.items()))
    elif cmd == "feasibility":
        w("feasible points: %d (resolution %d, q_max=%s) empty=%s\n" % (
            body["feasible_count"], body["resolution"], _fmt(body["q_max"]),
            body["empty"]))
        for name in body["predicates"]:
            w("  %-28s holds at %d points, first-to-fail at %d\n" % (
                name, body["counts"][name],
                body["first_fail_counts"].get(name, 0)))
        if body["conflicting_pair"]:
            w("conflicting pair: %s & %s\n" % tuple(body["conflicting_pair"]))
    elif cmd == "solve":
        w("converged in %d iterations at lam=%s\n" % (
            body["iterations"], _fmt(body["lam"])))
        if body.get("stage_lambdas"):
            w("homotopy stages: %s\n" % ", ".join(
                _fmt(x) for x in body["stage_lambdas"]))
        w("sup u=%s residual=%s (l2 %s) gap=%s omega=%s\n" % (
            _fmt(body["sup_u"]), _fmt(body["final_residual"]),
            _fmt(body["residual_l2"]), _fmt(body["fp_gap"]),
            _fmt(body["omega_final"])))
        w("harnack=%s picone_slack=%s positive_interior=%s\n" % (
            _fmt(body["harnack_ratio"]), _fmt(body["picone_slack"]),
            _fmt(body["positive_interior"])))
    elif cmd == "eigen":
        w("lambda1 = %.12g (power estimate %.12g, agreement %.2e)\n" % (
            body["lambda1"], body["power_estimate"],
            abs(body["lambda1"] - body["power_estimate"])))
        w("iterations=%d residual=%s\n" % (
            body["iterations"], _fmt(body["residual_max"])))
    elif cmd == "harnack":
        w("harnack ratio = %.12g (R=%s, lam=%s)\n" % (
            body["ratio"], _fmt(body["R"]), _fmt(body["lam"])))
    elif cmd == "weak-harnack":
        w("weak harnack constant = %.12g (R=%s, gamma=%s)\n" % (
            body["constant"], _fmt(body["R"]), _fmt(body["gamma"])))
    elif cmd == "scalings":
        labels = ("I1 (u^gamma)", "I2 (|du|^mu)", "I3 (mixed)")
        for label, slope, pred, r2 in zip(labels, body["slopes"],
                                          body["predicted"],
                                          body["r_squared"]):
            w("%-14s slope %+9.4f predicted %+9.4f (r^2=%.6f)\n" % (
                label, slope, pred, r2))
        w("well_resolved=%s amplitude=%s\n" % (
            body["well_resolved"], _fmt(body["amplitude"])))
    elif cmd == "bubble":
        if body["feasible"]:
            w("feasible: beta=%.9g C=%.9g (min residual %s, %d levels)\n" % (
                body["beta"], body["C"], _fmt(body["min_residual"]),
                body["levels"]))
        else:
            w("no feasible profile (best residual %s)\n"
              % _fmt(body["min_residual"]))
    elif cmd == "blowup":
        w("mode=%s fitted theta=%.6g predicted %.6g (rel err %.2e)\n" % (
            body["mode"], body["fitted_theta"], body["theta_predicted"],
            abs(body["fitted_theta"] / body["theta_predicted"] - 1.0)))
        w("amplitude fitted=%.6g predicted=%.6g fit r^2=%.6f\n" % (
            body["amplitude_fitted"], body["amplitude_predicted"],
            body["fit_r2"]))
        w("ladder=%s max cauchy gap=%s\n" % (
            ",".join(_fmt(x) for x in body["ladder"]),
            _fmt(max(body["cauchy_gaps"]) if body["cauchy_gaps"] else None)))
    elif cmd == "probe-nonexistence":
        w("bracket: last convergent lam=%s, first divergent lam=%s\n" % (
            _fmt(body["lambda_lo"]), _fmt(body["lambda_hi"])))
        w("l(lam_lo)=%s l(lam_hi)=%s lambda1=%s consistent=%s\n" % (
            _fmt(body["rate_lo"]), _fmt(body["rate_hi"]),
            _fmt(body["lambda1"]), body["consistent"]))
        w("ladder: %s\n" % "  ".join(
            "%s[%s]" % (_fmt(lam), "ok" if ok else "fail")
            for lam, ok in zip(body["ladder"], body["converged"])))
    elif cmd == "liouville-probe":
        for pr in body["probes"]:
            detail = ""
            leg = pr.get("outward") or pr.get("inward")
            if pr["classification"] not in ("constant",) and leg:
                detail = " (r_end=%s, u_end=%s)" % (
                    _fmt(leg["r_end"]), _fmt(leg["u_end"]))
            w("slope %+g: %s%s\n" % (pr["slope"], pr["classification"], detail))
        w("all_failed=%s\n" % body["all_failed"])
    else:
        w(canonical_json(body) + "\n")


def _write_outputs(outdir, cmd, body):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "response.json"), "w",
              encoding="utf-8") as fh:
        fh.write(canonical_json(body) + "\n")
    prof = body.get("profile") if isinstance(body, dict) else None
    if not prof:
        return
    rows = np.column_stack([
        np.asarray(prof["r"], dtype=float),
        np.asarray(prof["u"], dtype=float),
        np.asarray(prof["du"], dtype=float),
    ])
    np.savetxt(os.path.join(outdir, "profile.csv"), rows, fmt="%.17g",
               delimiter=",", header="r,u,du", comments="")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    r, u = rows[:, 0], rows[:, 1]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(r, u, lw=1.2)
    if u.size and np.min(u) > 0.0 and np.max(u) / np.min(u) > 1e3:
        ax.set_yscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("u")
    ax.set_title(cmd)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(outdir, "profile.svg"))
    plt.close(fig)


def _serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    subparsers_by_name = {}
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            subparsers_by_name = action.choices
    try:
        config_path = _extract_config_path(argv)
        if config_path is not None:
            entries = _parse_config_file(config_path)
            _apply_config(parser, subparsers_by_name,
                          _extract_command(argv), entries)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a command is required")
        np.random.seed(args.seed % (2 ** 32))
        if args.command == "serve":
            return _serve(args)
        _require(args, args.command)
        path, payload = _build_request(args)
        transport = _Transport(args.server)
        status, body = transport.post(path, payload)
    except _CliError as exc:
        print("gradlap: error: %s" % exc, file=sys.stderr)
        return 1
    except ConnectionError as exc:
        print("gradlap: connection failed: %s" % exc, file=sys.stderr)
        return 1

    if status >= 400:
        kind = body.get("kind") if isinstance(body, dict) else None
        detail = body.get("detail") if isinstance(body, dict) else body
        print("gradlap: %s error: %s" % (kind or "request", detail),
              file=sys.stderr)
        return _EXIT_BY_KIND.get(kind, 1)

    if args.out:
        _write_outputs(args.out, args.command, body)
    if args.json:
        sys.stdout.write(canonical_json(body) + "\n")
    else:
        _human(args.command, body, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Results go to standard output as JSON (sorted keys, full resolved
configuration embedded) or CSV.  Exit status: 0 for a computed result
(including ``not_found`` and ``violated``), 2 for input errors, 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import sdp
from .certify import (
    UCP_TOL,
    CertifyError,
    NumericalFailure,
    UcpMapSpec,
    extract_certificate,
    hull_project_membership,
    member_eps,
    norm_upper,
    ucp_check,
)
from .freealg import ParseError, SignatureError, parse_poly
from .heisenberg import butterfly, butterfly_csv
from .qmodule import PRESETS, ModuleError, module_from_dict, module_to_dict, preset
from .repsearch import SearchConfig, SearchError, format_tuple, search, unitary_dilate

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

QUERIES = ("norm", "member", "ucp", "hull", "search", "dilate", "butterfly", "presets")

# fields a problem file may carry, with their defaults
PROBLEM_DEFAULTS = {
    "query": None,
    "module": None,
    "poly": None,
    "d": 2,
    "eps": 0.0,
    "n": 1,
    "restarts": 32,
    "iterations": 300,
    "seed": 0,
    "grid": 64,
    "qmax": 12,
    "jobs": 1,
    "mode": "auto",
    "exact": True,
    "allow_non_archimedean": False,
    "sdp_tol": sdp.DEFAULT_TOL,
    "max_iter": sdp.DEFAULT_MAX_ITER,
    "ucp_tol": UCP_TOL,
    "feas_tol": 1e-8,
    "basis": None,
    "images": None,
    "x": None,
    "scan": None,
    "matrix": None,
}


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# problem files


def parse_problem(data: dict) -> dict:
    """Validate a problem dictionary and fill defaults."""
    if not isinstance(data, dict):
        raise InputError("problem file must hold a JSON object")
    unknown = sorted(set(data) - set(PROBLEM_DEFAULTS))
    if unknown:
        raise InputError(f"unknown field(s) in problem file: {', '.join(unknown)}")
    out = dict(PROBLEM_DEFAULTS)
    out.update(data)
    if out["query"] is not None and out["query"] not in QUERIES:
        raise InputError(f"field 'query' must be one of {', '.join(QUERIES)}")
    for k in ("d", "n", "restarts", "iterations", "seed", "grid", "qmax", "jobs", "max_iter"):
        if not isinstance(out[k], int) or isinstance(out[k], bool):
            raise InputError(f"field {k!r} must be an integer")
    for k in ("eps", "sdp_tol", "ucp_tol", "feas_tol"):
        if not isinstance(out[k], (int, float)) or isinstance(out[k], bool):
            raise InputError(f"field {k!r} must be a number")
    return out


def format_problem(problem: dict) -> str:
    return json.dumps({k: v for k, v in problem.items() if v != PROBLEM_DEFAULTS.get(k, object())},
                      sort_keys=True, indent=2)


def load_problem(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read problem file: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"problem file is not valid JSON: {e}") from None
    return parse_problem(data)


def _resolve_module(cfg: dict):
    mod = cfg["module"]
    if mod is None:
        raise InputError("no module given (use --preset, --module-file or the 'module' field)")
    try:
        if isinstance(mod, str):
            return preset(mod)
        return module_from_dict(mod)
    except (ModuleError, ParseError, SignatureError, KeyError, TypeError) as e:
        raise InputError(f"field 'module': {e}") from None


def _poly(cfg, Q, field="poly"):
    text = cfg[field]
    if text is None:
        raise InputError(f"missing field {field!r}")
    try:
        return parse_poly(text, Q.sig)
    except ParseError as e:
        raise InputError(f"field {field!r}: {e}") from None


# ---------------------------------------------------------------------------
# JSON helpers


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def _emit(obj, out) -> None:
    out.write(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n")


def _matrix(text_or_list, what: str) -> np.ndarray:
    try:
        val = json.loads(text_or_list) if isinstance(text_or_list, str) else text_or_list
        M = np.array(_to_complex(val), dtype=complex)
    except (json.JSONDecodeError, TypeError, ValueError) as e:
        raise InputError(f"{what}: cannot read matrix ({e})") from None
    M = np.atleast_2d(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"{what}: matrix must be square")
    return M


def _to_complex(v):
    if isinstance(v, list):
        return [_to_complex(t) for t in v]
    if isinstance(v, str):
        return complex(v.replace("i", "j").replace(" ", ""))
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_norm(cfg, out):
    Q = _resolve_module(cfg)
    a = _poly(cfg, Q)
    try:
        up = norm_upper(a, Q, cfg["d"], mode=cfg["mode"], exact=cfg["exact"],
                        allow_non_archimedean=cfg["allow_non_archimedean"], tol=cfg["sdp_tol"],
                        max_iter=cfg["max_iter"])
    except (CertifyError, ModuleError) as e:
        raise InputError(str(e)) from None
    if up.status not in (sdp.OPTIMAL, sdp.INFEASIBLE):
        raise NumericalFailure(f"norm SDP ended with status {up.status}")
    scfg = _search_cfg(cfg)
    sr = search(a, Q, scfg)
    result = {
        "query": "norm",
        "config": dict(cfg),
        "module": module_to_dict(Q),
        "status": up.status,
        "upper": up.value,
        "lower": sr.value,
        "width": up.value - sr.value,
        "mode": up.mode,
        "per_mode": up.per_mode,
        "lower_violation": sr.violation,
        "lower_restart": sr.restart,
        "residuals": up.residuals,
        "point": format_tuple(sr.X, Q.sig),
    }
    _emit(result, out)
    return EXIT_OK


def _search_cfg(cfg) -> SearchConfig:
    try:
        return SearchConfig(n=cfg["n"], restarts=cfg["restarts"], iterations=cfg["iterations"], seed=cfg["seed"],
                            jobs=cfg["jobs"], feas_tol=cfg["feas_tol"])
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_member(cfg, out):
    Q = _resolve_module(cfg)
    a = _poly(cfg, Q)
    try:
        r = member_eps(a, Q, cfg["d"], cfg["eps"], exact=cfg["exact"], tol=cfg["sdp_tol"], max_iter=cfg["max_iter"])
    except (CertifyError, ModuleError) as e:
        raise InputError(str(e)) from None
    result = {
        "query": "member",
        "config": dict(cfg),
        "status": r.status,
        "d": r.d,
        "sdp_status": r.sdp_status,
        "residuals": r.residuals,
    }
    if r.certificate is not None:
        result["certificate"] = r.certificate.to_dict()
        dec = extract_certificate(r.certificate)
        result["decomposition"] = dec.text
        result["residuals"]["decomposition"] = dec.residual
    _emit(result, out)
    return EXIT_OK


def _basis(cfg, Q):
    if not cfg["basis"]:
        raise InputError("missing field 'basis'")
    try:
        return [parse_poly(t, Q.sig) for t in cfg["basis"]]
    except ParseError as e:
        raise InputError(f"field 'basis': {e}") from None


def cmd_ucp(cfg, out):
    Q = _resolve_module(cfg)
    basis = _basis(cfg, Q)
    if not cfg["images"] or len(cfg["images"]) != len(basis):
        raise InputError("field 'images' needs one matrix per basis element")
    imgs = [_matrix(m, "field 'images'") for m in cfg["images"]]
    try:
        spec = UcpMapSpec(basis, imgs)
        r = ucp_check(spec, Q, cfg["d"], exact=cfg["exact"], tol=cfg["ucp_tol"], sdp_tol=cfg["sdp_tol"],
                      max_iter=cfg["max_iter"])
    except (CertifyError, ModuleError) as e:
        raise InputError(str(e)) from None
    result = {
        "query": "ucp",
        "config": dict(cfg),
        "status": r.status,
        "value": r.value,
        "d": r.d,
        "witness": r.witness,
        "sdp_status": r.sdp_status,
        "residuals": r.residuals,
    }
    _emit(result, out)
    return EXIT_OK


def cmd_hull(cfg, out):
    Q = _resolve_module(cfg)
    basis = _basis(cfg, Q)
    try:
        if cfg["scan"]:
            if len(basis) != 2:
                raise InputError("a circle scan needs exactly two basis elements")
            k = int(cfg["scan"])
            out.write("theta,x,y,status,value\n")
            for j in range(k):
                th = 2 * math.pi * j / k
                r = hull_project_membership([math.cos(th), math.sin(th)], basis, Q, cfg["d"], exact=cfg["exact"],
                                            tol=cfg["ucp_tol"])
                out.write(f"{th:.12g},{math.cos(th):.12g},{math.sin(th):.12g},{r.status},{r.value:.12g}\n")
            return EXIT_OK
        if cfg["x"] is None:
            raise InputError("missing field 'x'")
        r = hull_project_membership(cfg["x"], basis, Q, cfg["d"], exact=cfg["exact"], tol=cfg["ucp_tol"])
    except (CertifyError, ModuleError) as e:
        raise InputError(str(e)) from None
    result = {
        "query": "hull",
        "config": dict(cfg),
        "status": r.status,
        "value": r.value,
        "d": r.d,
        "witness": r.witness,
        "residuals": r.residuals,
    }
    _emit(result, out)
    return EXIT_OK


def cmd_search(cfg, out):
    Q = _resolve_module(cfg)
    a = _poly(cfg, Q)
    try:
        sr = search(a, Q, _search_cfg(cfg))
    except ModuleError as e:
        raise InputError(str(e)) from None
    result = {
        "query": "search",
        "config": dict(cfg),
        "status": "found",
        "value": sr.value,
        "violation": sr.violation,
        "restart": sr.restart,
        "point": format_tuple(sr.X, Q.sig),
    }
    _emit(result, out)
    return EXIT_OK


def cmd_dilate(cfg, out):
    if cfg["matrix"] is None:
        raise InputError("missing field 'matrix'")
    T = _matrix(cfg["matrix"], "field 'matrix'")
    try:
        U = unitary_dilate(T)
    except ValueError as e:
        raise InputError(str(e)) from None
    s = T.shape[0]
    result = {
        "query": "dilate",
        "config": dict(cfg),
        "status": "ok",
        "unitary_residual": float(np.abs(U.conj().T @ U - np.eye(2 * s)).max()),
        "block_residual": float(np.abs(U[:s, :s] - T).max()),
        "unitary": [[[z.real, z.imag] for z in row] for row in U],
    }
    _emit(result, out)
    return EXIT_OK


def cmd_butterfly(cfg, out):
    if cfg["qmax"] < 1 or cfg["grid"] < 2:
        raise InputError("need qmax >= 1 and grid >= 2")
    recs = butterfly(cfg["qmax"], cfg["grid"], jobs=cfg["jobs"])
    out.write(butterfly_csv(recs))
    return EXIT_OK


def cmd_presets(cfg, out):
    _emit({"query": "presets", "config": dict(cfg), "presets": PRESETS}, out)
    return EXIT_OK


COMMANDS = {
    "norm": cmd_norm, "member": cmd_member, "ucp": cmd_ucp, "hull": cmd_hull, "search": cmd_search,
    "dilate": cmd_dilate, "butterfly": cmd_butterfly, "presets": cmd_presets,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmodcert", description="Positivity certificates and norm brackets "
                                 "in quadratic modules of free and group *-algebras.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, module=True):
        p.add_argument("--problem", help="JSON problem file; flags override its fields")
        if module:
            p.add_argument("--preset", help="module preset, e.g. free_group:2 (see 'presets')")
            p.add_argument("--module-file", help="JSON module description")
            p.add_argument("--d", type=int, help="truncation degree (default 2)")
            p.add_argument("--no-exact", dest="exact", action="store_const", const=False,
                           help="use ideal multipliers instead of normal forms")
            p.add_argument("--sdp-tol", type=float, help=f"SDP tolerance (default {sdp.DEFAULT_TOL:g})")
            p.add_argument("--max-iter", type=int, help=f"SDP iteration cap (default {sdp.DEFAULT_MAX_ITER})")

    def searchopts(p):
        p.add_argument("--n", type=int, help="representation dimension (default 1)")
        p.add_argument("--restarts", type=int, help="random restarts (default 32)")
        p.add_argument("--iterations", type=int, help="ascent iterations per restart (default 300)")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--jobs", type=int, help="parallel workers (default 1)")
        p.add_argument("--feas-tol", type=float, help="feasibility tolerance (default 1e-8)")

    p = sub.add_parser("norm", help="two-sided norm bracket")
    common(p)
    searchopts(p)
    p.add_argument("--poly")
    p.add_argument("--mode", choices=["auto", "square", "hermitian"])
    p.add_argument("--allow-non-archimedean", action="store_const", const=True)

    p = sub.add_parser("member", help="search for a certificate of a + eps in Q_d")
    common(p)
    p.add_argument("--poly")
    p.add_argument("--eps", type=float)

    p = sub.add_parser("ucp", help="Choi test of a map on a unital *-subspace")
    common(p)
    p.add_argument("--basis", action="append", help="basis polynomial (repeat)")
    p.add_argument("--image", dest="images", action="append", help="JSON matrix per basis element (repeat)")
    p.add_argument("--ucp-tol", type=float)

    p = sub.add_parser("hull", help="membership in the projection of the state space")
    common(p)
    p.add_argument("--basis", action="append", help="hermitian basis polynomial (repeat)")
    p.add_argument("--x", type=float, nargs="+", help="coordinates of the point")
    p.add_argument("--scan", type=int, help="scan this many points of the unit circle (CSV)")
    p.add_argument("--ucp-tol", type=float)

    p = sub.add_parser("search", help="lower bound by representation search")
    common(p)
    searchopts(p)
    p.add_argument("--poly")

    p = sub.add_parser("dilate", help="unitary dilation of a contraction")
    common(p, module=False)
    p.add_argument("--matrix", help="JSON square matrix; complex entries as strings like '1+2i'")

    p = sub.add_parser("butterfly", help="Harper norm boundary as CSV")
    common(p, module=False)
    p.add_argument("--qmax", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--jobs", type=int)

    sub.add_parser("presets", help="list module presets")
    return ap


def _merge(args) -> dict:
    cfg = load_problem(args.problem) if getattr(args, "problem", None) else dict(PROBLEM_DEFAULTS)
    if cfg.get("query") not in (None, args.command):
        raise InputError(f"problem file is for query {cfg['query']!r}, not {args.command!r}")
    cfg["query"] = args.command
    if getattr(args, "preset", None) and getattr(args, "module_file", None):
        raise InputError("give either --preset or --module-file, not both")
    if getattr(args, "preset", None):
        cfg["module"] = args.preset
    if getattr(args, "module_file", None):
        try:
            with open(args.module_file) as fh:
                cfg["module"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read module file: {e}") from None
    for k, v in vars(args).items():
        if k in ("command", "problem", "preset", "module_file") or v is None:
            continue
        cfg[k] = v
    return parse_problem(cfg)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](cfg, out)
    except (InputError, ParseError, SignatureError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, SearchError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())

"""``geoflow`` command-line interface.

Every command is deterministic and writes a ``<output>.manifest.json`` next
to its main artifact with the full parameters, library versions and SHA-256
checksums of inputs and outputs.  Exit status 1 signals an error raised by
the library, 2 a bad command line or configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__, io, soliton
from ._kernels import BACKEND_NAME
from .curvegeo import DiscreteCurve, frenet_analyze, tangent_map
from .errors import ConfigError, GeoflowError, NotArclength
from .flows import (AXIAL, KDV, LIE, SCHRODINGER, FlowKind, FlowState, SphereMap, StepControl,
                    energy_e1, energy_e2, simulate, stability_bound)
from .hasimoto import (ComplexProfile, fit_gauge, hasimoto_transform, mkdv_residual, nls_residual,
                       profile_from_sphere_map)
from .surface import (ChartCurve, KillingFieldSpec, SurfaceOfRevolution, catenoid_band, cylinder,
                      gaussian_bump, sphere)

log = logging.getLogger("geoflow")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise ConfigError(message)


# --- config --------------------------------------------------------------------

def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, keys use dashes or underscores."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as exc:
        raise ConfigError(f"no such config file: {path}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        val = val.strip()
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            val = val[1:-1]
        out[key.strip().replace("-", "_")] = val
    return out


def _positive(kind=float):
    def conv(text):
        try:
            val = kind(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid number {text!r}") from exc
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    return conv


def surface_from_dict(d: Optional[dict]) -> Optional[SurfaceOfRevolution]:
    if not d:
        return None
    kind = d.get("kind")
    if kind == "sphere":
        return sphere()
    if kind == "cylinder":
        return cylinder(float(d.get("r0", 1.0)))
    if kind == "gaussian_bump":
        return gaussian_bump(float(d.get("amp", 0.3)), float(d.get("base", 1.0)), float(d.get("r_max", 4.0)))
    if kind == "catenoid_band":
        return catenoid_band()
    if kind == "custom":
        if "table" not in d:
            raise ConfigError("custom surfaces need a table path")
        return io.read_surface_table(d["table"])
    raise ConfigError(f"unknown surface kind {kind!r}")


def _surface_args(args) -> Optional[SurfaceOfRevolution]:
    if not getattr(args, "surface", None):
        return None
    d = {"kind": args.surface, "r0": args.r0, "table": args.table}
    return surface_from_dict({k: v for k, v in d.items() if v is not None})


def _surface_dict(surface: Optional[SurfaceOfRevolution]) -> Optional[dict]:
    if surface is None:
        return None
    d = surface.describe()
    d.pop("name", None)
    return d


# --- payload and spec serialization --------------------------------------------

def payload_to_dict(p) -> dict:
    if isinstance(p, DiscreteCurve):
        d = {"type": "curve", "points": p.points, "spacing": p.spacing, "closed": p.closed,
             "param_kind": p.param_kind}
        if p.monodromy is not None:
            d["monodromy"] = {"rot": p.monodromy[0], "shift": p.monodromy[1]}
        return d
    if isinstance(p, SphereMap):
        d = {"type": "sphere", "u": p.u, "spacing": p.spacing}
        if p.rot is not None:
            d["rot"] = p.rot
        return d
    if isinstance(p, ChartCurve):
        return {"type": "chart", "r": p.r, "theta": p.theta, "spacing": p.spacing, "closed": p.closed,
                "theta_jump": p.theta_jump, "r_jump": p.r_jump}
    raise ConfigError(f"cannot serialize {type(p).__name__}")


def payload_from_dict(d: dict):
    try:
        kind = d["type"]
        if kind == "curve":
            mono = d.get("monodromy")
            mono = None if mono is None else (np.asarray(mono["rot"], float), np.asarray(mono["shift"], float))
            return DiscreteCurve(np.asarray(d["points"], float), float(d["spacing"]), bool(d["closed"]),
                                 d.get("param_kind", "general"), mono)
        if kind == "sphere":
            rot = d.get("rot")
            return SphereMap(np.asarray(d["u"], float), float(d["spacing"]), True,
                             None if rot is None else np.asarray(rot, float))
        if kind == "chart":
            return ChartCurve(np.asarray(d["r"], float), np.asarray(d["theta"], float), float(d["spacing"]),
                              bool(d["closed"]), float(d.get("theta_jump", 0.0)), float(d.get("r_jump", 0.0)))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed generator record ({exc})") from exc
    raise ConfigError(f"unknown generator type {d.get('type')!r}")


def _killing_dict(k) -> dict:
    if isinstance(k, soliton.AmbientKilling):
        return {"ambient": True, **k.to_dict()}
    return {"omega": k.omega, "sigma": k.sigma}


def _killing_from_dict(d: dict):
    if d.get("ambient"):
        return soliton.AmbientKilling(float(d["omega"]), tuple(d["axis"]), tuple(d["point"]),
                                      tuple(d["translation"]))
    return KillingFieldSpec(float(d.get("omega", 0.0)), float(d.get("sigma", 0.0)))


def _flow_dict(f: FlowKind) -> dict:
    return {"name": f.name, "alpha": f.alpha, "beta": f.beta}


def spec_to_dict(spec: soliton.SolitonSpec, generator_csv: Optional[str] = None) -> dict:
    family = dict(spec.meta)
    gen = {"csv": generator_csv} if generator_csv else payload_to_dict(spec.generator)
    return {"flow_kind": spec.flow_kind.name, "flow": _flow_dict(spec.flow_kind), "c": spec.c,
            "killing": _killing_dict(spec.killing), "surface": _surface_dict(spec.surface),
            "generator": gen, "family": family, "verified": bool(spec.verified),
            "residual": spec.residual}


FAMILY_BUILDERS = {}


def _family(name):
    def deco(fn):
        FAMILY_BUILDERS[name] = fn
        return fn
    return deco


@_family("cylinder")
def _build_cylinder(p):
    return soliton.cylinder_kdv_soliton(float(p["r"]), float(p["k"]), float(p.get("sigma", 0.0)),
                                        float(p.get("C1", 0.0)), float(p.get("C2", 0.0)),
                                        float(p.get("C3", 0.0)), int(p.get("n", 512)))


@_family("parallel")
def _build_parallel(p):
    surf = surface_from_dict(p["surface"])
    return soliton.parallel_kdv_soliton(surf, float(p["c"]), float(p["omega"]), float(p.get("m", 1.0)),
                                        int(p.get("n", 256)), int(p.get("index", 0)))


@_family("elastic")
def _build_elastic(p):
    return soliton.elastic_lie_soliton(soliton.ElasticParams.from_kpw(float(p["k0"]), float(p["p"]),
                                                                      float(p["w"])), int(p.get("n", 1024)))


@_family("magnetic")
def _build_magnetic(p):
    om, a, rho0 = float(p["omega"]), float(p["a"]), float(p["rho0"])
    V = soliton.AmbientKilling(om, translation=(0.0, 0.0, a))
    return soliton.kmg_soliton(V, (rho0, 0.0, 0.0), (0.0, a, -om * rho0), int(p.get("n", 256)))


@_family("greatcircle")
def _build_greatcircle(p):
    return soliton.great_circle_kdv_soliton(int(p.get("n", 256)))


def spec_from_dict(d: dict) -> soliton.SolitonSpec:
    """Rebuild a spec; known families are reconstructed exactly from their parameters."""
    fam = d.get("family") or {}
    name = fam.get("family")
    if name in FAMILY_BUILDERS and "params" in fam:
        return FAMILY_BUILDERS[name](fam["params"])
    gen_d = d.get("generator") or {}
    if "csv" in gen_d:
        gen, _ = io.read_curve(gen_d["csv"])
        if isinstance(gen, DiscreteCurve) and d.get("flow_kind") in (SCHRODINGER, KDV):
            gen = SphereMap.from_curve(gen)
    else:
        gen = payload_from_dict(gen_d)
    flow = d.get("flow") or {"name": d.get("flow_kind")}
    try:
        fk = FlowKind(flow["name"], float(flow.get("alpha", 1.0)), float(flow.get("beta", 0.0)))
        return soliton.SolitonSpec(gen, _killing_from_dict(d.get("killing") or {}), float(d.get("c", 0.0)), fk,
                                   surface_from_dict(d.get("surface")), meta=dict(fam))
    except GeoflowError as exc:
        raise ConfigError(f"invalid soliton spec: {exc}") from exc


# --- manifests -------------------------------------------------------------------

def versions() -> dict:
    return {"geoflow": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": BACKEND_NAME}


def write_manifest(out_path, command: str, params: dict, inputs=(), outputs=()) -> Path:
    out_path = Path(out_path)
    man = {"command": command,
           "params": {k: params[k] for k in sorted(params)},
           "versions": versions(),
           "inputs": {str(p): io.sha256(p) for p in inputs},
           "outputs": {str(p): io.sha256(p) for p in outputs}}
    path = out_path.with_name(out_path.name + ".manifest.json")
    io.write_json(path, man)
    return path


def _params(args) -> dict:
    skip = {"func", "config"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, (list, tuple)) else v
    return out


# --- trajectory records ------------------------------------------------------------

def _energies(payload, surface):
    try:
        if isinstance(payload, DiscreteCurve):
            payload = SphereMap.from_curve(tangent_map(payload))
        return energy_e1(payload, surface), energy_e2(payload, surface)
    except (NotArclength, GeoflowError):
        return None, None


def frame_record(state: FlowState) -> dict:
    e1, e2 = _energies(state.payload, state.surface)
    rec = {"t": state.time, "flow": state.flow.name}
    rec.update(payload_to_dict(state.payload))
    rec["e1"], rec["e2"] = e1, e2
    return rec


def _load_input(args):
    """Initial payload, surface and boundary callable for ``simulate``."""
    surface = _surface_args(args)
    boundary = None
    if args.spec:
        spec = spec_from_dict(io.read_json(args.spec))
        state = soliton.initial_state(spec)
        return state.payload, spec.surface or surface, state.boundary, [args.spec]
    if not args.input:
        raise ConfigError("simulate needs --input or --spec")
    payload, _ = io.read_curve(args.input)
    if args.flow in (SCHRODINGER, KDV) and isinstance(payload, DiscreteCurve):
        if not payload.closed:
            raise ConfigError("sphere-map input must be closed")
        payload = SphereMap.from_curve(payload)
    if isinstance(payload, ChartCurve) and surface is None:
        raise ConfigError("chart-curve input needs --surface")
    return payload, surface, boundary, [args.input]


def cmd_simulate(args) -> int:
    payload, surface, boundary, inputs = _load_input(args)
    flow = FlowKind.axial(args.alpha, args.beta) if args.flow == AXIAL else FlowKind(args.flow)
    if args.dt is None:
        nsteps = int(np.ceil(args.t_end / stability_bound(flow, payload.spacing)))
        every = args.save_every or max(1, nsteps // 10)
        # whole save intervals keep the frames uniformly spaced in time
        nsteps = every * int(np.ceil(nsteps / every))
        dt = args.t_end / nsteps
    else:
        dt = args.dt
        nsteps = max(1, int(round(args.t_end / dt)))
        every = args.save_every or max(1, nsteps // 10)
        if nsteps % every:
            log.warning("%d steps are not a multiple of --save-every %d; the last frame is closer", nsteps, every)
    state = FlowState(0.0, payload, flow, surface, boundary)
    frames = simulate(state, StepControl(dt, nsteps * dt, save_every=every), args.backend)
    io.write_jsonl(args.out, (frame_record(f) for f in frames))
    write_manifest(args.out, "simulate", _params(args), inputs, [args.out])
    log.info("wrote %d frames to %s", len(frames), args.out)
    return 0


def _complex_frames(records: list) -> list:
    """Hasimoto fields of trajectory records (curves or sphere maps) or stored phi records."""
    out = []
    for rec in records:
        if "re" in rec:
            phi = np.asarray(rec["re"], float) + 1j * np.asarray(rec["im"], float)
            s = np.asarray(rec["s"], float)
            out.append(ComplexProfile(phi, float(rec.get("spacing", s[1] - s[0])), bool(rec.get("closed", True)),
                                      float(rec.get("holonomy", 0.0)), float(rec["t"])))
            continue
        p = payload_from_dict(rec)
        if isinstance(p, DiscreteCurve):
            prof = frenet_analyze(p)[1]
        elif isinstance(p, SphereMap):
            prof = profile_from_sphere_map(p.u, p.spacing, p.rot)
        else:
            raise ConfigError("the Hasimoto transform needs space curves or sphere maps")
        out.append(hasimoto_transform(prof, t=float(rec["t"])))
    return out


def cmd_hasimoto(args) -> int:
    frames = _complex_frames(io.read_jsonl(args.traj))
    fit = fit_gauge(frames)
    recs = [{"t": f.t, "s": f.s, "re": f.phi.real, "im": f.phi.imag, "A": a, "spacing": f.spacing,
             "closed": f.closed, "holonomy": f.holonomy} for f, a in zip(frames, fit.a_of_t)]
    io.write_jsonl(args.out, recs)
    write_manifest(args.out, "hasimoto", _params(args), [args.traj], [args.out])
    print(io.dumps({"frames": len(frames), "gauge_residual_l2": fit.residual_norm}))
    return 0


def _residual_of(path: str, kind: str) -> dict:
    frames = _complex_frames(io.read_jsonl(path))
    if kind == "nls":
        fit = fit_gauge(frames)
        rep = nls_residual(frames, fit.a_of_t)
        extra = {"A_spread": float(np.ptp(fit.a_of_t)), "A_mean": float(np.mean(fit.a_of_t))}
    else:
        rep = mkdv_residual(frames)
        extra = {}
    return {"traj": path, "n": frames[0].n, "h": frames[0].spacing, "sup": rep.sup_residual,
            "l2": rep.l2_residual, **extra}


def convergence_table(rows: list) -> list:
    """Rows sorted coarse to fine with the sup-residual ratio to the previous row."""
    rows = sorted(rows, key=lambda r: -r["h"])
    prev = None
    for r in rows:
        r["ratio"] = None if prev is None or r["sup"] == 0 else prev["sup"] / r["sup"]
        prev = r
    return rows


def cmd_residual(args) -> int:
    paths = list(args.traj)
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_residual_of, paths, [args.kind] * len(paths)))
    else:
        rows = [_residual_of(p, args.kind) for p in paths]
    print(format(rows[0]["sup"], ".17g"))
    table = convergence_table(rows)
    if len(table) > 1:
        print(f"{'n':>8} {'h':>14} {'sup':>14} {'l2':>14} {'ratio':>8}")
        for r in table:
            ratio = "" if r["ratio"] is None else f"{r['ratio']:.3f}"
            print(f"{r['n']:>8d} {r['h']:>14.6e} {r['sup']:>14.6e} {r['l2']:>14.6e} {ratio:>8}")
    if args.out:
        io.write_json(args.out, {"kind": args.kind, "table": table})
        write_manifest(args.out, "residual", _params(args), paths, [args.out])
    return 0


def _family_params(args) -> dict:
    fam = args.family
    if fam == "cylinder":
        _need(args, "r", "k")
        names = ("r", "k", "sigma", "C1", "C2", "C3", "n")
    elif fam == "parallel":
        _need(args, "c", "omega")
        names = ("c", "omega", "m", "n", "index")
    elif fam == "elastic":
        _need(args, "k0", "p", "w")
        names = ("k0", "p", "w", "n")
    elif fam == "magnetic":
        _need(args, "omega", "a", "rho0")
        names = ("omega", "a", "rho0", "n")
    else:
        names = ("n",)
    p = {k: getattr(args, k) for k in names if getattr(args, k) is not None}
    if fam == "parallel":
        p["surface"] = _surface_dict(_surface_args(args)) or {"kind": "sphere"}
        if args.surface == "custom":
            p["surface"] = {"kind": "custom", "table": str(args.table)}
    return p


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"family {args.family} needs --{', --'.join(missing)}")


def cmd_soliton_make(args) -> int:
    params = _family_params(args)
    spec = FAMILY_BUILDERS[args.family](params)
    spec = replace(spec, meta={**spec.meta, "family": args.family, "params": params})
    d = spec_to_dict(spec)
    io.write_json(args.out, d)
    write_manifest(args.out, "soliton make", _params(args), [], [args.out])
    print(io.dumps({"family": args.family, "verified": spec.verified, "residual": spec.residual,
                    "killing": d["killing"], "c": spec.c}))
    return 0


def cmd_soliton_verify(args) -> int:
    spec = spec_from_dict(io.read_json(args.spec))
    rep = soliton.reduced_residual(spec)
    out = {"equation_id": rep.equation_id, "sup_residual": rep.sup_residual, "l2_residual": rep.l2_residual,
           "tol": args.tol, "verified": rep.sup_residual < args.tol}
    out.update({k: v for k, v in rep.extras.items() if np.isscalar(v)})
    if args.flow_check:
        fc = soliton.flow_check(spec, args.t_end, args.dt, backend=args.backend)
        out["flow_check"] = {"t_end": args.t_end, "dt": fc["dt"], "nsteps": fc["nsteps"],
                             "sup_error": fc["sup_error"], "times": fc["times"], "errors": fc["errors"]}
    if args.report:
        io.write_json(args.report, out)
        write_manifest(args.report, "soliton verify", _params(args), [args.spec], [args.report])
    print(io.dumps({k: v for k, v in out.items() if k != "flow_check"}))
    return 0 if out["verified"] else 1


def cmd_elastic(args) -> int:
    params = soliton.ElasticParams.from_kpw(args.k0, args.p, args.w)
    prof = soliton.elastic_profile(params, args.length, args.n)
    rep = soliton.elastic_residual(prof, params)
    an = soliton.elastic_residual_analytic(params, prof.s)
    d1, d2 = params.relation_defects()
    summary = {**params.to_dict(), "n": args.n, "length": prof.length, "closed": prof.closed,
               "fd_residual": rep.sup_residual, "analytic_residual": float(np.max(np.abs(an))),
               "first_integral_spread": rep.extras["first_integral_spread"],
               "relation_defects": [d1, d2]}
    io.write_profile_csv(args.out, prof, {"k0": params.k0, "p": params.p, "w": params.w,
                                          "lambda": params.lam, "c": params.c})
    outputs = [args.out]
    if args.report:
        io.write_json(args.report, summary)
        outputs.append(args.report)
    write_manifest(args.out, "elastic", _params(args), [], outputs)
    print(io.dumps(summary))
    return 0


def trajectory_report(records: list) -> dict:
    ts = [r["t"] for r in records]
    out = {"frames": len(records), "t_start": ts[0], "t_end": ts[-1], "flow": records[0].get("flow")}
    for key in ("e1", "e2"):
        vals = [r.get(key) for r in records]
        if all(v is not None for v in vals):
            base = abs(vals[0]) if vals[0] else 1.0
            out[f"{key}_drift"] = max(abs(v - vals[0]) for v in vals) / base
    if records[0].get("type") == "sphere":
        out["norm_defect"] = max(float(np.max(np.abs(np.linalg.norm(np.asarray(r["u"]), axis=1) - 1.0)))
                                 for r in records)
    p0 = _payload_array_of(records[0])
    out["max_displacement"] = max(float(np.max(np.abs(_payload_array_of(r) - p0))) for r in records)
    return out


def _payload_array_of(rec) -> np.ndarray:
    if rec["type"] == "chart":
        return np.stack([rec["r"], rec["theta"]], axis=1)
    return np.asarray(rec["points"] if rec["type"] == "curve" else rec["u"], float)


def cmd_report(args) -> int:
    rep = trajectory_report(io.read_jsonl(args.traj))
    io.write_json(args.out, rep)
    write_manifest(args.out, "report", _params(args), [args.traj], [args.out])
    print(io.dumps(rep))
    return 0


# --- parser ------------------------------------------------------------------------

def _add_surface(p):
    p.add_argument("--surface", choices=["sphere", "cylinder", "gaussian_bump", "catenoid_band", "custom"])
    p.add_argument("--r0", type=_positive(), help="cylinder radius")
    p.add_argument("--table", help="CSV r,f,f_r,f_rr,g,g_r for --surface custom")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="geoflow", description="Geometric curve flows, Hasimoto transforms and solitons.")
    ap.add_argument("--config", help="flat key = value file supplying option defaults")
    ap.add_argument("--version", action="version", version=f"geoflow {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="integrate a flow and write a JSON lines trajectory")
    p.add_argument("--flow", required=True, choices=[LIE, AXIAL, SCHRODINGER, KDV])
    p.add_argument("--input", help="curve CSV (s,x,y,z or s,r,theta)")
    p.add_argument("--spec", help="soliton spec JSON whose generator is the initial data")
    p.add_argument("--dt", type=_positive(), help="time step (default: the stability bound)")
    p.add_argument("--t-end", type=_positive(), required=True)
    p.add_argument("--save-every", type=_positive(int), help="steps between saved frames")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--backend", choices=["python", "cython"])
    p.add_argument("--out", required=True)
    _add_surface(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hasimoto", help="Hasimoto fields Phi of a trajectory, with fitted A(t)")
    p.add_argument("--traj", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hasimoto)

    p = sub.add_parser("residual", help="NLS or mKdV residual of trajectories, with a convergence table")
    p.add_argument("--kind", required=True, choices=["nls", "mkdv"])
    p.add_argument("--traj", required=True, action="append", help="repeat for a refinement sequence")
    p.add_argument("--jobs", type=_positive(int), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("soliton", help="construct or verify geometric solitons")
    ssub = p.add_subparsers(dest="action", parser_class=_Parser)
    ssub.required = True
    m = ssub.add_parser("make")
    m.add_argument("--family", required=True, choices=sorted(["cylinder", "parallel", "elastic", "magnetic",
                                                              "greatcircle"]))
    for name in ("r", "k", "sigma", "C1", "C2", "C3", "c", "omega", "m", "k0", "p", "w", "a", "rho0"):
        m.add_argument(f"--{name}", type=float)
    m.add_argument("--n", type=_positive(int))
    m.add_argument("--index", type=int)
    m.add_argument("--out", required=True)
    _add_surface(m)
    m.set_defaults(func=cmd_soliton_make)
    v = ssub.add_parser("verify")
    v.add_argument("--spec", required=True)
    v.add_argument("--tol", type=_positive(), default=1e-6)
    v.add_argument("--flow-check", action="store_true")
    v.add_argument("--t-end", type=_positive(), default=0.01)
    v.add_argument("--dt", type=_positive())
    v.add_argument("--backend", choices=["python", "cython"])
    v.add_argument("--report")
    v.set_defaults(func=cmd_soliton_verify)

    p = sub.add_parser("elastic", help="sample an elastic curvature profile")
    p.add_argument("--k0", type=_positive(), default=1.0)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--n", type=_positive(int), default=1024)
    p.add_argument("--length", type=_positive())
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_elastic)

    p = sub.add_parser("report", help="summarize a trajectory: energy drift, constraint defect")
    p.add_argument("--traj", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def _subparser_for(ap, argv):
    """The innermost subparser named by argv (for applying config defaults)."""
    parser = ap
    for tok in argv:
        acts = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
        if not acts:
            break
        if tok in acts[0].choices:
            parser = acts[0].choices[tok]
    return parser


def parse(argv) -> argparse.Namespace:
    ap = build_parser()
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        target = _subparser_for(ap, argv)
        dests = {a.dest for a in target._actions}
        unknown = sorted(set(cfg) - dests)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for a in target._actions:
            if a.dest in cfg:
                a.required = False
        target.set_defaults(**cfg)
    args = ap.parse_args(argv)
    # string defaults from the config still need conversion for store_true flags
    for key, val in list(vars(args).items()):
        if isinstance(val, str) and val.lower() in ("true", "false") and key == "flow_check":
            setattr(args, key, val.lower() == "true")
    return args


def _setup_logging():
    level = os.environ.get("GEOFLOW_LOG", "error").lower()
    if level not in LOG_LEVELS:
        raise ConfigError(f"GEOFLOW_LOG must be one of {', '.join(LOG_LEVELS)}")
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        _setup_logging()
        args = parse(argv)
    except ConfigError as exc:
        return _fail(2, exc)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(2, exc)
    except (GeoflowError, ValueError) as exc:
        return _fail(1, exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""File formats: CSV curves and profiles, JSON lines trajectories, JSON reports.

CSV files start with ``# key=value`` metadata lines followed by a header row.
JSON output pins floats to 17 significant digits so identical runs produce
byte-identical files, and every file is written atomically.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .curvegeo import ARCLENGTH, GENERAL, DiscreteCurve, IntrinsicProfile
from .errors import ConfigError
from .surface import ChartCurve

CURVE_HEADER = ("s", "x", "y", "z")
CHART_HEADER = ("s", "r", "theta")
PROFILE_HEADER = ("s", "k", "tau")


# --- JSON -----------------------------------------------------------------

def _encode(obj, out: list):
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format(x, ".17g") if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(obj):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if i:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written as %.17g (non-finite floats become null)."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj) + "\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def write_jsonl(path, records: Iterable[dict]) -> None:
    atomic_write(path, "".join(dumps(r) + "\n" for r in records))


def read_jsonl(path) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if ln.strip()]
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    try:
        return [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON line ({exc})") from exc


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# --- CSV ------------------------------------------------------------------------

def _format_csv(meta: dict, header, columns) -> str:
    buf = _io.StringIO()
    for key, val in meta.items():
        if val is None:
            continue
        if isinstance(val, (list, tuple, np.ndarray)):
            val = dumps(val)
        elif isinstance(val, bool):
            val = int(val)
        elif isinstance(val, float):
            val = format(val, ".17g")
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def read_csv(path):
    """Return ``(meta, header, data)`` of a metadata-prefixed CSV file."""
    meta = {}
    rows = []
    header = None
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            for line in fh:
                s = line.strip()
                if not s:
                    continue
                if s.startswith("#"):
                    key, sep, val = s[1:].partition("=")
                    if sep:
                        meta[key.strip()] = val.strip()
                    continue
                if header is None:
                    header = tuple(x.strip() for x in next(csv.reader([s])))
                    continue
                rows.append([float(x) for x in next(csv.reader([s]))])
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric CSV entry ({exc})") from exc
    if header is None:
        raise ConfigError(f"{path}: missing header row")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return meta, header, data


def _meta_bool(meta, key, default=False) -> bool:
    val = meta.get(key)
    if val is None:
        return default
    if val not in ("0", "1", "true", "false"):
        raise ConfigError(f"metadata {key} must be 0 or 1")
    return val in ("1", "true")


def _meta_float(meta, key, default=None):
    val = meta.get(key)
    if val is None:
        return default
    try:
        return float(val)
    except ValueError as exc:
        raise ConfigError(f"metadata {key} must be a number") from exc


def _spacing(meta, s) -> float:
    h = _meta_float(meta, "spacing")
    if h is None:
        if s.size < 2:
            raise ConfigError("cannot infer spacing from fewer than two samples")
        h = float(s[1] - s[0])
    return h


def write_curve_csv(path, curve: DiscreteCurve) -> None:
    meta = {"closed": curve.closed, "spacing": float(curve.spacing), "param_kind": curve.param_kind}
    if curve.monodromy is not None:
        meta["monodromy_rot"] = np.asarray(curve.monodromy[0]).ravel()
        meta["monodromy_shift"] = np.asarray(curve.monodromy[1])
    p = curve.points
    atomic_write(path, _format_csv(meta, CURVE_HEADER, (curve.s, p[:, 0], p[:, 1], p[:, 2])))


def write_chart_csv(path, curve: ChartCurve, surface: dict = None) -> None:
    meta = {"closed": curve.closed, "spacing": float(curve.spacing),
            "theta_jump": float(curve.theta_jump), "r_jump": float(curve.r_jump)}
    for key, val in (surface or {}).items():
        meta[f"surface.{key}"] = val
    atomic_write(path, _format_csv(meta, CHART_HEADER, (curve.x, curve.r, curve.theta)))


def write_profile_csv(path, profile: IntrinsicProfile, extra: dict = None) -> None:
    meta = {"closed": profile.closed, "spacing": float(profile.spacing), **(extra or {})}
    atomic_write(path, _format_csv(meta, PROFILE_HEADER, (profile.s, profile.k, profile.tau)))


def read_curve(path):
    """Read a curve CSV: ``s,x,y,z`` gives a DiscreteCurve, ``s,r,theta`` a ChartCurve.

    Returns ``(payload, meta)``.
    """
    meta, header, data = read_csv(path)
    if header == CURVE_HEADER:
        kind = meta.get("param_kind", GENERAL)
        if kind not in (ARCLENGTH, GENERAL):
            raise ConfigError(f"unknown param_kind {kind!r}")
        mono = None
        if "monodromy_rot" in meta:
            rot = np.array(json.loads(meta["monodromy_rot"]), float).reshape(3, 3)
            shift = np.array(json.loads(meta.get("monodromy_shift", "[0, 0, 0]")), float)
            mono = (rot, shift)
        curve = DiscreteCurve(data[:, 1:4], _spacing(meta, data[:, 0]), _meta_bool(meta, "closed"),
                              kind, mono)
        return curve, meta
    if header == CHART_HEADER:
        curve = ChartCurve(data[:, 1], data[:, 2], _spacing(meta, data[:, 0]), _meta_bool(meta, "closed"),
                           _meta_float(meta, "theta_jump", 0.0), _meta_float(meta, "r_jump", 0.0))
        return curve, meta
    raise ConfigError(f"{path}: header must be {','.join(CURVE_HEADER)} or {','.join(CHART_HEADER)}")


def read_profile(path) -> IntrinsicProfile:
    meta, header, data = read_csv(path)
    if header != PROFILE_HEADER:
        raise ConfigError(f"{path}: header must be {','.join(PROFILE_HEADER)}")
    return IntrinsicProfile(data[:, 1], data[:, 2], _spacing(meta, data[:, 0]), _meta_bool(meta, "closed"))


def read_surface_table(path):
    """Custom surface profile CSV ``r,f,f_r,f_rr,g,g_r``."""
    from .surface import from_table

    _, header, data = read_csv(path)
    if header != ("r", "f", "f_r", "f_rr", "g", "g_r"):
        raise ConfigError(f"{path}: header must be r,f,f_r,f_rr,g,g_r")
    return from_table(*data.T, name=str(path))


__all__ = [
    "dumps", "atomic_write", "write_json", "read_json", "write_jsonl", "read_jsonl", "sha256",
    "read_csv", "write_curve_csv", "write_chart_csv", "write_profile_csv", "read_curve",
    "read_profile", "read_surface_table",
]

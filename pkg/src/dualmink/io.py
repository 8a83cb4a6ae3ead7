"""JSON/CSV readers and writers for bodies, problems, solutions and densities.

Body files::

    {"type": "ellipsoid", "axes": [...], "rotation": [[...]], "center": [...]}
    {"type": "polytope", "vertices": [[...]]}
    {"type": "ball", "radius": r, "center": [...], "n": 3}
    {"type": "support_field", "n": 3, "L": 32, "values": [...]}

Problem files::

    {"n": 3, "p": 0.0, "q": 3.0,
     "f": {"constant": 1.0, "harmonics": [{"k": 2, "m": 0, "coef": 0.01}]}}

JSON output is written with sorted keys so equal inputs give equal bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .bodies import Ellipsoid, Polytope, SupportBody, ball
from .solver import ProblemSpec
from .sphere import build_grid

__all__ = [
    "InputError",
    "load_json",
    "parse_body",
    "parse_problem",
    "load_body",
    "load_problem",
    "dump_json",
    "write_json",
    "write_field_csv",
]


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _array(spec, key, ndim):
    if key not in spec:
        raise InputError(f"missing field {key!r}")
    try:
        a = np.asarray(spec[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"field {key!r} is not numeric") from exc
    if a.ndim != ndim:
        raise InputError(f"field {key!r} must have {ndim} dimension(s)")
    return a


def parse_body(spec):
    """Build a body from a parsed body-file dict."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise InputError("body spec must be an object with a 'type' field")
    kind = spec["type"]
    if kind == "ellipsoid":
        rot = _array(spec, "rotation", 2) if "rotation" in spec else None
        center = _array(spec, "center", 1) if "center" in spec else None
        return Ellipsoid(_array(spec, "axes", 1), rotation=rot, center=center)
    if kind == "polytope":
        return Polytope(_array(spec, "vertices", 2))
    if kind == "ball":
        if "radius" not in spec:
            raise InputError("ball needs a 'radius'")
        center = _array(spec, "center", 1) if "center" in spec else None
        n = int(spec.get("n", len(center) if center is not None else 3))
        return ball(float(spec["radius"]), center=center, n=n)
    if kind == "support_field":
        values = _array(spec, "values", 1)
        n = int(spec.get("n", 3))
        if "L" not in spec:
            raise InputError("support_field needs 'L'")
        grid = build_grid(n, int(spec["L"]))
        if values.size != grid.size:
            raise InputError(f"support_field has {values.size} values, grid needs {grid.size}")
        return SupportBody.from_values(grid, values)
    raise InputError(f"unknown body type {kind!r}")


def parse_problem(spec):
    """Build a :class:`ProblemSpec` from a parsed problem-file dict."""
    try:
        n, p, q = int(spec["n"]), float(spec["p"]), float(spec["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"problem needs numeric n, p, q ({exc})") from exc
    f = spec.get("f", 1.0)
    if isinstance(f, (int, float)):
        data = float(f)
    elif isinstance(f, dict):
        try:
            harmonics = [
                (int(h["k"]), h["m"] if isinstance(h["m"], str) else int(h["m"]), float(h["coef"]))
                for h in f.get("harmonics", [])
            ]
            data = (float(f.get("constant", 1.0)), harmonics)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad harmonic entry ({exc})") from exc
    else:
        raise InputError("'f' must be a number or an object")
    return ProblemSpec(n, p, q, data)


def load_body(path):
    return parse_body(load_json(path))


def load_problem(path):
    return parse_problem(load_json(path))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dump_json(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dump_json(obj), encoding="utf-8")


def write_field_csv(path, directions, values, name="value"):
    """One row per node: index, direction components, value."""
    directions = np.asarray(directions)
    n = directions.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node"] + [f"x{i}" for i in range(n)] + [name])
        for i, (x, v) in enumerate(zip(directions, values)):
            w.writerow([i] + [repr(float(c)) for c in x] + [repr(float(v))])

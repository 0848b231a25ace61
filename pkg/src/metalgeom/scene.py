"""Scene files: JSON documents holding a chart, its fields and the checks to run.

Layout (keys are written in this order)::

    {
      "name": "...",                 optional, used to label report rows
      "dimension": 2,
      "backend": "rational" | "float",
      "p": "1", "q": "6",            rational strings
      "fields": {"g": [[...]], "J": [[...]], "connection": [[[...]]], "tau": [...]},
      "points": [["0", "1"], ...],
      "checks": ["GD8", ...],
      "flags": ["Pure", "Metallic", ...]
    }

``connection`` is indexed ``[k][i][j]`` for the coefficient of ``d_k`` in
``nabla_{d_i} d_j``; omitted ``connection``/``tau`` mean zero. Entries are
expression strings in the chart-field grammar. Asserted flags are re-audited
at every point when a scene is loaded.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .fields import contains_float, parse_array, text_array
from .fixtures import FLAGS, Fixture, audit_fixture
from .kernel import MetallicParams
from .numeric import format_scalar, get_backend, parse_scalar
from .verifier import CHECK_IDS


class SceneError(ValueError):
    """Malformed scene document (shape, type or vocabulary problem)."""


def _shape(data, depth: int, n: int, what: str):
    if depth == 0:
        if not isinstance(data, (str, int)) or isinstance(data, bool):
            raise SceneError(f"{what}: entries must be expression strings")
        return
    if not isinstance(data, list) or len(data) != n:
        raise SceneError(f"{what}: expected {n} entries at every level")
    for item in data:
        _shape(item, depth - 1, n, what)


def _parse_rational(text, what: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise SceneError(f"{what} must be a rational string, got {text!r}") from None


def _params(p: Fraction, q: Fraction, backend) -> MetallicParams:
    return MetallicParams(p, q) if backend.exact else MetallicParams(float(p), float(q))


def scene_from_dict(doc: dict, name: Optional[str] = None) -> Fixture:
    if not isinstance(doc, dict):
        raise SceneError("scene must be a JSON object")
    for key in ("dimension", "backend", "p", "q", "fields", "points"):
        if key not in doc:
            raise SceneError(f"missing key {key!r}")
    n = doc["dimension"]
    if not isinstance(n, int) or n < 1:
        raise SceneError("dimension must be a positive integer")
    try:
        backend = get_backend(doc["backend"])
    except (KeyError, ValueError):
        raise SceneError(f"unknown backend {doc['backend']!r}") from None
    params = _params(_parse_rational(doc["p"], "p"), _parse_rational(doc["q"], "q"), backend)
    fields = doc["fields"]
    if not isinstance(fields, dict) or "g" not in fields or "J" not in fields:
        raise SceneError("fields must contain g and J")
    unknown = set(fields) - {"g", "J", "connection", "tau"}
    if unknown:
        raise SceneError(f"unknown fields {sorted(unknown)}")
    parsed = {}
    for key, depth in (("g", 2), ("J", 2), ("connection", 3), ("tau", 1)):
        if key in fields:
            _shape(fields[key], depth, n, key)
            arr = parse_array(fields[key], n)
            if backend.exact and any(contains_float(e) for e in arr.flat):
                raise SceneError(f"{key}: decimal literals are not allowed on the rational backend")
            parsed[key] = arr
    points = []
    for pt in doc["points"]:
        if not isinstance(pt, list) or len(pt) != n:
            raise SceneError(f"point {pt!r} does not have {n} coordinates")
        try:
            points.append(tuple(parse_scalar(str(c)) for c in pt))
        except (ValueError, ZeroDivisionError):
            raise SceneError(f"point {pt!r} has a malformed coordinate") from None
    if not points:
        raise SceneError("scene has no points")
    checks = tuple(doc.get("checks", ()))
    bad = [c for c in checks if c not in CHECK_IDS]
    if bad:
        raise SceneError(f"unknown checks {bad}")
    flags = frozenset(doc.get("flags", ()))
    bad = sorted(flags - set(FLAGS))
    if bad:
        raise SceneError(f"unknown flags {bad}")
    fx = Fixture(name=doc.get("name") or name or "scene", dim=n, params=params, backend=backend,
                 g=parsed["g"], J=parsed["J"], conn=parsed.get("connection"), tau=parsed.get("tau"),
                 points=tuple(points), flags=flags, checks=checks)
    audit_fixture(fx)
    return fx


def load_scene(path: Union[str, Path]) -> Fixture:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: invalid JSON ({exc})") from None
    return scene_from_dict(doc, name=path.stem)


def _coords(pt) -> list:
    return [format_scalar(Fraction(c) if isinstance(c, int) else c) for c in pt]


def scene_to_dict(fx: Fixture, checks: Optional[Sequence[str]] = None) -> dict:
    fields = {"g": text_array(fx.g), "J": text_array(fx.J)}
    if fx.conn is not None:
        fields["connection"] = text_array(fx.conn)
    if fx.tau is not None:
        fields["tau"] = text_array(fx.tau)
    p, q = fx.params.p, fx.params.q
    return {
        "name": fx.name,
        "dimension": fx.dim,
        "backend": fx.backend.name,
        "p": format_scalar(Fraction(p)),
        "q": format_scalar(Fraction(q)),
        "fields": fields,
        "points": [_coords(pt) for pt in fx.points],
        "checks": list(checks if checks is not None else fx.checks),
        "flags": sorted(fx.flags),
    }


def dumps_scene(fx: Fixture, checks: Optional[Sequence[str]] = None) -> str:
    return json.dumps(scene_to_dict(fx, checks), indent=2, ensure_ascii=False) + "\n"


def save_scene(fx: Fixture, path: Union[str, Path], checks: Optional[Sequence[str]] = None) -> None:
    Path(path).write_text(dumps_scene(fx, checks), encoding="utf-8")

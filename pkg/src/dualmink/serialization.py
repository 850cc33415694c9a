"""JSON file formats for bodies, measures, and solve results.

Body format (coordinates are row vectors of length n):

    {"type": "polytope", "normals": [[...], ...], "support": [...]}
    {"type": "ellipsoid", "axes": [[...], ...], "semiaxes": [...]}
    {"type": "barrier", "k": int, "params": [...], "axes": [[...], ...]}

Measure format:

    {"n": int, "pairs": [{"dir": [...], "weight": w}, ...]}

A file is valid iff the corresponding type invariants hold; the loaders
canonicalize measure representatives and merge duplicate directions.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bodies import BarrierBody, Ellipsoid, SymmetricPolytope
from .errors import DualMinkError, SchemaError
from .measures import DiscreteEvenMeasure


def body_to_dict(body) -> dict:
    if isinstance(body, SymmetricPolytope):
        return {"type": "polytope", "normals": body.normals.tolist(),
                "support": body.support.tolist()}
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "axes": body.axes.tolist(),
                "semiaxes": body.semiaxes.tolist()}
    if isinstance(body, BarrierBody):
        return {"type": "barrier", "k": int(body.k), "params": body.params.tolist(),
                "axes": body.axes.tolist()}
    raise SchemaError(f"cannot serialize body of type {type(body).__name__}")


def body_from_dict(data: dict):
    if not isinstance(data, dict) or "type" not in data:
        raise SchemaError("body JSON must be an object with a 'type' field")
    kind = data["type"]
    try:
        if kind == "polytope":
            return SymmetricPolytope(np.asarray(data["normals"], dtype=float),
                                     np.asarray(data["support"], dtype=float))
        if kind == "ellipsoid":
            return Ellipsoid(np.asarray(data["axes"], dtype=float),
                             np.asarray(data["semiaxes"], dtype=float))
        if kind == "barrier":
            return BarrierBody(np.asarray(data["axes"], dtype=float),
                               int(data["k"]),
                               np.asarray(data["params"], dtype=float))
    except KeyError as exc:
        raise SchemaError(f"body JSON is missing field {exc}") from exc
    except (DualMinkError, ValueError, TypeError) as exc:
        raise SchemaError(f"invalid '{kind}' body: {exc}") from exc
    raise SchemaError(f"unknown body type {kind!r}")


def measure_to_dict(mu: DiscreteEvenMeasure) -> dict:
    return {"n": int(mu.dim),
            "pairs": [{"dir": d.tolist(), "weight": float(w)}
                      for d, w in zip(mu.directions, mu.weights)]}


def measure_from_dict(data: dict) -> DiscreteEvenMeasure:
    if not isinstance(data, dict):
        raise SchemaError("measure JSON must be an object")
    try:
        n = int(data["n"])
        pairs = data["pairs"]
        dirs = np.asarray([p["dir"] for p in pairs], dtype=float)
        weights = np.asarray([p["weight"] for p in pairs], dtype=float)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"measure JSON is missing or malforms field: {exc}") from exc
    if dirs.ndim != 2 or dirs.shape[1] != n:
        raise SchemaError(f"measure directions must have length n = {n}")
    try:
        return DiscreteEvenMeasure(dirs, weights)
    except (DualMinkError, ValueError) as exc:
        raise SchemaError(f"invalid measure: {exc}") from exc


def load_body(path):
    return body_from_dict(_read_json(path))


def save_body(body, path) -> None:
    _write_json(body_to_dict(body), path)


def load_measure(path) -> DiscreteEvenMeasure:
    return measure_from_dict(_read_json(path))


def save_measure(mu: DiscreteEvenMeasure, path) -> None:
    _write_json(measure_to_dict(mu), path)


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(data: dict, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")

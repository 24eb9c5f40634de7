"""Canonical JSON/CSV output and input schemas used by the CLI.

Floats are written with 17 significant digits so every emitted number
parses back to the identical double.
"""

from __future__ import annotations

import json
import math
from typing import IO, Iterable, Sequence

import numpy as np

GRAPH_SCHEMA = {
    "type": "object",
    "required": ["n", "edges"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tail", "head"],
                "properties": {
                    "tail": {"type": "integer"},
                    "head": {"type": "integer"},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
    },
}

MATRIX_SCHEMA = {
    "type": "object",
    "required": ["entries"],
    "properties": {
        "kind": {"enum": ["symmetric", "flow", "consensus", "balanced"]},
        "entries": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}

HAMILTONIAN_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["quadratic", "kinetic", "exponential", "polynomial"]},
        "params": {"type": ["object", "array", "null"]},
    },
}

COMPLEX_SCHEMA = {
    "type": "object",
    "required": ["cells", "boundaries"],
    "properties": {
        "cells": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2},
        "boundaries": {
            "type": "object",
            "patternProperties": {
                "^d[0-9]+$": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
            },
        },
    },
}


def format_float(x: float) -> str:
    return format(x, ".17g")


def _encode(obj) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return "null" if not math.isfinite(obj) else format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    return _encode(obj)


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[float]]):
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(format_float(float(v)) if not isinstance(v, str) else v
                              for v in row) + "\n")

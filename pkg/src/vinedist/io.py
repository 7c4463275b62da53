"""Vine files and report documents.

Both are JSON.  Vine files hold ``d``, ``structure``, ``families``, ``par1``
and ``par2`` as d x d nested lists laid out exactly like the printed
matrices.  Family codes are ``"I" "N" "t" "C" "G" "F" "J"`` with an ``"s"``
prefix for survival versions and ``"0"`` for unused slots.  Reals are
written with 17 significant digits so that files round-trip exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .vine import VineSpec

FIELDS = ("d", "structure", "families", "par1", "par2")


def _real(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    text = format(x, ".17g")
    if x == int(x) and "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_encode(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if obj and all(isinstance(x, (list, tuple, np.ndarray)) for x in obj):
            rows = [f"{pad}  {_encode(x, indent + 1)}" for x in obj]
            return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
        return "[" + ", ".join(_encode(x, indent + 1) for x in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """Serialise nested dicts/lists/numbers with 17-digit reals and stable key order."""
    return _encode(obj) + "\n"


def vine_to_dict(r: VineSpec) -> dict:
    d = r.d
    return {
        "d": d,
        "structure": r.structure.tolist(),
        "families": r.family_codes(),
        "par1": [[float(r.par1[i, j]) if i > j else 0.0 for j in range(d)] for i in range(d)],
        "par2": [[float(r.par2[i, j]) if i > j else 0.0 for j in range(d)] for i in range(d)],
    }


def write_vine(r: VineSpec, path) -> None:
    Path(path).write_text(dumps(vine_to_dict(r)))


def vine_from_dict(doc: dict, source: str = "<document>") -> VineSpec:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object with fields {', '.join(FIELDS)}")
    for name in FIELDS:
        if name not in doc:
            raise ParseError(f"{source}: missing field '{name}'")
    d = doc["d"]
    if not isinstance(d, int) or d < 2:
        raise ParseError(f"{source}: field 'd' must be an integer >= 2")
    mats = {}
    for name in FIELDS[1:]:
        val = doc[name]
        if not isinstance(val, list) or len(val) != d or any(
                not isinstance(row, list) or len(row) != d for row in val):
            raise ParseError(f"{source}: field '{name}' must be a {d}x{d} list of rows")
        mats[name] = val
    try:
        structure = np.array(mats["structure"], dtype=float)
        par1 = np.array(mats["par1"], dtype=float)
        par2 = np.array(mats["par2"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: non-numeric matrix entry ({exc})") from None
    if np.any(structure != np.round(structure)):
        raise ParseError(f"{source}: field 'structure' must hold integers")
    families = [[str(x) for x in row] for row in mats["families"]]
    return VineSpec.from_matrices(structure.astype(np.int64), families, par1, par2)


def loads_vine(text: str, source: str = "<document>") -> VineSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return vine_from_dict(doc, source)


def read_vine(path) -> VineSpec:
    """Parse and validate a vine file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    return loads_vine(text, str(path))

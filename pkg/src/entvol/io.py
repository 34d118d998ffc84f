"""Flat-file formats.

States are JSON objects ``{"n": N, "re": [...], "im": [...]}`` holding the
row-major real and imaginary parts; a state file is one object per line
(a single JSON array of such objects is accepted on input).  Result files
are JSON documents with a ``header`` (tool, version, command, full
configuration), a ``summary`` and a ``records`` array, plus a CSV mirror
of the records.  Every float is written with 17 significant digits, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import InvalidData

__all__ = ["fmt", "to_jsonable", "dumps", "write_json", "write_csv", "write_states", "read_states"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_jsonable(obj):
    """Plain containers from dataclasses, numpy arrays and scalars."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _encode(obj, out: list, indent: int | None, level: int):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            out.append((sep if i else "") + pad + json.dumps(str(k)) + ": ")
            _encode(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        out.append("[")
        for i, v in enumerate(obj):
            if flat:
                out.append(", " if i else "")
            else:
                out.append((sep if i else "") + pad)
            _encode(v, out, indent, level + 1)
        out.append("]" if flat else end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = 1) -> str:
    out: list[str] = []
    _encode(to_jsonable(obj), out, indent, 0)
    return "".join(out)


def write_json(obj, path) -> None:
    text = dumps(obj) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_csv(rows: list[dict], path) -> None:
    """One row per record; floats as 17 significant digits."""
    rows = [to_jsonable(r) for r in rows]
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow(["" if r.get(k) is None else fmt(r[k]) if isinstance(r[k], float) else r[k]
                        for k in keys])
    Path(path).write_text(buf.getvalue())


def state_to_json(rho) -> str:
    rho = np.asarray(rho, dtype=complex)
    return dumps({"n": rho.shape[0], "re": rho.real.ravel(), "im": rho.imag.ravel()}, indent=None)


def write_states(rhos, path) -> None:
    lines = "".join(state_to_json(r) + "\n" for r in rhos)
    if path is None or str(path) == "-":
        sys.stdout.write(lines)
    else:
        Path(path).write_text(lines)


def _state_from_obj(obj) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(n * n)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidData(f"malformed state object: {exc}") from None
    if re.size != n * n or im.size != n * n:
        raise InvalidData(f"state with n={n} needs {n * n} entries per part")
    return (re + 1j * im).reshape(n, n)


def read_states(source) -> list[np.ndarray]:
    """Parse a state file (path or open text stream)."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    text = text.strip()
    if not text:
        return []
    try:
        if text.startswith("["):
            objs = json.loads(text)
        else:
            objs = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise InvalidData(f"invalid JSON in state input: {exc}") from None
    return [_state_from_obj(o) for o in objs]

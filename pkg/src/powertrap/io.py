"""Matrix ingestion (dense CSV, Matrix Market coordinate) and JSON reports."""
import json
import math
import os
from dataclasses import asdict, is_dataclass

import numpy as np

from .errors import ParseError, ShapeError

__all__ = ["load_matrix", "write_matrix", "to_jsonable", "dumps", "dump_json"]

SCHEMA = "power-trap/1"


def _format_of(path, fmt):
    if fmt:
        f = fmt.lower().replace("-", "")
        if f in ("csv",):
            return "csv"
        if f in ("mm", "mtx", "matrixmarket"):
            return "mm"
        raise ValueError(f"unknown matrix format {fmt!r}")
    return "mm" if str(path).lower().endswith((".mtx", ".mm")) else "csv"


def load_matrix(path, fmt=None):
    """Read a dense matrix.

    Parameters
    ----------
    path : str
    fmt : {'csv', 'mm'}, optional
        Guessed from the extension when omitted (``.mtx`` means Matrix
        Market).
    """
    fmt = _format_of(path, fmt)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    return _read_mm(lines) if fmt == "mm" else _read_csv(lines)


def _read_csv(lines):
    rows = []
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as exc:
            raise ParseError(f"line {i}: {exc}") from exc
    if not rows:
        raise ShapeError("empty matrix file")
    width = len(rows[0])
    for i, r in enumerate(rows, 1):
        if len(r) != width:
            raise ShapeError(f"row {i} has {len(r)} entries, expected {width}")
    return np.array(rows, dtype=float)


def _read_mm(lines):
    if not lines:
        raise ParseError("line 1: empty file")
    head = lines[0].lower().split()
    if len(head) != 5 or head[0] != "%%matrixmarket" or head[1] != "matrix":
        raise ParseError("line 1: missing %%MatrixMarket matrix header")
    if head[2] != "coordinate" or head[3] not in ("real", "integer"):
        raise ParseError("line 1: only 'coordinate real' matrices are supported")
    if head[4] not in ("general", "symmetric"):
        raise ParseError(f"line 1: unsupported symmetry '{head[4]}'")
    sym = head[4] == "symmetric"
    i = 1
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("%")):
        i += 1
    if i == len(lines):
        raise ParseError(f"line {i + 1}: missing size line")
    try:
        nr, nc, nnz = (int(x) for x in lines[i].split())
    except ValueError as exc:
        raise ParseError(f"line {i + 1}: bad size line") from exc
    A = np.zeros((nr, nc))
    count = 0
    for j in range(i + 1, len(lines)):
        s = lines[j].strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        try:
            r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"line {j + 1}: bad entry {s!r}") from exc
        if not (1 <= r <= nr and 1 <= c <= nc):
            raise ShapeError(f"line {j + 1}: index ({r},{c}) out of range")
        A[r - 1, c - 1] = v
        if sym and r != c:
            A[c - 1, r - 1] = v
        count += 1
    if count != nnz:
        raise ParseError(f"expected {nnz} entries, found {count}")
    return A


def write_matrix(A, path, fmt=None):
    """Write ``A`` so that :func:`load_matrix` recovers it exactly."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    fmt = _format_of(path, fmt)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if fmt == "csv":
            for row in A:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
            return
        nz = np.argwhere(A != 0)
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {len(nz)}\n")
        for r, c in nz:
            fh.write(f"{r + 1} {c + 1} {float(A[r, c])!r}\n")


def _round12(x):
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def to_jsonable(obj):
    """Convert reports to plain JSON values; floats keep 12 significant
    digits so the output is stable across platforms."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round12(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    if callable(obj):
        return None
    return str(obj)


def dumps(report):
    body = {"schema": SCHEMA}
    body.update(to_jsonable(report))
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def dump_json(report, path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))

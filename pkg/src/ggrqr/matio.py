"""Matrix Market (dense array) and headerless CSV readers/writers.

Values are written with 17 significant digits, which round-trips every
finite float64. Non-finite values are rejected here so the kernels never
have to check.
"""

import math
from pathlib import Path

import numpy as np

from .errors import MatrixParseError
from .matcore import DenseMatrix

MM_HEADER = "%%MatrixMarket matrix array real general"
FORMATS = ("mm", "csv")
_EXT = {".mtx": "mm", ".mm": "mm", ".csv": "csv"}


def guess_format(path):
    try:
        return _EXT[Path(path).suffix.lower()]
    except KeyError:
        raise ValueError(f"cannot infer matrix format from {path!s}; pass format=")


def _number(token, lineno):
    try:
        x = float(token)
    except ValueError:
        raise MatrixParseError("token", lineno, f"not a number: {token!r}") from None
    if not math.isfinite(x):
        raise MatrixParseError("value", lineno, f"non-finite value {token!r}")
    return x


def _fmt(x):
    return format(x, ".17g")


def _parse_mm(lines):
    if not lines or lines[0].strip().split() != MM_HEADER.split():
        got = lines[0].strip() if lines else "<empty file>"
        raise MatrixParseError("header", 1, f"expected '{MM_HEADER}', got '{got}'")
    body = [
        (lineno, text.strip())
        for lineno, text in enumerate(lines[1:], start=2)
        if text.strip() and not text.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixParseError("count", len(lines), "missing size line")
    size_line, size_text = body[0]
    dims = size_text.split()
    if len(dims) != 2:
        raise MatrixParseError("header", size_line, f"size line needs 2 integers: {size_text!r}")
    try:
        rows, cols = (int(d) for d in dims)
    except ValueError:
        raise MatrixParseError("token", size_line, f"bad size line {size_text!r}") from None
    if rows < 1 or cols < 1:
        raise MatrixParseError("header", size_line, f"nonpositive size {rows}x{cols}")
    values = []
    for lineno, text in body[1:]:
        tokens = text.split()
        if len(tokens) != 1:
            raise MatrixParseError("token", lineno, f"expected one value, got {text!r}")
        values.append(_number(tokens[0], lineno))
    if len(values) != rows * cols:
        last = body[-1][0]
        raise MatrixParseError(
            "count", last, f"expected {rows * cols} entries for {rows}x{cols}, got {len(values)}"
        )
    # array format is column-major, same as DenseMatrix
    return DenseMatrix(rows, cols, np.array(values))


def _parse_csv(lines):
    rows = []
    width = None
    for lineno, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        row = [_number(tok.strip(), lineno) for tok in text.split(",")]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError(
                "count", lineno, f"row has {len(row)} fields, expected {width}"
            )
        rows.append(row)
    if not rows:
        raise MatrixParseError("count", max(len(lines), 1), "empty matrix")
    return DenseMatrix.from_array(np.array(rows))


def read_matrix(path, format=None):
    fmt = format or guess_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    lines = Path(path).read_text().splitlines()
    return _parse_mm(lines) if fmt == "mm" else _parse_csv(lines)


def write_matrix(m, path, format=None):
    fmt = format or guess_format(path)
    if not isinstance(m, DenseMatrix):
        m = DenseMatrix.from_array(m)
    if not np.all(np.isfinite(m.data)):
        raise ValueError("refusing to write non-finite values")
    if fmt == "mm":
        out = [MM_HEADER, f"{m.rows} {m.cols}"]
        out.extend(_fmt(x) for x in m.data)
    elif fmt == "csv":
        a = m.to_array()
        out = [",".join(_fmt(x) for x in row) for row in a]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text("\n".join(out) + "\n")

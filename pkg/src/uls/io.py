"""Text formats for matrices, transforms, sensing instances and reports.

Matrix format::

    complex-matrix <rows> <cols>
    <tok> <tok> ...

where each token is ``a``, ``a+bi``, ``a-bi`` or ``bi`` with decimal
mantissas and optional exponents. Transform lines::

    perm <m> : i0 i1 ... i_{m-1}
    diag <m> : <tok> ... <tok>
    scalar <m> : <tok>
    complex-matrix <m> <m>        (followed by m rows)

Blank lines and lines starting with ``#`` are ignored in transform files.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .decoder import SensingInstance
from .errors import DimensionError, ParseError
from .spectral import Diagonal, ExplicitMatrix, Permutation, ScalarIdentity, Transform

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(
    rf"^(?:(?P<re>[+-]?{_NUM})(?:(?P<isign>[+-])(?P<im>{_NUM})i)?|(?P<pure>[+-]?{_NUM})i)$"
)
HEADER = "complex-matrix"


def parse_complex(token: str, line: int | None = None, column: int | None = None) -> complex:
    """Parse one scalar token; only the ``i`` imaginary suffix is accepted."""
    m = _TOKEN.match(token)
    if m is None:
        raise ParseError(f"malformed number {token!r}", line, column)
    if m.group("pure") is not None:
        return complex(0.0, float(m.group("pure")))
    re_part = float(m.group("re"))
    if m.group("im") is None:
        return complex(re_part, 0.0)
    im_part = float(m.group("im"))
    return complex(re_part, -im_part if m.group("isign") == "-" else im_part)


def format_complex(z: complex) -> str:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"cannot serialize non-finite value {z!r}")
    re_s = format(z.real, ".17g")
    if z.imag == 0:
        return re_s
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{re_s}{sign}{format(abs(z.imag), '.17g')}i"


def _tokens(line: str):
    """Yield (token, 1-based column) for whitespace-separated tokens."""
    for m in re.finditer(r"\S+", line):
        yield m.group(0), m.start() + 1


def _parse_header(line: str, lineno: int) -> tuple[int, int]:
    toks = line.split()
    if len(toks) != 3 or toks[0] != HEADER:
        raise ParseError(f"expected '{HEADER} <rows> <cols>'", lineno, 1)
    try:
        rows, cols = int(toks[1]), int(toks[2])
    except ValueError:
        raise ParseError("matrix dimensions must be integers", lineno) from None
    if rows < 1 or cols < 1:
        raise DimensionError(f"line {lineno}: matrix dimensions must be positive")
    return rows, cols


def _parse_rows(lines: list[str], start: int, rows: int, cols: int) -> np.ndarray:
    """Parse ``rows`` data lines beginning at index ``start`` of ``lines``."""
    if len(lines) - start < rows:
        raise DimensionError(f"header declares {rows} rows, found {len(lines) - start}")
    out = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        lineno = start + r + 1
        toks = list(_tokens(lines[start + r]))
        if len(toks) != cols:
            raise DimensionError(f"line {lineno}: expected {cols} entries, found {len(toks)}")
        for c, (tok, col) in enumerate(toks):
            out[r, c] = parse_complex(tok, lineno, col)
    return out


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty matrix file", 1, 1)
    rows, cols = _parse_header(lines[0], 1)
    if len(lines) - 1 != rows:
        raise DimensionError(f"header declares {rows} rows, found {len(lines) - 1}")
    return _parse_rows(lines, 1, rows, cols)


def format_matrix(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    out = [f"{HEADER} {M.shape[0]} {M.shape[1]}"]
    out += [" ".join(format_complex(v) for v in row) for row in M]
    return "\n".join(out) + "\n"


def load_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))


def save_matrix(path, M) -> None:
    Path(path).write_text(format_matrix(M), encoding="utf-8")


def format_transform(T: Transform) -> str:
    if isinstance(T, Permutation):
        return f"perm {T.size} : " + " ".join(str(i) for i in T.perm)
    if isinstance(T, Diagonal):
        return f"diag {T.size} : " + " ".join(format_complex(d) for d in T.entries)
    if isinstance(T, ScalarIdentity):
        return f"scalar {T.size} : {format_complex(T.scalar)}"
    return format_matrix(T.data).rstrip("\n")


def _parse_structured(line: str, lineno: int) -> Transform:
    head, sep, body = line.partition(":")
    if not sep:
        raise ParseError("expected ':' after transform header", lineno)
    htoks = head.split()
    if len(htoks) != 2:
        raise ParseError("expected '<kind> <m> :'", lineno, 1)
    kind, size_tok = htoks
    try:
        m = int(size_tok)
    except ValueError:
        raise ParseError(f"size {size_tok!r} is not an integer", lineno) from None
    offset = len(head) + 2
    toks = [(t, c + offset - 1) for t, c in _tokens(body)]
    if kind == "perm":
        if len(toks) != m:
            raise DimensionError(f"line {lineno}: perm declares {m} entries, found {len(toks)}")
        idx = []
        for t, c in toks:
            if not re.fullmatch(r"\d+", t):
                raise ParseError(f"permutation entry {t!r} is not an index", lineno, c)
            idx.append(int(t))
        try:
            return Permutation(tuple(idx))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if kind == "diag":
        if len(toks) != m:
            raise DimensionError(f"line {lineno}: diag declares {m} entries, found {len(toks)}")
        vals = [parse_complex(t, lineno, c) for t, c in toks]
        try:
            return Diagonal(tuple(vals))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if kind == "scalar":
        if len(toks) != 1:
            raise ParseError("scalar transform takes exactly one value", lineno)
        tok, col = toks[0]
        value = parse_complex(tok, lineno, col)
        try:
            return ScalarIdentity(value, m)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, col) from None
    raise ParseError(f"unknown transform kind {kind!r}", lineno, 1)


def parse_transforms(text: str) -> list[Transform]:
    lines = text.splitlines()
    out: list[Transform] = []
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line or line.startswith("#"):
            i += 1
            continue
        if line.startswith(HEADER):
            rows, cols = _parse_header(line, i + 1)
            if rows != cols:
                raise DimensionError(f"line {i + 1}: transform matrix must be square")
            out.append(ExplicitMatrix(_parse_rows(lines, i + 1, rows, cols)))
            i += rows + 1
            continue
        out.append(_parse_structured(line, i + 1))
        i += 1
    return out


def format_transforms(transforms) -> str:
    return "\n".join(format_transform(T) for T in transforms) + "\n"


def load_transforms(path) -> list[Transform]:
    return parse_transforms(Path(path).read_text(encoding="utf-8"))


def save_transforms(path, transforms) -> None:
    Path(path).write_text(format_transforms(transforms), encoding="utf-8")


def to_json(obj) -> str:
    """Deterministic JSON rendering used for every report."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def save_report(path, report) -> None:
    data = report.to_dict() if hasattr(report, "to_dict") else report
    Path(path).write_text(to_json(data), encoding="utf-8")


def save_instance(directory, instance: SensingInstance) -> None:
    """Write ``A``, ``y``, ``transforms`` and, if known, ``truth``.

    The truth file is ``index <k>`` followed by ``x*`` in matrix format.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_matrix(d / "A", instance.A)
    save_matrix(d / "y", instance.y.reshape(-1, 1))
    save_transforms(d / "transforms", instance.transforms)
    truth = d / "truth"
    if instance.truth is not None:
        k, x = instance.truth
        truth.write_text(f"index {k}\n" + format_matrix(x.reshape(-1, 1)), encoding="utf-8")
    elif truth.exists():
        truth.unlink()


def load_instance(directory) -> SensingInstance:
    d = Path(directory)
    A = load_matrix(d / "A")
    y = load_matrix(d / "y")
    if y.shape[1] != 1:
        raise DimensionError(f"y must be a column (m x 1), got {y.shape}")
    transforms = load_transforms(d / "transforms")
    truth = None
    if (d / "truth").exists():
        text = (d / "truth").read_text(encoding="utf-8")
        first, _, rest = text.partition("\n")
        toks = first.split()
        if len(toks) != 2 or toks[0] != "index" or not toks[1].isdigit():
            raise ParseError("expected 'index <k>'", 1, 1)
        x = parse_matrix(rest)
        truth = (int(toks[1]), x[:, 0])
    return SensingInstance(A, tuple(transforms), y[:, 0], truth)

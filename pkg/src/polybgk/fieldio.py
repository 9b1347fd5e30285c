"""Field dump format.

A dump is a single ASCII header line::

    POLYBGK1 xcount vcount icount vmax imax delta

followed by the field values in storage order ``(x, I, v1, v2, v3)``, v3
fastest.  The binary flavour stores little-endian IEEE-754 float64 values
directly after the header's newline.  The CSV flavour stores one row per
``(x, I)`` pair holding the ``vcount**3`` velocity values, printed with 17
significant digits so values round-trip exactly.
"""
from __future__ import annotations

import numpy as np

from .errors import ParseError

MAGIC = "POLYBGK1"


def format_header(shape, v_max: float, i_max: float, delta: float) -> str:
    nx, ni, nv = shape[0], shape[1], shape[2]
    return f"{MAGIC} {nx} {nv} {ni} {v_max!r} {i_max!r} {delta!r}\n"


def parse_header(line: str) -> dict:
    parts = line.split()
    if len(parts) != 7 or parts[0] != MAGIC:
        raise ParseError(f"bad field header {line.strip()!r}", lineno=1)
    try:
        return {
            "x_count": int(parts[1]), "v_count": int(parts[2]), "i_count": int(parts[3]),
            "v_max": float(parts[4]), "i_max": float(parts[5]), "delta": float(parts[6]),
        }
    except ValueError as exc:
        raise ParseError(f"bad field header: {exc}", lineno=1) from None


def write_field(path, f: np.ndarray, grid, fmt: str = "binary") -> None:
    header = format_header(f.shape, grid.v_max, grid.i_max, grid.delta)
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())
    elif fmt == "csv":
        rows = f.reshape(f.shape[0] * f.shape[1], -1)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(header)
            for row in rows:
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    else:
        raise ValueError(f"unknown field format {fmt!r}")


def read_field(path):
    """Read a dump written by :func:`write_field`; the flavour is auto-detected."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line", lineno=1)
    header = parse_header(raw[:nl].decode("ascii", errors="replace"))
    nx, nv, ni = header["x_count"], header["v_count"], header["i_count"]
    shape = (nx, ni, nv, nv, nv)
    count = nx * ni * nv ** 3
    body = raw[nl + 1:]
    if len(body) == 8 * count:
        f = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(shape)
    else:
        lines = body.decode("ascii").splitlines()
        if len(lines) != nx * ni:
            raise ParseError(f"expected {nx * ni} data rows, found {len(lines)}", lineno=2)
        f = np.empty((nx * ni, nv ** 3))
        for k, line in enumerate(lines):
            try:
                vals = [float(s) for s in line.split(",")]
            except ValueError as exc:
                raise ParseError(str(exc), lineno=k + 2) from None
            if len(vals) != nv ** 3:
                raise ParseError(f"expected {nv ** 3} values, found {len(vals)}", lineno=k + 2)
            f[k] = vals
        f = f.reshape(shape)
    return f, header

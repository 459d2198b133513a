"""Token matrix file I/O.

Two formats: a tiny binary container ("tokm") that is bit-exact and fully
specified, and CSV for interop. The binary layout is little-endian:

    bytes 0-3    magic "TOKM"
    bytes 4-7    version, uint32 (currently 1)
    bytes 8-15   T, uint64 (token count / rows)
    bytes 16-23  D, uint64 (embedding dim / cols)
    bytes 24-27  dtype code, uint32 (1 = IEEE-754 float32)
    bytes 28-    row-major T*D payload
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"TOKM"
VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sIQQI")  # 28 bytes

FORMATS = ("tokm", "csv")


def _validate_payload(arr: np.ndarray, source: str) -> np.ndarray:
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{source}: needs T >= 1 and D >= 1, got {arr.shape}")
    finite = np.isfinite(arr)
    if not finite.all():
        r, c = np.argwhere(~finite)[0]
        raise ValidationError(f"{source}: non-finite value at row {r}, col {c}")
    return arr


def read_tokm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: only {len(data)} bytes, header needs {_HEADER.size}")
    magic, version, T, D, dtype_code = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype_code != DTYPE_F32:
        raise FormatError(f"{path}: unsupported dtype code {dtype_code}")
    expected = _HEADER.size + 4 * T * D
    if len(data) != expected:
        raise FormatError(f"{path}: size mismatch, expected {expected} bytes for "
                          f"T={T} D={D}, found {len(data)}")
    payload = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(T, D)
    return _validate_payload(payload.astype(np.float32), str(path))


def write_tokm(matrix, path) -> None:
    arr = np.ascontiguousarray(np.asarray(matrix), dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError(f"token matrix must be 2-D, got shape {arr.shape}")
    _validate_payload(arr, str(path))
    T, D = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, T, D, DTYPE_F32))
        fh.write(arr.tobytes())


def read_csv(path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FormatError(
                    f"{path}: line {lineno} has {len(cells)} values, expected {width}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return _validate_payload(np.asarray(rows, dtype=np.float64), str(path))


def write_csv(matrix, path) -> None:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"token matrix must be 2-D, got shape {arr.shape}")
    _validate_payload(arr, str(path))
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def infer_format(path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "tokm"


def read_token_matrix(path, format: str | None = None) -> np.ndarray:
    """Read a token matrix, dispatching on the requested or inferred format."""
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise FormatError(f"unknown token file format {fmt!r}")
    return read_tokm(path) if fmt == "tokm" else read_csv(path)


def write_token_matrix(matrix, path, format: str | None = None) -> None:
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise FormatError(f"unknown token file format {fmt!r}")
    if fmt == "tokm":
        write_tokm(matrix, path)
    else:
        write_csv(matrix, path)

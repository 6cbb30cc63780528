"""CDM1 matrix files and binary PGM output.

A CDM1 file is an ASCII header line ``CDM1 <rows> <cols>\\n`` followed by
``rows*cols`` little-endian float64 values in row-major order. Vectors are
stored with ``cols = 1``.
"""

import re

import numpy as np

_HEADER = re.compile(rb"^CDM1 (\d+) (\d+)$")


def write_cdm(path, array):
    a = np.asarray(array, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"CDM1 stores 1-D or 2-D arrays, got ndim={a.ndim}")
    with open(path, "wb") as fh:
        fh.write(f"CDM1 {a.shape[0]} {a.shape[1]}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_cdm(path):
    """Read a CDM1 file as a ``(rows, cols)`` float64 array."""
    with open(path, "rb") as fh:
        line = fh.readline()
        match = _HEADER.match(line.rstrip(b"\n"))
        if match is None:
            raise ValueError(f"{path}: not a CDM1 file")
        rows, cols = int(match.group(1)), int(match.group(2))
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: expected {expected} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_pgm(path, image):
    """Write an image with values in [0, 1] as 8-bit binary PGM (P5)."""
    img = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    data = np.rint(img * 255.0).astype(np.uint8)
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    match = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if match is None:
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(g) for g in match.groups())
    data = np.frombuffer(raw, dtype=np.uint8, count=rows * cols, offset=match.end())
    return data.reshape(rows, cols), maxval

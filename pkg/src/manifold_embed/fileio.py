"""CSV ingestion, embedding output and the model container.

Model container layout (all integers little-endian)::

    bytes 0-7    magic  b"MEMBMODL"
    bytes 8-11   uint32 format version (currently 1)
    bytes 12-19  uint64 header length H
    bytes 20..   H bytes of UTF-8 JSON header
    then         raw float64/int64 little-endian array payloads

The JSON header holds scalar fields under ``"meta"`` and, under
``"arrays"``, one entry per array: ``name -> {"dtype", "shape", "offset"}``
where ``offset`` counts bytes from the start of the payload section.
Arrays are C-ordered. Key order is sorted so identical models serialize to
identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, ModelFormatError, ParseError

MAGIC = b"MEMBMODL"
FORMAT_VERSION = 1


@dataclass
class Table:
    points: np.ndarray  # d x n
    labels: list | None
    columns: list | None


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_table(path, label_column=None):
    """Read a row-per-point CSV into a d x n matrix.

    A first row containing any non-numeric cell is treated as a header.
    ``label_column`` (header name or integer index) is split off as a list
    of strings and excluded from the features.
    """
    with open(path, newline="") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh))]
    rows = [(ln, [c.strip() for c in r]) for ln, r in rows if any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput(f"{path}: no data")
    columns = None
    if not all(_is_number(c) for c in rows[0][1]):
        columns = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise EmptyInput(f"{path}: header only, no data")
    width = len(columns) if columns is not None else len(rows[0][1])
    label_idx = None
    if label_column is not None:
        if columns is not None and label_column in columns:
            label_idx = columns.index(label_column)
        else:
            try:
                label_idx = int(label_column)
            except ValueError:
                raise ParseError(f"{path}: unknown label column {label_column!r}") from None
        if not 0 <= label_idx < width:
            raise ParseError(f"{path}: label column {label_column!r} out of range")
    values, labels = [], []
    for ln, r in rows:
        if len(r) != width:
            raise ParseError(f"{path}: line {ln}: expected {width} fields, got {len(r)}")
        row = []
        for j, cell in enumerate(r):
            if j == label_idx:
                labels.append(cell)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: line {ln}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: line {ln}: non-finite value {cell!r}")
            row.append(v)
        values.append(row)
    X = np.array(values, dtype=float).reshape(len(values), -1).T
    if X.shape[0] == 0:
        raise EmptyInput(f"{path}: no numeric columns")
    if columns is not None and label_idx is not None:
        columns = [c for j, c in enumerate(columns) if j != label_idx]
    return Table(X, labels if label_idx is not None else None, columns)


def load_points(path):
    """d x n data matrix from a row-per-point CSV file."""
    return read_table(path).points


def atomic_write(path, data):
    """Write bytes or text to ``path`` via a temp file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(v):
    return repr(float(v))


def embedding_csv(Y, prefix="dim"):
    """CSV text for a p x n embedding: one row per point, full precision."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    lines = [",".join(f"{prefix}_{k}" for k in range(Y.shape[0]))]
    lines.extend(",".join(format_float(v) for v in col) for col in Y.T)
    return "\n".join(lines) + "\n"


def points_csv(X, columns):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lines = [",".join(columns)]
    lines.extend(",".join(format_float(v) for v in col) for col in X.T)
    return "\n".join(lines) + "\n"


def write_embedding(path, Y):
    atomic_write(path, embedding_csv(Y))


def read_embedding(path):
    """Inverse of :func:`write_embedding`; returns p x n."""
    return read_table(path).points


def dump_model(meta, arrays):
    """Serialize scalar metadata and named arrays to container bytes."""
    specs, chunks, offset = {}, [], 0
    for name in sorted(arrays):
        a = np.asarray(arrays[name])
        if a.dtype.kind in "iub":
            a, dtype = a.astype("<i8"), "int64"
        else:
            a, dtype = a.astype("<f8"), "float64"
        buf = np.ascontiguousarray(a).tobytes()
        specs[name] = {"dtype": dtype, "shape": list(a.shape), "offset": offset}
        chunks.append(buf)
        offset += len(buf)
    header = json.dumps({"meta": meta, "arrays": specs}, sort_keys=True,
                        separators=(",", ":")).encode()
    return MAGIC + struct.pack("<IQ", FORMAT_VERSION, len(header)) + header + b"".join(chunks)


def load_model_bytes(blob):
    if blob[:8] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, hlen = struct.unpack("<IQ", blob[8:20])
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    header = json.loads(blob[20:20 + hlen].decode())
    base = 20 + hlen
    arrays = {}
    for name, spec in header["arrays"].items():
        dtype = np.dtype("<i8" if spec["dtype"] == "int64" else "<f8")
        count = int(np.prod(spec["shape"], dtype=np.int64))
        start = base + spec["offset"]
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=start)
        arrays[name] = arr.reshape(spec["shape"]).copy()
    return header["meta"], arrays


def save_model(path, meta, arrays):
    atomic_write(path, dump_model(meta, arrays))


def load_model(path):
    with open(path, "rb") as fh:
        return load_model_bytes(fh.read())

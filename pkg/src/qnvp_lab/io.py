"""Diagnostics CSV and the binary field-dump container."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import __version__
from .errors import UsageError
from .evolve import TimeSeries
from .models import CHANNELS

MAGIC = b"QNVP"
DUMP_VERSION = 1
CSV_COLUMNS = ("t",) + CHANNELS


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_csv(series: TimeSeries) -> str:
    """Two header lines, then one row per sample with 17 significant digits."""
    lines = [f"# qnvp-lab v{__version__}", ",".join(CSV_COLUMNS)]
    cols = [series.array(c) for c in CHANNELS]
    for i, t in enumerate(series.times):
        lines.append(",".join([_fmt(t)] + [_fmt(c[i]) for c in cols]))
    return "\n".join(lines) + "\n"


def write_csv(path, series: TimeSeries) -> Path:
    path = Path(path)
    path.write_text(format_csv(series))
    return path


def read_csv(path) -> TimeSeries:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# qnvp-lab v"):
        raise UsageError(f"{path}: missing qnvp-lab header")
    names = lines[1].split(",")
    if tuple(names) != CSV_COLUMNS:
        raise UsageError(f"{path}: unexpected columns {names}")
    series = TimeSeries()
    for row in lines[2:]:
        vals = [float(v) for v in row.split(",")]
        series.append(vals[0], dict(zip(names[1:], vals[1:])))
    return series


def encode_field(a: np.ndarray) -> bytes:
    a = np.ascontiguousarray(a, dtype="<f8")
    head = MAGIC + struct.pack("<II", DUMP_VERSION, a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    return head + a.tobytes()


def decode_field(buf: bytes) -> np.ndarray:
    if len(buf) < 12 or buf[:4] != MAGIC:
        raise UsageError("not a field dump (bad magic)")
    version, rank = struct.unpack_from("<II", buf, 4)
    if version != DUMP_VERSION:
        raise UsageError(f"unsupported field dump version {version}")
    off = 12 + 4 * rank
    if len(buf) < off:
        raise UsageError("truncated field dump header")
    dims = struct.unpack_from(f"<{rank}I", buf, 12)
    count = int(np.prod(dims, dtype=np.int64))
    if len(buf) - off != 8 * count:
        raise UsageError(f"field dump payload is {len(buf) - off} bytes, header declares {8 * count}")
    return np.frombuffer(buf, dtype="<f8", offset=off).reshape(dims).astype(float)


def write_field(directory, name: str, step: int, a: np.ndarray) -> Path:
    path = Path(directory) / f"{name}_{step}.qnvpf"
    path.write_bytes(encode_field(a))
    return path


def read_field(path) -> np.ndarray:
    return decode_field(Path(path).read_bytes())

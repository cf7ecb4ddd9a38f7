"""Table caps, atomic file output, and deterministic JSON."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA = "thinset/v1"
DEFAULT_TABLE_CAP = 2**26


def table_cap(cap: int | None = None) -> int:
    """Explicit cap, else THINSET_TABLE_CAP, else 2^26 entries."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("THINSET_TABLE_CAP")
    return int(env) if env else DEFAULT_TABLE_CAP


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def _encode(obj, indent, level) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = sep.join(f"{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{" + pad + body + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits.

    Output is byte-identical for identical inputs, which the run manifests
    rely on.
    """
    return _encode(_plain(obj), indent, 0) + "\n"


def atomic_write(path, data: bytes | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_raw_table(path, raw: bytes, meta: dict) -> dict:
    """Write raw little-endian bytes plus a JSON sidecar at path + '.json'."""
    meta = dict(meta)
    meta["sha256"] = sha256(raw)
    atomic_write(path, raw)
    atomic_write(str(path) + ".json", dumps(meta))
    return meta

"""Stage artifact formats: binary arrays, JSON manifests and heatmaps.

Array file layout (all little-endian)::

    8 bytes   magic b"SPDARR01"
    uint32    ndim
    uint32    dims[ndim]
    float64   data, C order

A stage directory holds its arrays, an ``index.json`` describing the rows and
a ``manifest.json`` with the stage name, its configuration, a SHA-256 hash
of that configuration and hashes of every input and output file. Manifests
carry no timestamps, so an unchanged re-run is byte-identical.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import DataError, NonFinite

ARRAY_MAGIC = b"SPDARR01"
MANIFEST = "manifest.json"
INDEX = "index.json"


def write_array(path, arr):
    arr = np.asarray(arr, dtype="<f8", order="C")
    head = ARRAY_MAGIC + struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape)
    Path(path).write_bytes(head + arr.tobytes())


def read_array(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != ARRAY_MAGIC:
        raise DataError(f"{path}: not an array file (bad magic)")
    (ndim,) = struct.unpack_from("<I", raw, 8)
    dims = struct.unpack_from(f"<{ndim}I", raw, 12)
    start = 12 + 4 * ndim
    count = int(np.prod(dims)) if ndim else 1
    if len(raw) - start != 8 * count:
        raise DataError(f"{path}: expected {count} values for shape {dims}, file is truncated or padded")
    return np.frombuffer(raw, dtype="<f8", offset=start).reshape(dims).astype(np.float64)


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def config_hash(config) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def tree_hash(paths) -> dict:
    """``<input name>/<relative path>`` -> SHA-256 for every file under the given files/dirs.

    Keys are relative so that a moved input tree hashes the same.
    """
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for q in sorted(q for q in p.rglob("*") if q.is_file()):
                out[f"{p.name}/{q.relative_to(p).as_posix()}"] = file_hash(q)
        else:
            out[p.name] = file_hash(p)
    return out


def manifest_for(stage, config, inputs=()):
    from . import __version__

    return {
        "stage": stage,
        "config": config,
        "config_hash": config_hash(config),
        "inputs": tree_hash(inputs),
        "versions": {"spdfusion": __version__, "numpy": np.__version__},
    }


def is_current(out_dir, stage, config, inputs=()) -> bool:
    """True when ``out_dir`` already holds this stage's outputs for these inputs."""
    path = Path(out_dir) / MANIFEST
    if not path.is_file():
        return False
    try:
        old = json.loads(path.read_text())
    except ValueError:
        return False
    new = manifest_for(stage, config, inputs)
    if any(old.get(k) != new[k] for k in ("stage", "config_hash", "inputs")):
        return False
    outputs = old.get("outputs", {})
    return all((Path(out_dir) / name).is_file() and file_hash(Path(out_dir) / name) == h
               for name, h in outputs.items())


def write_manifest(out_dir, stage, config, inputs=(), extra=None):
    """Write ``manifest.json`` listing every other file in ``out_dir``."""
    out_dir = Path(out_dir)
    man = manifest_for(stage, config, inputs)
    man["outputs"] = {q.name: file_hash(q) for q in sorted(out_dir.iterdir())
                      if q.is_file() and q.name != MANIFEST}
    if extra:
        man.update(extra)
    (out_dir / MANIFEST).write_text(canonical_json(man))
    return man


def read_index(stage_dir):
    path = Path(stage_dir) / INDEX
    if not path.is_file():
        raise DataError(f"{path}: missing stage index")
    return json.loads(path.read_text())


# heatmaps


def correlation(P):
    """``diag(P)^{-1/2} P diag(P)^{-1/2}``; unit diagonal for any SPD input."""
    P = np.asarray(P, dtype=np.float64)
    if not np.all(np.isfinite(P)):
        raise NonFinite("heatmap input contains NaN or inf")
    d = np.diag(P)
    if np.any(d <= 0):
        raise DataError("heatmap input needs a positive diagonal")
    s = 1.0 / np.sqrt(d)
    return P * s[:, None] * s[None, :]


def block_labels(channels, m):
    """``name@block`` for every row of an ``m``-block matrix."""
    return [f"{c}@{b}" for b in range(m) for c in channels]


def pgm_bytes(R, scale=1):
    """Binary (P5) greyscale image with pixel ``round(255 * |r|)``, ``scale`` px per cell."""
    pix = np.rint(255 * np.clip(np.abs(R), 0, 1)).astype(np.uint8)
    if scale > 1:
        pix = np.kron(pix, np.ones((scale, scale), dtype=np.uint8))
    h, w = pix.shape
    return f"P5\n{w} {h}\n255\n".encode() + pix.tobytes()


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def write_heatmap(out_dir, P, labels, scale=8, stem="heatmap"):
    """Write ``<stem>.csv`` (correlation-scaled values), ``<stem>.pgm`` and ``<stem>.labels.txt``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    R = correlation(P)
    if len(labels) != R.shape[0]:
        raise DataError(f"{len(labels)} labels for a {R.shape[0]}x{R.shape[0]} matrix")
    rows = [",".join([""] + list(labels))]
    for lab, r in zip(labels, R):
        rows.append(",".join([lab] + [repr(float(v)) for v in r]))
    (out_dir / f"{stem}.csv").write_text("\n".join(rows) + "\n")
    (out_dir / f"{stem}.pgm").write_bytes(pgm_bytes(R, scale))
    (out_dir / f"{stem}.labels.txt").write_text("\n".join(labels) + "\n")
    return R

"""File formats: field CSV, P6 image, energy trace CSV, binary checkpoint, manifests."""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import SizeError
from .field import ModelParams, RealField
from .lattice import LatticeSpec, grid_points

CHECKPOINT_MAGIC = b"CMGF"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sII4d")


def fmt(x) -> str:
    """Numbers with 17 significant digits, everything else via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_csv(path, header, rows) -> Path:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return _write_text(path, "\n".join(lines) + "\n")


def write_field_csv(path, f: RealField, spec: LatticeSpec) -> Path:
    n = f.n
    x = grid_points(spec, n)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cols = [i.ravel(), j.ravel(), x[..., 0].ravel(), x[..., 1].ravel()] + [f.data[..., c].ravel() for c in range(3)]
    lines = ["i,j,x1,x2,m1,m2,m3"]
    for r in range(n * n):
        lines.append(
            f"{cols[0][r]},{cols[1][r]},"
            + ",".join(f"{cols[c][r]:.17g}" for c in range(2, 7))
        )
    return _write_text(path, "\n".join(lines) + "\n")


def read_field_csv(path) -> RealField:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = int(round(np.sqrt(arr.shape[0])))
    if n * n != arr.shape[0]:
        raise SizeError(f"{arr.shape[0]} rows is not a square grid")
    data = np.zeros((n, n, 3))
    data[arr[:, 0].astype(int), arr[:, 1].astype(int)] = arr[:, 4:7]
    return RealField(data)


def diverging_rgb(values: np.ndarray) -> np.ndarray:
    """Blue at ``-max|v|``, white at 0, red at ``+max|v|``; uint8 array of shape ``values.shape + (3,)``."""
    scale = float(np.abs(values).max())
    t = values / scale if scale > 0 else np.zeros_like(values)
    rgb = np.empty(values.shape + (3,))
    pos = t >= 0
    # red side fades green/blue, blue side fades red/green
    rgb[..., 0] = np.where(pos, 1.0, 1.0 + t)
    rgb[..., 1] = 1.0 - np.abs(t)
    rgb[..., 2] = np.where(pos, 1.0 - t, 1.0)
    return np.rint(rgb * 255).astype(np.uint8)


def write_field_image(path, f: RealField) -> Path:
    """Binary P6 pixmap of ``m3``, one pixel per grid point.

    Row ``r`` of the image is grid index ``j = n-1-r`` so the x2 axis points up.
    """
    n = f.n
    img = diverging_rgb(f.data[..., 2]).transpose(1, 0, 2)[::-1]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n} {n}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())
    return path


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary P6 pixmap")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit pixmaps are supported")
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def write_energy_trace(path, trace, dt: float, fp_iters) -> Path:
    """CSV ``step,time,energy,fp_iters``; step 0 (the initial state) has 0 iterations."""
    iters = [0] + list(fp_iters)
    rows = [(s, s * dt, e, iters[s] if s < len(iters) else 0) for s, e in trace]
    return write_csv(path, ["step", "time", "energy", "fp_iters"], rows)


def write_checkpoint(path, f: RealField, p: ModelParams) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, f.n, p.kappa, p.lam, p.alpha, p.beta)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.data, dtype="<f8").tobytes())
    return path


def read_checkpoint(path) -> tuple[RealField, ModelParams]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("checkpoint truncated")
    magic, version, n, kappa, lam, alpha, beta = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError("bad checkpoint magic")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    body = raw[_HEADER.size:]
    if len(body) != n * n * 3 * 8:
        raise SizeError("checkpoint payload does not match header size")
    data = np.frombuffer(body, dtype="<f8").reshape(n, n, 3)
    return RealField(data), ModelParams(kappa, lam, alpha, beta)


def write_manifest(path, entries: dict) -> Path:
    """Flat ``key = value`` text, readable back as a config file."""
    lines = ["# chiralmag run manifest"]
    for key, value in entries.items():
        lines.append(f"{key} = {fmt(value)}")
    return _write_text(path, "\n".join(lines) + "\n")


def read_keyvalue(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out

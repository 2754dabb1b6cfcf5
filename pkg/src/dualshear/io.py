"""File formats: graymaps, raw float grids, coefficient directories, profiles, banks."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from .index import ShearParam

MANIFEST = "manifest.json"


class FormatError(ValueError):
    pass


def dump_json(obj) -> str:
    """Canonical JSON text (sorted keys, fixed separators) for byte-stable files."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


# --- portable graymap ---------------------------------------------------------

def write_pgm(path, img: np.ndarray, bits: int = 16) -> tuple[float, float]:
    """Binary PGM (P5). Values are mapped linearly onto ``[0, maxval]``.

    The range is kept in a header comment so :func:`read_pgm` restores the
    original scale up to quantization. Returns ``(lo, hi)``.
    """
    if bits not in (8, 16):
        raise FormatError("PGM depth must be 8 or 16 bits")
    img = np.asarray(img, float)
    lo, hi = float(img.min()), float(img.max())
    maxval = 2 ** bits - 1
    span = hi - lo if hi > lo else 1.0
    q = np.rint((img - lo) / span * maxval)
    dtype = ">u2" if bits == 16 else "u1"
    header = f"P5\n# range {lo!r} {hi!r}\n{img.shape[1]} {img.shape[0]}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(q.astype(dtype).tobytes())
    return lo, hi


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary PGM")
    tokens, comments, pos = [], [], 2
    while len(tokens) < 3:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            end = data.index(b"\n", pos)
            comments.append(data[pos + 1:end].decode("ascii", "replace").strip())
            pos = end + 1
            continue
        m = re.match(rb"\d+", data[pos:])
        if not m:
            raise FormatError(f"{path}: malformed header")
        tokens.append(int(m.group()))
        pos += len(m.group())
    pos += 1
    width, height, maxval = tokens
    dtype = ">u2" if maxval > 255 else "u1"
    count = width * height
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    img = raw.reshape(height, width).astype(float) / maxval
    for c in comments:
        parts = c.split()
        if len(parts) == 3 and parts[0] == "range":
            lo, hi = float(parts[1]), float(parts[2])
            img = lo + img * ((hi - lo) if hi > lo else 1.0)
    return img


# --- raw float grids ----------------------------------------------------------

def write_raw(path, f: np.ndarray, meta: dict | None = None) -> Path:
    """Little-endian float64 samples plus a ``.json`` sidecar with the shape."""
    path = Path(path)
    f = np.ascontiguousarray(f, dtype="<f8")
    path.write_bytes(f.tobytes())
    side = dict(meta or {}, shape=list(f.shape), dtype="<f8", order="C")
    Path(str(path) + ".json").write_text(dump_json(side))
    return path


def read_raw(path) -> np.ndarray:
    path = Path(path)
    side = json.loads(Path(str(path) + ".json").read_text())
    if side.get("dtype") != "<f8":
        raise FormatError(f"{path}: unsupported dtype {side.get('dtype')}")
    return np.frombuffer(path.read_bytes(), dtype="<f8").reshape(side["shape"]).copy()


def read_signal(path) -> np.ndarray:
    return read_pgm(path) if str(path).lower().endswith(".pgm") else read_raw(path)


def write_signal(path, f: np.ndarray, meta: dict | None = None) -> None:
    if str(path).lower().endswith(".pgm"):
        write_pgm(path, f)
    else:
        write_raw(path, f, meta)


# --- coefficient directories --------------------------------------------------

def _slice_name(cone: int, s: ShearParam, j: int, p: int) -> str:
    return f"c{cone}_s{s.label()}_j{j}_p{p}.c16"


def write_coefficients(directory, table, extra: dict | None = None) -> Path:
    """One ``<c16`` file per (cone, s, j, p) slice and a JSON manifest."""
    from .system import TIE_BREAK_VERSION

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for cone, s, j, p in table.keys():
        a = np.ascontiguousarray(table.slices[(cone, s, j, p)], dtype="<c16")
        name = _slice_name(cone, s, j, p)
        (d / name).write_bytes(a.tobytes())
        entries.append({"file": name, "cone": cone, "s": str(s.value), "j": j, "p": p,
                        "shape": list(a.shape)})
    manifest = dict(extra or {}, grid=table.grid, truncation=table.truncation,
                    tie_break=TIE_BREAK_VERSION, dtype="<c16", slices=entries)
    (d / MANIFEST).write_text(dump_json(manifest))
    return d


def read_coefficients(directory):
    from .system import CoefficientTable

    d = Path(directory)
    manifest = json.loads((d / MANIFEST).read_text())
    slices = {}
    for e in manifest["slices"]:
        s = ShearParam.from_value(Fraction(e["s"]))
        a = np.frombuffer((d / e["file"]).read_bytes(), dtype="<c16").reshape(e["shape"])
        slices[(e["cone"], s, e["j"], e["p"])] = a.copy()
    return CoefficientTable(slices, manifest["grid"], manifest["truncation"]), manifest


# --- profiles and banks -------------------------------------------------------

def write_profile(path, profile, extra: dict | None = None) -> Path:
    """Interleaved re/im float64 samples with a JSON sidecar."""
    path = Path(path)
    v = np.asarray(profile.values, complex)
    inter = np.empty(2 * v.size, dtype="<f8")
    inter[0::2], inter[1::2] = v.real, v.imag
    path.write_bytes(inter.tobytes())
    xi = np.asarray(profile.xi, float)
    meta = dict(extra or {}, count=int(v.size), xi_min=float(xi.min()), xi_max=float(xi.max()),
                support_radius=profile.support_radius,
                meta={k: (float(x) if isinstance(x, (np.floating, float)) else x)
                      for k, x in profile.meta.items()})
    Path(str(path) + ".json").write_text(dump_json(meta))
    np.asarray(xi, "<f8").tofile(str(path) + ".xi")
    return path


def read_profile(path):
    from .generators import FourierProfile1D

    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    inter = np.frombuffer(path.read_bytes(), dtype="<f8")
    xi = np.fromfile(str(path) + ".xi", dtype="<f8")
    return FourierProfile1D(xi, inter[0::2] + 1j * inter[1::2], meta["support_radius"],
                            meta["meta"])


def write_bank(directory, bank, report=None) -> Path:
    """One ``<f8`` multiplier file per shear plus a manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for s in bank.shears:
        name = f"G_s{s.label()}.f8"
        (d / name).write_bytes(np.ascontiguousarray(bank.G[s], dtype="<f8").tobytes())
        files.append({"file": name, "s": str(s.value), "tail": bank.tails[s]})
    manifest = {
        "grid": bank.grid.spec(), "jmax": bank.jmax, "K": bank.gen.K, "K_g": bank.window.K,
        "delta_phi": bank.gen.delta_phi, "delta_g": bank.window.delta_g, "filters": files,
    }
    if report is not None:
        manifest.update(A_hat=report.A_hat, B_hat=report.B_hat)
    (d / MANIFEST).write_text(dump_json(manifest))
    return d


def read_bank_filters(directory) -> tuple[dict, dict[ShearParam, np.ndarray]]:
    d = Path(directory)
    manifest = json.loads((d / MANIFEST).read_text())
    N = manifest["grid"]["N"]
    G = {}
    for e in manifest["filters"]:
        s = ShearParam.from_value(Fraction(e["s"]))
        G[s] = np.frombuffer((d / e["file"]).read_bytes(), dtype="<f8").reshape(N, N).copy()
    return manifest, G

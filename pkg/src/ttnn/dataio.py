"""Reading and writing images, frame stacks, masks and solver reports.

File formats
------------
MSK1 mask
    ``b"MSK1"``, then n1, n2, n3 as little-endian uint32, then one bit per
    entry in the tensor linearization order (first index fastest), 1 meaning
    observed. Bits are packed least-significant-bit first; the last byte is
    zero-padded.
Report
    UTF-8 text with one ``key = value`` per line for the keys in
    :data:`REPORT_KEYS`, and a sibling CSV (same stem, ``.csv``) with header
    ``iter,outer_residual,objective`` and one row per outer iteration.

Random masks
------------
Masks are drawn from SplitMix64 so that any implementation can reproduce
them. Output ``i`` (0-based) for seed ``s`` is ``mix(s + (i + 1) * G)`` with
``G = 0x9E3779B97F4A7C15`` and::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all modulo 2**64. Candidate ``c`` (an entry, or an ``(i, j)`` pixel site in
pixel mode, both in first-index-fastest order) receives key ``c``. The
``floor(loss * count)`` candidates with the smallest keys are removed, ties
going to the lower candidate index.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionError
from .solver import ObservationMask, SolverReport
from .metrics import RecoveryScore
from .talgebra import t_product
from .tensor import as_tensor3

MSK_MAGIC = b"MSK1"
_MSK_HEADER = struct.Struct("<4sIII")

REPORT_KEYS = ("method", "r", "mu", "outer_iters", "inner_iters", "mse", "psnr", "seed")
HISTORY_HEADER = ("iter", "outer_residual", "objective")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_EIGHT_BIT_MODES = {"1", "L", "P", "RGB", "RGBA", "LA"}


class UnsupportedImage(ValueError):
    pass


# images ---------------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG as an ``n1 x n2 x 3`` (RGB) or ``n1 x n2 x 1`` tensor."""
    with Image.open(path) as img:
        img.load()
        if img.mode not in _EIGHT_BIT_MODES:
            raise UnsupportedImage(f"{path}: unsupported image mode {img.mode!r}")
        if img.mode in ("1", "L", "LA"):
            arr = np.asarray(img.convert("L"))[:, :, np.newaxis]
        else:
            arr = np.asarray(img.convert("RGB"))
    return as_tensor3(arr)


def to_pixels(t) -> np.ndarray:
    """Clamp to [0, 255] and round to uint8."""
    return np.clip(np.rint(np.asarray(t, dtype=np.float64)), 0, 255).astype(np.uint8)


def save_image(t, path) -> None:
    t = np.asarray(t)
    if t.ndim != 3 or t.shape[2] not in (1, 3):
        raise DimensionError(f"cannot write a {t.shape} tensor as an image")
    px = to_pixels(t)
    img = Image.fromarray(px[:, :, 0], mode="L") if t.shape[2] == 1 else Image.fromarray(px, mode="RGB")
    img.save(path, format="PNG")


def load_frames(directory) -> np.ndarray:
    """Stack the grayscale PNG frames in ``directory`` (sorted by name) along mode 3."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")
    if not paths:
        raise ValueError(f"no PNG frames in {directory}")
    frames = []
    for p in paths:
        t = load_image(p)
        if t.shape[2] != 1:
            raise UnsupportedImage(f"{p}: frames must be grayscale")
        if frames and t.shape != frames[0].shape:
            raise DimensionError(f"{p}: frame size {t.shape[:2]} differs from {frames[0].shape[:2]}")
        frames.append(t)
    return np.concatenate(frames, axis=2)


# masks ----------------------------------------------------------------------

def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` SplitMix64 outputs for ``seed`` as a uint64 array."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + np.arange(1, n + 1, dtype=np.uint64) * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _lowest(keys: np.ndarray, count: int) -> np.ndarray:
    return np.argsort(keys, kind="stable")[:count]


def random_mask(dims, loss: float, mode: str = "element", seed: int = 0) -> ObservationMask:
    """Seeded random loss of ``floor(loss * count)`` entries or pixel sites."""
    n1, n2, n3 = (int(d) for d in dims)
    if not 0.0 < loss < 1.0:
        raise ValueError(f"loss fraction {loss} outside (0, 1)")
    if mode == "element":
        total = n1 * n2 * n3
        drop = _lowest(splitmix64(seed, total), math.floor(loss * total))
        flat = np.ones(total, dtype=bool)
        flat[drop] = False
        observed = flat.reshape((n1, n2, n3), order="F")
    elif mode == "pixel":
        sites = n1 * n2
        drop = _lowest(splitmix64(seed, sites), math.floor(loss * sites))
        flat = np.ones(sites, dtype=bool)
        flat[drop] = False
        observed = np.repeat(flat.reshape((n1, n2), order="F")[:, :, np.newaxis], n3, axis=2)
    else:
        raise ValueError(f"unknown mask mode {mode!r}")
    return ObservationMask(observed)


def mask_bytes(mask: ObservationMask) -> bytes:
    n1, n2, n3 = mask.dims
    bits = np.packbits(mask.observed.ravel(order="F"), bitorder="little")
    return _MSK_HEADER.pack(MSK_MAGIC, n1, n2, n3) + bits.tobytes()


def mask_from_bytes(buf: bytes) -> ObservationMask:
    if len(buf) < _MSK_HEADER.size:
        raise ValueError("truncated MSK1 header")
    magic, n1, n2, n3 = _MSK_HEADER.unpack_from(buf)
    if magic != MSK_MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {MSK_MAGIC!r}")
    total = n1 * n2 * n3
    body = np.frombuffer(buf, dtype=np.uint8, offset=_MSK_HEADER.size)
    if body.size != (total + 7) // 8:
        raise ValueError(f"MSK1 bitmap holds {body.size} bytes, expected {(total + 7) // 8}")
    bits = np.unpackbits(body, count=total, bitorder="little").astype(bool)
    return ObservationMask(bits.reshape((n1, n2, n3), order="F"))


def save_mask(mask: ObservationMask, path) -> None:
    Path(path).write_bytes(mask_bytes(mask))


def load_mask(path) -> ObservationMask:
    return mask_from_bytes(Path(path).read_bytes())


@dataclass
class Dataset:
    truth: np.ndarray
    mask: ObservationMask
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.truth.shape != self.mask.dims:
            raise DimensionError(f"truth {self.truth.shape} and mask {self.mask.dims} differ")

    @property
    def observed(self) -> np.ndarray:
        return self.mask.apply(self.truth)


def synthetic_low_rank(dims, rank: int, seed: int = 0, peak: float = 255.0) -> np.ndarray:
    """Random tensor of tubal rank ``rank``, scaled so that ``max |entry| == peak``.

    The t-product of seeded standard-normal ``n1 x rank x n3`` and
    ``rank x n2 x n3`` factors (numpy PCG64), rescaled to the magnitude of
    8-bit pixel data that the solver defaults are tuned for.
    """
    n1, n2, n3 = (int(d) for d in dims)
    if not 1 <= rank <= min(n1, n2):
        raise ValueError(f"rank {rank} outside 1..{min(n1, n2)}")
    rng = np.random.default_rng(seed)
    left = rng.standard_normal((n1, rank, n3))
    right = rng.standard_normal((rank, n2, n3))
    t = t_product(left, right)
    return t * (peak / np.abs(t).max())


# reports --------------------------------------------------------------------

def history_path(path) -> Path:
    path = Path(path)
    sibling = path.with_suffix(".csv")
    return sibling if sibling != path else path.with_suffix(".history.csv")


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_fields(report: SolverReport, score: RecoveryScore, seed=None) -> dict:
    return {
        "method": report.method,
        "r": report.config.r if report.method == "ttnn" else None,
        "mu": float(report.config.mu),
        "outer_iters": report.outer_iterations,
        "inner_iters": report.total_inner_iterations,
        "mse": float(score.mse),
        "psnr": float(score.psnr),
        "seed": seed,
    }


def save_report(report: SolverReport, score: RecoveryScore, path, seed=None) -> Path:
    """Write the key-value report to ``path`` and the history CSV next to it."""
    path = Path(path)
    lines = [f"{k} = {_fmt(v)}" for k, v in report_fields(report, score, seed).items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    hist = history_path(path)
    with open(hist, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for it, (res, obj) in enumerate(zip(report.outer_residuals, report.objective_history), 1):
            writer.writerow((it, repr(float(res)), repr(float(obj))))
    return hist


def _parse(key, text):
    if text == "none":
        return None
    if key == "method":
        return text
    if key in ("r", "outer_iters", "inner_iters", "seed"):
        return int(text)
    return float(text)


def load_report(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        out[key] = _parse(key, value.strip())
    return out


def load_history(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["iter"]), float(r["outer_residual"]), float(r["objective"])) for r in rows]

"""Minimal PGM (P2/P5) and PFM (Pf) readers and writers."""
import re
from pathlib import Path

import numpy as np

from .exceptions import ImageFormatError

PFM_INVALID = -1.0


def _pnm_tokens(data, count, start):
    """Pull ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = start
    token_re = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")
    while len(tokens) < count:
        m = token_re.match(data, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    return tokens, pos


def read_pgm(path):
    """Read a binary (P5, 8/16-bit) or ASCII (P2) PGM into a float64 array."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise ImageFormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _pnm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise ImageFormatError(f"{path}: bad PGM header") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: bad PGM dimensions or maxval")

    if magic == b"P2":
        values = data[pos:].split()
        if len(values) < w * h:
            raise ImageFormatError(f"{path}: expected {w * h} samples, found {len(values)}")
        img = np.array([int(v) for v in values[: w * h]], dtype=np.float64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        nbytes = w * h * dtype.itemsize
        if len(data) - pos < nbytes:
            raise ImageFormatError(f"{path}: truncated pixel data")
        img = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).astype(np.float64)
    return img.reshape(h, w)


def write_pgm(path, img, maxval=None, ascii=False):
    img = np.asarray(img)
    if img.ndim != 2:
        raise ImageFormatError("PGM images must be 2-D")
    if maxval is None:
        maxval = 65535 if img.max(initial=0) > 255 else 255
    data = np.clip(np.rint(img), 0, maxval).astype(np.int64)
    h, w = data.shape
    if ascii:
        body = "\n".join(" ".join(str(v) for v in row) for row in data)
        Path(path).write_bytes(f"P2\n{w} {h}\n{maxval}\n{body}\n".encode("ascii"))
        return
    dtype = ">u2" if maxval > 255 else np.uint8
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + data.astype(dtype).tobytes())


def read_pfm(path, invalid_to_nan=True):
    """Read a single-channel PFM. Negative samples become NaN by default."""
    with open(path, "rb") as f:
        tag = f.readline().strip()
        if tag != b"Pf":
            raise ImageFormatError(f"{path}: only single-channel PFM (Pf) supported")
        dims = f.readline().split()
        scale = float(f.readline().strip())
        try:
            w, h = int(dims[0]), int(dims[1])
        except (IndexError, ValueError):
            raise ImageFormatError(f"{path}: bad PFM dimensions") from None
        endian = "<" if scale < 0 else ">"
        buf = f.read()
    if len(buf) < w * h * 4:
        raise ImageFormatError(f"{path}: truncated PFM data")
    img = np.frombuffer(buf, dtype=endian + "f4", count=w * h).reshape(h, w)
    img = np.flipud(img).astype(np.float64)
    if invalid_to_nan:
        img[img < 0] = np.nan
    return img


def write_pfm(path, img):
    """Write little-endian single-channel PFM; non-finite samples become -1.0."""
    img = np.array(img, dtype=np.float64)
    if img.ndim != 2:
        raise ImageFormatError("PFM output must be 2-D")
    img[~np.isfinite(img)] = PFM_INVALID
    h, w = img.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    Path(path).write_bytes(header + np.flipud(img).astype("<f4").tobytes())


def disparity_visualization(disp):
    """Linearly stretch valid values to 0..255; invalid pixels map to 0."""
    disp = np.asarray(disp, dtype=np.float64)
    valid = np.isfinite(disp)
    out = np.zeros(disp.shape, dtype=np.uint8)
    if valid.any():
        lo, hi = disp[valid].min(), disp[valid].max()
        span = hi - lo if hi > lo else 1.0
        out[valid] = np.rint((disp[valid] - lo) / span * 255).astype(np.uint8)
    return out

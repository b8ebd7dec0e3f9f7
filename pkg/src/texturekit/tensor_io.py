"""Feature-map carrier type plus file formats.

Three byte formats live here, all little-endian:

``TXK1`` (single tensor)
    ========  =====================================
    bytes     content
    ========  =====================================
    0..3      magic ``b"TXK1"``
    4..7      u32 rank, always 3
    8..31     three u64 dims: channels, height, width
    32..      channels*height*width float32 values, C-order
    ========  =====================================

``TXKW`` (named weight bundle)
    magic ``b"TXKW"``, u32 record count, then per record:
    u32 name length, UTF-8 name, and an embedded TXK1 blob.

Images: binary PGM (``P5``, parsed natively) and 8-bit PNG
(grayscale or RGB, decoded via Pillow). Pixel values map to
[0, 1] by division by 255.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, NumericError, ShapeError, UnsupportedImageError

_TENSOR_MAGIC = b"TXK1"
_WEIGHTS_MAGIC = b"TXKW"
_HEADER = struct.Struct("<4sI3Q")


@dataclass(frozen=True)
class FeatureMap:
    """Immutable channels-height-width float32 array.

    The wrapped array is made read-only so maps can be shared freely.
    Construct through :func:`feature_map`, which validates and copies.
    """

    data: np.ndarray

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        c, h, w = self.data.shape
        return f"FeatureMap({c}x{h}x{w})"


def feature_map(values) -> FeatureMap:
    """Validate an array-like as a C x H x W float32 feature map."""
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 3:
        raise ShapeError(f"feature map must be 3-D (C, H, W), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ShapeError(f"feature map dims must be >= 1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NumericError("feature map contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return FeatureMap(arr)


def write_tensor(path, fm: FeatureMap) -> None:
    """Serialize one feature map as a TXK1 file."""
    c, h, w = fm.shape
    payload = np.ascontiguousarray(fm.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_TENSOR_MAGIC, 3, c, h, w))
        fh.write(payload)


def tensor_bytes(fm: FeatureMap) -> bytes:
    """TXK1 serialization of a feature map as a bytes object."""
    c, h, w = fm.shape
    return _HEADER.pack(_TENSOR_MAGIC, 3, c, h, w) + np.ascontiguousarray(
        fm.data, dtype="<f4"
    ).tobytes()


def read_tensor(path) -> FeatureMap:
    """Read a TXK1 file back into a feature map."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read tensor file {path}: {exc}") from exc
    fm, used = _tensor_from_bytes(blob, str(path))
    if used != len(blob):
        raise FormatError(f"{path}: {len(blob) - used} trailing bytes after payload")
    return fm


def _tensor_from_bytes(blob: bytes, label: str) -> tuple[FeatureMap, int]:
    if len(blob) < _HEADER.size:
        raise FormatError(f"{label}: truncated header ({len(blob)} bytes)")
    magic, rank, c, h, w = _HEADER.unpack_from(blob)
    if magic != _TENSOR_MAGIC:
        raise FormatError(f"{label}: bad magic {magic!r}")
    if rank != 3:
        raise FormatError(f"{label}: rank {rank} unsupported, expected 3")
    count = c * h * w
    if min(c, h, w) < 1 or count > 2**40:
        raise FormatError(f"{label}: implausible dims {(c, h, w)}")
    need = _HEADER.size + 4 * count
    if len(blob) < need:
        raise FormatError(f"{label}: payload truncated ({len(blob)} < {need} bytes)")
    values = np.frombuffer(blob, dtype="<f4", count=count, offset=_HEADER.size)
    if not np.isfinite(values).all():
        raise FormatError(f"{label}: payload contains non-finite values")
    return feature_map(values.reshape(c, h, w)), need


@dataclass(frozen=True)
class WeightSet:
    """Named bundle of feature maps used as matrices and vectors.

    Matrix entries are stored 1 x rows x cols (row = output index);
    vector entries 1 x 1 x length.
    """

    entries: dict
    version: str = "txkw1"

    def __getitem__(self, name: str) -> FeatureMap:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def matrix(self, name: str) -> np.ndarray:
        """Entry as a float64 2-D array (rows x cols)."""
        fm = self.entries[name]
        if fm.channels != 1:
            raise ShapeError(f"weight {name!r} is not a matrix: shape {fm.shape}")
        return fm.data[0].astype(np.float64)

    def vector(self, name: str) -> np.ndarray:
        """Entry as a float64 1-D array."""
        fm = self.entries[name]
        if fm.channels != 1 or fm.height != 1:
            raise ShapeError(f"weight {name!r} is not a vector: shape {fm.shape}")
        return fm.data[0, 0].astype(np.float64)


def save_weights(path, weights: WeightSet) -> None:
    """Serialize a weight bundle as a TXKW file."""
    with open(path, "wb") as fh:
        fh.write(_WEIGHTS_MAGIC)
        fh.write(struct.pack("<I", len(weights.entries)))
        for name, fm in weights.entries.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(tensor_bytes(fm))


def load_weights(path) -> WeightSet:
    """Read a TXKW weight bundle; duplicate names are an error."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read weights file {path}: {exc}") from exc
    if len(blob) < 8 or blob[:4] != _WEIGHTS_MAGIC:
        raise FormatError(f"{path}: not a TXKW weights file")
    (count,) = struct.unpack_from("<I", blob, 4)
    pos = 8
    entries: dict[str, FeatureMap] = {}
    for _ in range(count):
        if pos + 4 > len(blob):
            raise FormatError(f"{path}: truncated record header")
        (name_len,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if pos + name_len > len(blob):
            raise FormatError(f"{path}: truncated record name")
        try:
            name = blob[pos : pos + name_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: record name is not UTF-8") from exc
        pos += name_len
        if name in entries:
            raise FormatError(f"{path}: duplicate weight name {name!r}")
        fm, used = _tensor_from_bytes(blob[pos:], f"{path}:{name}")
        pos += used
        entries[name] = fm
    if pos != len(blob):
        raise FormatError(f"{path}: {len(blob) - pos} trailing bytes after records")
    return WeightSet(entries=entries)


def load_image(path) -> FeatureMap:
    """Load an 8-bit PGM (P5) or PNG image as a [0, 1] feature map."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
            fh.seek(0)
            blob = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read image {path}: {exc}") from exc
    if head[:2] == b"P5":
        return _decode_pgm(blob, str(path))
    if head[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(blob, str(path))
    raise FormatError(f"{path}: not a binary PGM (P5) or PNG file")


def _decode_pgm(blob: bytes, label: str) -> FeatureMap:
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(blob):
            raise FormatError(f"{label}: truncated PGM header")
        ch = blob[pos : pos + 1]
        if ch == b"#":  # comment runs to end of line
            nl = blob.find(b"\n", pos)
            pos = len(blob) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end : end + 1].isspace():
                end += 1
            token = blob[pos:end]
            if not token.isdigit():
                raise FormatError(f"{label}: bad PGM header token {token!r}")
            fields.append(int(token))
            pos = end
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval > 255:
        raise UnsupportedImageError(f"{label}: {maxval} exceeds 8-bit range")
    if maxval < 1 or width < 1 or height < 1:
        raise FormatError(f"{label}: bad PGM dimensions {width}x{height}/{maxval}")
    if len(blob) - pos < width * height:
        raise FormatError(f"{label}: PGM payload truncated")
    raw = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
    values = raw.reshape(1, height, width).astype(np.float32) / np.float32(255.0)
    return feature_map(values)


def _decode_png(blob: bytes, label: str) -> FeatureMap:
    from PIL import Image, UnidentifiedImageError

    try:
        img = Image.open(io.BytesIO(blob))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"{label}: undecodable PNG: {exc}") from exc
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.float32)[None]
    elif img.mode == "RGB":
        arr = np.asarray(img, dtype=np.float32).transpose(2, 0, 1)
    else:
        raise UnsupportedImageError(
            f"{label}: PNG mode {img.mode!r} unsupported (8-bit L or RGB only)"
        )
    return feature_map(arr / np.float32(255.0))


def snap_unit_sum(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Nudge a float32 probability vector so its float64 sum is 1 +/- tol.

    Casting float64 probabilities to float32 typically leaves a few-1e-9
    rounding residue; serialized distributions must re-read to exactly one.
    The residue is folded into the smallest bin that can absorb it.
    """
    out = values.astype(np.float32).ravel().copy()
    for _ in range(4):
        residue = 1.0 - out.astype(np.float64).sum()
        if abs(residue) <= tol:
            break
        candidates = np.flatnonzero(out + residue >= 0)
        if candidates.size == 0:  # pragma: no cover - degenerate input
            break
        k = candidates[np.argmin(out[candidates])]
        out[k] = np.float32(out[k] + residue)
    return out.reshape(values.shape)

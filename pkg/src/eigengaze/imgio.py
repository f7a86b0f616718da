"""Grayscale raster I/O, appearance vectors, occlusion, and synthetic views.

Images are plain PGM (P2 text / P5 binary). Appearance vectors are the
flattened, optionally unit-normalized pixel intensities that feed the
eigenspace builder.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyOcclusion,
    MalformedHeader,
    SampleCountMismatch,
    SampleOutOfRange,
    SideTooSmall,
    ZeroImage,
)

RAW = "raw"
UNIT = "unit"
NORM_MODES = (RAW, UNIT)


@dataclass(frozen=True)
class ViewLabel:
    object_id: str
    view_angle_deg: int
    occluded: bool = False

    def __post_init__(self):
        if not 0 <= self.view_angle_deg <= 359:
            raise ValueError("view_angle_deg must be in [0, 359]")


_UNLABELED = ViewLabel("", 0, False)


@dataclass(frozen=True)
class RasterImage:
    """Row-major grayscale raster with integer samples in [0, max_value]."""

    width: int
    height: int
    max_value: int
    samples: np.ndarray  # shape (width*height,), dtype int64

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if not 1 <= self.max_value <= 65535:
            raise ValueError("max_value must be in [1, 65535]")
        samples = np.asarray(self.samples, dtype=np.int64)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.width * self.height,):
            raise SampleCountMismatch(
                f"expected {self.width * self.height} samples, got {samples.size}"
            )
        if samples.min() < 0 or samples.max() > self.max_value:
            raise SampleOutOfRange(
                f"samples must lie in [0, {self.max_value}]"
            )

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.max_value == other.max_value
            and np.array_equal(self.samples, other.samples)
        )

    def grid(self) -> np.ndarray:
        return self.samples.reshape(self.height, self.width)


@dataclass(frozen=True)
class AppearanceVector:
    dim: int
    values: np.ndarray
    norm_mode: str
    source_label: ViewLabel = field(default=_UNLABELED)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (self.dim,):
            raise ValueError("values length must equal dim")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.norm_mode not in NORM_MODES:
            raise ValueError(f"norm_mode must be one of {NORM_MODES}")
        if self.norm_mode == UNIT:
            n = np.linalg.norm(values)
            if abs(n - 1.0) > 1e-12:
                raise ValueError(f"unit-mode vector has norm {n}")


@dataclass(frozen=True)
class OcclusionSpec:
    """Axis-aligned constant-fill rectangle; clamped to bounds on application."""

    x0: int
    y0: int
    w: int
    h: int
    fill: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError("occlusion offsets must be non-negative")
        if self.w < 1 or self.h < 1:
            raise ValueError("occlusion extents must be positive")
        if self.fill < 0:
            raise ValueError("fill must be non-negative")


# --- PGM parsing ---

def _header_tokens(data: bytes, count: int):
    """Yield `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset of the byte after the single whitespace char
    terminating the last token) so binary payloads can follow directly.
    """
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        if i == start:
            raise MalformedHeader("unexpected end of header")
        tokens.append(data[start:i])
        if len(tokens) == count:
            # exactly one whitespace byte separates the header from samples
            if i < n and data[i : i + 1].isspace():
                i += 1
    return tokens, i


def parse_pgm(data: bytes) -> RasterImage:
    """Parse a P2 (text) or P5 (binary) PGM byte sequence."""
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError("parse_pgm expects bytes")
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"bad magic {magic!r}")
    try:
        (_, w_tok, h_tok, max_tok), offset = _header_tokens(data, 4)
        width, height, max_value = int(w_tok), int(h_tok), int(max_tok)
    except MalformedHeader:
        raise
    except ValueError as exc:
        raise MalformedHeader(f"non-integer header field: {exc}") from exc
    if width < 1 or height < 1 or not 1 <= max_value <= 65535:
        raise MalformedHeader("invalid dimensions or max value")
    count = width * height

    if magic == b"P2":
        fields = data[offset:].split()
        if len(fields) != count:
            raise SampleCountMismatch(
                f"expected {count} samples, found {len(fields)}"
            )
        try:
            samples = np.array([int(f) for f in fields], dtype=np.int64)
        except ValueError as exc:
            raise SampleCountMismatch(f"non-integer sample: {exc}") from exc
    else:
        per = 1 if max_value < 256 else 2
        payload = data[offset : offset + count * per]
        if len(payload) != count * per:
            raise SampleCountMismatch(
                f"expected {count * per} payload bytes, found {len(payload)}"
            )
        dtype = np.dtype(">u2") if per == 2 else np.uint8
        samples = np.frombuffer(payload, dtype=dtype).astype(np.int64)

    if samples.size and (samples.min() < 0 or samples.max() > max_value):
        raise SampleOutOfRange(f"sample outside [0, {max_value}]")
    return RasterImage(width, height, max_value, samples)


def write_pgm(image: RasterImage, binary: bool = False) -> bytes:
    """Serialize to canonical PGM; identical inputs give identical bytes."""
    header = f"{image.width} {image.height}\n{image.max_value}\n"
    if not binary:
        body = " ".join(str(int(s)) for s in image.samples)
        return ("P2\n" + header + body + "\n").encode("ascii")
    per = 1 if image.max_value < 256 else 2
    dtype = np.dtype(">u2") if per == 2 else np.uint8
    return ("P5\n" + header).encode("ascii") + image.samples.astype(dtype).tobytes()


# --- appearance vectors ---

def vectorize(
    image: RasterImage,
    norm_mode: str = UNIT,
    label: ViewLabel = _UNLABELED,
) -> AppearanceVector:
    """Flatten an image to a length-d vector, scaled to [0,1] and optionally
    renormalized to unit Euclidean length."""
    if norm_mode not in NORM_MODES:
        raise ValueError(f"norm_mode must be one of {NORM_MODES}")
    values = image.samples.astype(np.float64) / image.max_value
    if norm_mode == UNIT:
        n = np.linalg.norm(values)
        if n == 0.0:
            raise ZeroImage("cannot unit-normalize an all-zero image")
        values = values / n
        # guard against residual round-off drifting past the invariant
        values = values / np.linalg.norm(values)
    return AppearanceVector(values.size, values, norm_mode, label)


def apply_occlusion(image: RasterImage, spec: OcclusionSpec) -> RasterImage:
    """Overwrite the clamped rectangle with spec.fill; everything else unchanged."""
    if spec.fill > image.max_value:
        raise SampleOutOfRange("occlusion fill exceeds image max_value")
    x1 = min(spec.x0 + spec.w, image.width)
    y1 = min(spec.y0 + spec.h, image.height)
    if spec.x0 >= image.width or spec.y0 >= image.height:
        raise EmptyOcclusion("occlusion rectangle lies entirely outside the image")
    grid = image.grid().copy()
    grid[spec.y0 : y1, spec.x0 : x1] = spec.fill
    return RasterImage(image.width, image.height, image.max_value, grid.ravel())


# --- synthetic views ---

_BACKGROUND = 128
_SUPERSAMPLE = 4


def _object_shape(object_id: str, seed: int):
    """Deterministic convex polygon parameters for one object."""
    digest = hashlib.sha256(
        object_id.encode("utf-8") + b"\x00" + str(seed).encode("ascii")
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    n_verts = int(rng.integers(4, 9))
    thetas = np.sort(rng.uniform(0.0, 2.0 * math.pi, n_verts))
    # vertices on an ellipse, in angular order, are always convex
    rx = rng.uniform(0.25, 0.45)
    ry = rng.uniform(0.25, 0.45)
    foreground = int(rng.integers(190, 256))
    return thetas, rx, ry, foreground


def synth_view(object_id: str, angle_deg: int, side: int, seed: int) -> RasterImage:
    """Render one deterministic synthetic appearance of an object.

    The object is a filled convex polygon derived from (object_id, seed),
    rotated by angle_deg about the image center and anti-aliased (4x4
    supersampling) onto a mid-gray background.
    """
    if side < 8:
        raise SideTooSmall("side must be at least 8 pixels")
    thetas, rx, ry, foreground = _object_shape(object_id, seed)
    vx = rx * side * np.cos(thetas)
    vy = ry * side * np.sin(thetas)

    phi = math.radians(angle_deg)
    c, s = math.cos(phi), math.sin(phi)
    half = side / 2.0
    rvx = c * vx - s * vy + half
    rvy = s * vx + c * vy + half

    ss = _SUPERSAMPLE
    coords = (np.arange(side * ss, dtype=np.float64) + 0.5) / ss
    px, py = np.meshgrid(coords, coords)

    inside = np.ones(px.shape, dtype=bool)
    n = len(rvx)
    # counter-clockwise vertex order: point is inside iff left of every edge
    for i in range(n):
        j = (i + 1) % n
        ex, ey = rvx[j] - rvx[i], rvy[j] - rvy[i]
        inside &= ex * (py - rvy[i]) - ey * (px - rvx[i]) >= 0.0

    coverage = inside.reshape(side, ss, side, ss).mean(axis=(1, 3))
    shade = np.rint(_BACKGROUND + coverage * (foreground - _BACKGROUND))
    return RasterImage(side, side, 255, shade.astype(np.int64).ravel())

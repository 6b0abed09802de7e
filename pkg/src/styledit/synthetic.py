"""Procedural labeled face-schematic dataset.

Renders small RGB images of schematic faces whose appearance is controlled by
binary attributes (smile, glasses, dark hair, mustache, wide jaw) plus a
nuisance seed for pose/color jitter. A deterministic, rule-based measurement
oracle recovers the attribute bits from pixels alone, so edits made anywhere
else in the pipeline can be verified against ground truth that involves no
learned model.

All geometry lives in normalized [0, 1] coordinates (y increasing downward)
so the same shapes render at any supported resolution. Rendering is pure:
identical specs produce bit-identical images, and nuisance jitter is bounded
so it can never flip what the oracle measures.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

ATTRIBUTE_NAMES = ("smile", "glasses", "dark_hair", "mustache", "wide_jaw")
NUM_ATTRIBUTES = len(ATTRIBUTE_NAMES)
SUPPORTED_RESOLUTIONS = (16, 32, 64)

DATASET_MAGIC = b"GSFD1"
_HEADER_FMT = "<IHBBQ"  # count, resolution, channels, k, seed

# Region bounds and thresholds used by the measurement oracle. Regions are
# fixed in normalized coordinates; the renderer's jitter ranges are chosen so
# every feature keeps at least one solid-interior pixel row inside its region
# at the coarsest supported resolution (16px) for all nuisance seeds.
_HAIR_REGION = (0.19, 0.31, 0.43, 0.57)  # y0, y1, x0, x1
_SKIN_REGION = (0.52, 0.56, 0.30, 0.70)
_GLASS_REGION = (0.37, 0.50, 0.30, 0.70)
_MUST_REGION = (0.575, 0.67, 0.43, 0.57)
_JAW_REGION = (0.72, 0.86, 0.0, 1.0)
_MOUTH_REGION = (0.68, 0.86, 0.33, 0.67)

_HAIR_DARK_LUM = 0.40
_GLASS_DROP = 0.20
_MUST_DROP = 0.22
_JAW_AREA = 0.295
_SMILE_CURVE = 0.025
_WARM_RB = 0.12
_RED_DOMINANCE = 0.12


@dataclass(frozen=True)
class RenderSpec:
    """Full description of one rendered face: attribute bits plus nuisance."""

    attributes: np.ndarray
    nuisance_seed: int
    resolution: int = 32

    def __post_init__(self):
        bits = np.asarray(self.attributes, dtype=np.uint8)
        if bits.ndim != 1 or bits.size < 1 or bits.size > NUM_ATTRIBUTES:
            raise ConfigError(
                f"attributes must be a 1-D vector of 1..{NUM_ATTRIBUTES} bits, got shape {bits.shape}"
            )
        if not np.all((bits == 0) | (bits == 1)):
            raise ConfigError("attribute bits must be exactly 0 or 1")
        object.__setattr__(self, "attributes", bits)
        if self.resolution not in SUPPORTED_RESOLUTIONS:
            raise ConfigError(
                f"resolution must be one of {SUPPORTED_RESOLUTIONS}, got {self.resolution}"
            )


@dataclass
class LabeledDataset:
    """Images in [0, 1] with per-image attribute bit vectors."""

    images: np.ndarray  # (n, res, res, 3) float32 in [0, 1]
    labels: np.ndarray  # (n, k) uint8
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise ConfigError(
                f"images/labels count mismatch: {self.images.shape[0]} vs {self.labels.shape[0]}"
            )

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def k(self) -> int:
        return self.labels.shape[1]

    @property
    def resolution(self) -> int:
        return self.images.shape[1]


def _nuisance_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _record_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based stream: record i is reproducible without generating 0..i-1.
    return np.random.Generator(
        np.random.Philox(key=np.uint64(seed), counter=[0, 0, 0, int(index)])
    )


def _full_bits(bits: np.ndarray) -> np.ndarray:
    out = np.zeros(NUM_ATTRIBUTES, dtype=np.uint8)
    out[: bits.size] = bits
    return out


class _Jitter:
    """Draws the nuisance parameters in a fixed order from one stream."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def u(self, lo: float, hi: float) -> float:
        return float(self.rng.uniform(lo, hi))


def render(spec: RenderSpec) -> np.ndarray:
    """Render one face-schematic image, shape (res, res, 3), float32 in [0, 1].

    Pixel values are quantized to the 8-bit grid so images survive the packed
    dataset file format losslessly.
    """
    res = spec.resolution
    bits = _full_bits(spec.attributes)
    smile, glasses, dark_hair, mustache, wide_jaw = (int(b) for b in bits)
    j = _Jitter(_nuisance_rng(spec.nuisance_seed))

    # Nuisance parameters, drawn in a fixed order that never depends on the
    # attribute bits, so two specs differing only in bits share all jitter.
    bg_shade = j.u(0.78, 0.84)
    cx = j.u(0.485, 0.515)
    cy = j.u(0.52, 0.54)
    rx = j.u(0.262, 0.278)
    ry = j.u(0.379, 0.391)
    skin_scale = j.u(0.97, 1.03)
    hair_jit = j.u(-0.02, 0.02)
    hair_line = j.u(0.327, 0.343)
    eye_y = j.u(0.425, 0.435)
    eye_dx = j.u(0.109, 0.121)
    eye_r = j.u(0.027, 0.033)
    mouth_y = j.u(0.724, 0.736)
    mouth_hw = j.u(0.089, 0.101)
    must_y = j.u(0.620, 0.630)
    must_hw = j.u(0.094, 0.106)
    jaw = (j.u(0.92, 0.98) if wide_jaw else j.u(0.39, 0.45))

    ax = (np.arange(res, dtype=np.float32) + 0.5) / res
    xx, yy = np.meshgrid(ax, ax)  # xx varies along columns, yy along rows
    aa = 1.0 / res  # antialiasing width of one pixel

    def soft(signed_inside: np.ndarray) -> np.ndarray:
        # signed_inside > 0 inside the shape, in normalized units
        return np.clip(signed_inside / aa + 0.5, 0.0, 1.0).astype(np.float32)

    def ellipse(ecx, ecy, erx, ery):
        r = np.sqrt(((xx - ecx) / erx) ** 2 + ((yy - ecy) / ery) ** 2)
        return soft((1.0 - r) * min(erx, ery))

    def box(x0, x1, y0, y1):
        mx = soft(np.minimum(xx - x0, x1 - xx))
        my = soft(np.minimum(yy - y0, y1 - yy))
        return mx * my

    img = np.empty((res, res, 3), dtype=np.float32)
    img[..., 0] = bg_shade
    img[..., 1] = bg_shade
    img[..., 2] = bg_shade + 0.03

    def paint(mask, color, weight=1.0):
        m = (mask * weight)[..., None]
        img[:] = img * (1.0 - m) + np.asarray(color, dtype=np.float32) * m

    # Head: ellipse whose lower half tapers toward the chin; the jaw factor
    # sets how much width survives at the bottom.
    t = np.clip((yy - cy) / ry, 0.0, 1.0)
    rx_eff = rx * (1.0 - t * (1.0 - jaw))
    head_r = np.sqrt(((xx - cx) / rx_eff) ** 2 + ((yy - cy) / ry) ** 2)
    head = soft((1.0 - head_r) * min(rx, ry))
    skin = np.array([0.89, 0.80, 0.66], dtype=np.float32) * skin_scale
    paint(head, skin)

    # Hair: fills the head above the forehead line.
    hair_mask = head * soft(hair_line - yy)
    if dark_hair:
        hair_color = np.array([0.13, 0.10, 0.08]) + hair_jit
    else:
        hair_color = np.array([0.84, 0.71, 0.38]) + hair_jit
    paint(hair_mask, hair_color.astype(np.float32))

    # Nose: thin, slightly darker vertical stripe.
    paint(box(cx - 0.006, cx + 0.006, 0.50, 0.595), skin * 0.82)

    # Eyes.
    eye_color = (0.08, 0.08, 0.10)
    paint(ellipse(cx - eye_dx, eye_y, eye_r, eye_r), eye_color)
    paint(ellipse(cx + eye_dx, eye_y, eye_r, eye_r), eye_color)

    if glasses:
        lens_rx, lens_ry, frame_th = 0.075, 0.048, 0.016
        frame_color = (0.10, 0.10, 0.12)
        for ex in (cx - eye_dx, cx + eye_dx):
            inner = ellipse(ex, eye_y, lens_rx, lens_ry)
            outer = ellipse(ex, eye_y, lens_rx + frame_th, lens_ry + frame_th)
            paint(inner, (0.42, 0.44, 0.48), weight=0.55)  # tinted lens
            paint(outer * (1.0 - inner), frame_color)
        bridge = box(cx - eye_dx + lens_rx, cx + eye_dx - lens_rx,
                     eye_y - 0.012, eye_y + 0.012)
        paint(bridge, frame_color)

    if mustache:
        paint(box(cx - must_hw, cx + must_hw, must_y - 0.055, must_y + 0.055),
              (0.23, 0.14, 0.09))

    # Mouth: thick curve y(x) = mouth_y + depth * (1 - (dx/hw)^2); depth 0 is
    # the neutral straight bar, positive depth bows the center downward.
    depth = 0.085 if smile else 0.0
    dx_rel = (xx - cx) / mouth_hw
    curve_y = mouth_y + depth * (1.0 - dx_rel**2)
    mouth_mask = soft(0.026 - np.abs(yy - curve_y)) * soft((1.0 - np.abs(dx_rel)) * mouth_hw)
    paint(mouth_mask, (0.66, 0.06, 0.08))

    np.clip(img, 0.0, 1.0, out=img)
    return (np.round(img * 255.0) / 255.0).astype(np.float32)


def _span(lo: float, hi: float, res: int) -> tuple[int, int]:
    # Indices of pixels whose centers (i + 0.5) / res fall inside [lo, hi].
    first = int(np.ceil(lo * res - 0.5))
    last = int(np.floor(hi * res - 0.5))
    if last < first:  # degenerate; take the single nearest pixel
        first = last = int(round((lo + hi) * 0.5 * res - 0.5))
    return max(first, 0), min(last + 1, res)


def _region(image: np.ndarray, bounds) -> np.ndarray:
    res = image.shape[0]
    y0, y1, x0, x1 = bounds
    r0, r1 = _span(y0, y1, res)
    c0, c1 = _span(x0, x1, res)
    return image[r0:r1, c0:c1]


def _luminance(pixels: np.ndarray) -> np.ndarray:
    return 0.299 * pixels[..., 0] + 0.587 * pixels[..., 1] + 0.114 * pixels[..., 2]


def oracle_measures(image: np.ndarray) -> dict:
    """Raw geometric/color measurements behind `oracle_label`.

    Exposed separately so threshold margins can be inspected and regression
    tested; all values are plain floats.
    """
    image = np.asarray(image, dtype=np.float32)
    skin_ref = float(np.median(_luminance(_region(image, _SKIN_REGION))))
    hair_lum = float(np.mean(_luminance(_region(image, _HAIR_REGION))))
    glass_drop = skin_ref - float(np.mean(_luminance(_region(image, _GLASS_REGION))))
    must_drop = skin_ref - float(np.mean(_luminance(_region(image, _MUST_REGION))))

    jaw_px = _region(image, _JAW_REGION)
    warm = (jaw_px[..., 0] - jaw_px[..., 2]) > _WARM_RB
    jaw_area = float(np.mean(warm))

    mouth_px = _region(image, _MOUTH_REGION)
    redness = mouth_px[..., 0] - np.maximum(mouth_px[..., 1], mouth_px[..., 2])
    weight = np.clip(redness - _RED_DOMINANCE, 0.0, None)
    res = image.shape[0]
    curvature = 0.0
    # Redness-weighted mean mouth row in the left/center/right thirds of the
    # region; a downward-bowed (smiling) mouth sits deeper in the center.
    height, width = weight.shape
    rows = np.arange(height, dtype=np.float64)[:, None]
    thirds = []
    for a, b in ((0.0, 1 / 3), (1 / 3, 2 / 3), (2 / 3, 1.0)):
        c0, c1 = int(a * width), max(int(b * width), int(a * width) + 1)
        w = weight[:, c0:c1]
        total = float(w.sum())
        thirds.append(float((w * rows).sum()) / total / res if total > 1e-4 else None)
    left, center, right = thirds
    if left is not None and center is not None and right is not None:
        curvature = center - 0.5 * (left + right)

    return {
        "skin_ref": skin_ref,
        "hair_lum": hair_lum,
        "glass_drop": glass_drop,
        "must_drop": must_drop,
        "jaw_area": jaw_area,
        "smile_curvature": curvature,
    }


def oracle_label(image: np.ndarray, k: int = NUM_ATTRIBUTES) -> np.ndarray:
    """Estimate attribute bits from pixels using fixed geometric rules.

    Reliable on renderer output (and on generator samples that resemble it);
    any image without the measured structure, e.g. a uniform gray canvas,
    falls through every contrast test and yields all zeros.
    """
    m = oracle_measures(image)
    bits = np.array(
        [
            m["smile_curvature"] > _SMILE_CURVE,
            m["glass_drop"] > _GLASS_DROP,
            m["hair_lum"] < _HAIR_DARK_LUM,
            m["must_drop"] > _MUST_DROP,
            m["jaw_area"] > _JAW_AREA,
        ],
        dtype=np.uint8,
    )
    return bits[:k]


def sample_dataset(n: int, seed: int, k: int = NUM_ATTRIBUTES, resolution: int = 32) -> LabeledDataset:
    """Draw `n` faces with independent uniform attribute bits.

    Each record derives from its own counter-based stream keyed by `seed`, so
    generation is order-independent and could be parallelized by index.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= k <= NUM_ATTRIBUTES:
        raise ConfigError(f"k must be in 1..{NUM_ATTRIBUTES}, got {k}")
    images = np.empty((n, resolution, resolution, 3), dtype=np.float32)
    labels = np.empty((n, k), dtype=np.uint8)
    for i in range(n):
        rng = _record_rng(seed, i)
        bits = rng.integers(0, 2, size=k).astype(np.uint8)
        nuisance = int(rng.integers(0, 2**63))
        images[i] = render(RenderSpec(bits, nuisance, resolution))
        labels[i] = bits
    meta = {"n": n, "k": k, "resolution": resolution, "seed": seed}
    return LabeledDataset(images, labels, meta)


def save_dataset(dataset: LabeledDataset, path: str | Path) -> None:
    """Write the packed binary file plus a JSON manifest next to it."""
    path = Path(path)
    n, res = len(dataset), dataset.resolution
    seed = int(dataset.meta.get("seed", 0))
    pixels = np.round(dataset.images * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(DATASET_MAGIC)
        f.write(struct.pack(_HEADER_FMT, n, res, 3, dataset.k, seed))
        for i in range(n):
            f.write(pixels[i].tobytes())
            f.write(dataset.labels[i].tobytes())
    manifest = {
        "count": n,
        "resolution": res,
        "channels": 3,
        "k": dataset.k,
        "seed": seed,
        "attribute_names": list(ATTRIBUTE_NAMES[: dataset.k]),
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(manifest, indent=2))


def load_dataset(path: str | Path) -> LabeledDataset:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:5] != DATASET_MAGIC:
        raise ConfigError(f"{path}: bad magic, not a dataset file")
    header_size = struct.calcsize(_HEADER_FMT)
    n, res, channels, k, seed = struct.unpack_from(_HEADER_FMT, raw, 5)
    record = res * res * channels + k
    expected = 5 + header_size + n * record
    if len(raw) != expected:
        raise ConfigError(f"{path}: truncated or oversized ({len(raw)} != {expected} bytes)")
    body = np.frombuffer(raw, dtype=np.uint8, offset=5 + header_size)
    body = body.reshape(n, record)
    images = body[:, : res * res * channels].reshape(n, res, res, channels)
    labels = body[:, res * res * channels:].copy()
    meta = {"n": n, "k": k, "resolution": res, "seed": seed}
    return LabeledDataset((images.astype(np.float32) / 255.0), labels, meta)

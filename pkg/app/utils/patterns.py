"""
Test frames for self-checks: a bundled photograph and synthetic patterns.
"""
from pathlib import Path

import numpy as np
from PIL import Image

from app.services.sphere import pixel_grid_dirs


def smooth_pattern(side: int, channels: int = 3, seed: int = 0, octaves: int = 4) -> np.ndarray:
    """Band-limited square image in [0, 1]: a seeded sum of low-frequency sinusoids."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:side, 0:side] / float(side)
    out = np.zeros((side, side, channels))
    for c in range(channels):
        acc = np.zeros((side, side))
        for k in range(1, octaves + 1):
            fx, fy = rng.uniform(0.5, 1.5, size=2) * k
            phase = rng.uniform(0.0, 2.0 * np.pi)
            acc += np.sin(2.0 * np.pi * (fx * x + fy * y) + phase) / k
        out[:, :, c] = acc
    lo, hi = out.min(), out.max()
    return (out - lo) / (hi - lo) if hi > lo else np.full_like(out, 0.5)


def sphere_pattern(height: int, channels: int = 3) -> np.ndarray:
    """Equirectangular canvas that is continuous across the seam and the poles."""
    yaw, pitch = pixel_grid_dirs(height, 2 * height)
    x = np.cos(pitch) * np.cos(yaw)
    y = np.cos(pitch) * np.sin(yaw)
    z = np.sin(pitch)
    bases = (x, y, z, x * y, y * z)
    out = np.stack([0.5 + 0.5 * bases[c % len(bases)] for c in range(channels)], axis=-1)
    return out


def ramp_pattern(height: int, channels: int = 1) -> np.ndarray:
    """Left-to-right ramp with the maximum seam discontinuity."""
    width = 2 * height
    ramp = np.broadcast_to(np.arange(width, dtype=np.float64) / (width - 1), (height, width))
    return np.repeat(ramp[:, :, None], channels, axis=2)


# Coffee cup photograph (Rachel Michetti, CC0), 600x400 RGB.
REFERENCE_PHOTO = Path(__file__).parent.parent / "data" / "coffee.png"


def reference_photo(side: int) -> np.ndarray:
    """Center square of the bundled photograph, Lanczos-resized to side×side RGB in [0, 1]."""
    with Image.open(REFERENCE_PHOTO) as img:
        img = img.convert("RGB")
        width, height = img.size
        s = min(width, height)
        left, top = (width - s) // 2, (height - s) // 2
        img = img.crop((left, top, left + s, top + s)).resize((side, side), Image.Resampling.LANCZOS)
        return np.asarray(img, dtype=np.float64) / 255.0

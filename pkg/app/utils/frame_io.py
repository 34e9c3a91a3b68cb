"""
Frame sequence I/O: 8-bit PNG sequences (Pillow) and raw planar float32 files.

Raw `.f32` layout (little-endian): a 24-byte header
`magic b"PF32" | version u32 | H u32 | W u32 | C u32 | T u32` followed by
T·C·H·W float32 values ordered frame, channel, row, column.
"""
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from app.core.exceptions import FrameFormatError

logger = logging.getLogger(__name__)

RAW_MAGIC = b"PF32"
RAW_VERSION = 1
RAW_SUFFIX = ".f32"
RAW_HEADER = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("height", "<u4"),
    ("width", "<u4"),
    ("channels", "<u4"),
    ("frames", "<u4"),
])

PNG_MODES = {1: "L", 3: "RGB", 4: "RGBA"}
FRAME_PATTERN = "frame_{:05d}.png"


def _to_uint8(frame: np.ndarray) -> np.ndarray:
    return np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_png(path: Path, frame: np.ndarray) -> None:
    """Write an H×W or H×W×C frame with values in [0, 1] as an 8-bit PNG."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3 and frame.shape[2] == 1:
        frame = frame[:, :, 0]
    channels = 1 if frame.ndim == 2 else frame.shape[2]
    if channels not in PNG_MODES:
        raise FrameFormatError(str(path), f"{channels} channels cannot be stored as PNG; use {RAW_SUFFIX}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(_to_uint8(frame)).save(path)


def read_png(path: Path) -> np.ndarray:
    """Read a PNG as a float64 H×W×C array in [0, 1]."""
    try:
        with Image.open(path) as img:
            if img.mode not in PNG_MODES.values():
                img = img.convert("RGB")
            data = np.asarray(img, dtype=np.float64) / 255.0
    except (OSError, ValueError) as e:
        raise FrameFormatError(str(path), f"cannot read image ({e})")
    if data.ndim == 2:
        data = data[:, :, None]
    return data


def write_mask_png(path: Path, mask: np.ndarray) -> None:
    """Binary mask as a 0/255 grayscale PNG."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def read_mask_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            data = np.asarray(img.convert("L"))
    except (OSError, ValueError) as e:
        raise FrameFormatError(str(path), f"cannot read mask ({e})")
    return data >= 128


def write_raw(path: Path, video: np.ndarray) -> None:
    """Write a T×H×W×C video as a raw planar float32 file."""
    video = np.asarray(video)
    if video.ndim == 3:
        video = video[..., None]
    if video.ndim != 4:
        raise FrameFormatError(str(path), f"expected T×H×W×C frames, got shape {video.shape}")
    frames, height, width, channels = video.shape
    header = np.array(
        [(RAW_MAGIC, RAW_VERSION, height, width, channels, frames)], dtype=RAW_HEADER
    )
    planar = np.ascontiguousarray(video.transpose(0, 3, 1, 2), dtype="<f4")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(planar.tobytes())


def read_raw(path: Path) -> np.ndarray:
    """Read a raw planar float32 file into a float64 T×H×W×C array."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise FrameFormatError(str(path), f"cannot read ({e})")
    if len(blob) < RAW_HEADER.itemsize:
        raise FrameFormatError(str(path), "file shorter than the raw header")
    header = np.frombuffer(blob, dtype=RAW_HEADER, count=1)[0]
    if header["magic"] != RAW_MAGIC:
        raise FrameFormatError(str(path), f"bad magic {bytes(header['magic'])!r}")
    if header["version"] != RAW_VERSION:
        raise FrameFormatError(str(path), f"unsupported version {int(header['version'])}")
    frames, channels = int(header["frames"]), int(header["channels"])
    height, width = int(header["height"]), int(header["width"])
    expected = frames * channels * height * width
    values = np.frombuffer(blob, dtype="<f4", offset=RAW_HEADER.itemsize)
    if values.size != expected:
        raise FrameFormatError(
            str(path), f"header declares {expected} values, payload has {values.size}"
        )
    planar = values.reshape(frames, channels, height, width)
    return planar.transpose(0, 2, 3, 1).astype(np.float64)


def read_frames(path: Path) -> np.ndarray:
    """Load a frame set as T×H×W×C.

    Accepts a `.f32` file, a single PNG (one frame) or a directory of PNGs
    read in name order. All frames of a sequence must share one shape.
    """
    path = Path(path)
    if path.suffix == RAW_SUFFIX:
        return read_raw(path)
    if path.is_dir():
        files = sorted(path.glob("*.png"))
        if not files:
            raise FrameFormatError(str(path), "directory contains no PNG frames")
    elif path.exists():
        files = [path]
    else:
        raise FrameFormatError(str(path), "no such file or directory")

    frames = [read_png(f) for f in files]
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        raise FrameFormatError(str(path), f"frames differ in shape: {sorted(shapes)}")
    logger.debug(f"Read {len(frames)} frames from {path}")
    return np.stack(frames)


def write_frames(path: Path, video: np.ndarray) -> list[Path]:
    """Store T×H×W×C frames as a `.f32` file or a directory of numbered PNGs."""
    path = Path(path)
    if path.suffix == RAW_SUFFIX:
        write_raw(path, video)
        return [path]
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for t, frame in enumerate(np.asarray(video)):
        target = path / FRAME_PATTERN.format(t)
        write_png(target, frame)
        written.append(target)
    logger.debug(f"Wrote {len(written)} frames to {path}")
    return written


def write_mask_frames(path: Path, masks: np.ndarray) -> list[Path]:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for t, mask in enumerate(np.asarray(masks)):
        target = path / FRAME_PATTERN.format(t)
        write_mask_png(target, mask)
        written.append(target)
    return written

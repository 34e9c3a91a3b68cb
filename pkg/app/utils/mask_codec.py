"""
Cross-domain mask files.

Binary part (little-endian): 16-byte header `magic b"PXDM" | version u32 |
count u64`, then `count` packed triples
`frame u32 | view u16 | pano_idx u32 | view_idx u32 | tag u8 | weight f32`
in table order. Canvas size, blur and view poses live in a JSON sidecar next
to it (same stem, `.json`).
"""
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from app.core.exceptions import MaskFormatError
from app.schemas.geometry import CameraPose, PoseRecord, SphereDir
from app.schemas.masks import CrossDomainMask, MaskTag

logger = logging.getLogger(__name__)

MASK_MAGIC = b"PXDM"
MASK_VERSION = 1
MASK_HEADER = np.dtype([("magic", "S4"), ("version", "<u4"), ("count", "<u8")])
TRIPLE = np.dtype([
    ("frame", "<u4"),
    ("view", "<u2"),
    ("pano_idx", "<u4"),
    ("view_idx", "<u4"),
    ("tag", "u1"),
    ("weight", "<f4"),
])


class MaskSidecar(BaseModel):
    """Metadata stored next to a cross-domain mask binary."""
    version: int = MASK_VERSION
    height: int = Field(..., ge=4)
    width: int
    side: int = Field(..., ge=1)
    sigma: float = Field(..., ge=0)
    antipodal_weight: float = Field(..., gt=0, le=1)
    weight_threshold: float = Field(..., gt=0, lt=1)
    antipodal: bool = True
    lambda_direct: float
    lambda_antipodal: float
    triple_count: int = Field(..., ge=0)
    direct_count: int = Field(..., ge=0)
    antipodal_count: int = Field(..., ge=0)
    # radians, so poses survive the round trip exactly
    view_dirs: list[tuple[float, float]]
    views: list[PoseRecord]


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def write_cross_domain_mask(
    mask: CrossDomainMask, path: Path, lambda_direct: float, lambda_antipodal: float
) -> tuple[Path, Path]:
    """Write the triple table and its sidecar; returns both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.empty(len(mask), dtype=TRIPLE)
    table["frame"] = mask.frame
    table["view"] = mask.view
    table["pano_idx"] = mask.pano_idx
    table["view_idx"] = mask.view_idx
    table["tag"] = mask.tag
    table["weight"] = mask.weight
    header = np.array([(MASK_MAGIC, MASK_VERSION, len(mask))], dtype=MASK_HEADER)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(table.tobytes())

    sidecar = MaskSidecar(
        height=mask.height,
        width=mask.width,
        side=mask.side,
        sigma=mask.sigma,
        antipodal_weight=mask.antipodal_weight,
        weight_threshold=mask.weight_threshold,
        antipodal=mask.antipodal,
        lambda_direct=lambda_direct,
        lambda_antipodal=lambda_antipodal,
        triple_count=len(mask),
        direct_count=mask.count(MaskTag.direct),
        antipodal_count=mask.count(MaskTag.antipodal),
        view_dirs=[(pose.yaw, pose.pitch) for pose in mask.views],
        views=[pose.to_record() for pose in mask.views],
    )
    meta_path = sidecar_path(path)
    meta_path.write_text(sidecar.model_dump_json(indent=2))
    logger.info(f"Wrote {len(mask)} mask triples to {path}")
    return path, meta_path


def read_cross_domain_mask(path: Path) -> tuple[CrossDomainMask, MaskSidecar]:
    path = Path(path)
    meta_path = sidecar_path(path)
    try:
        blob = path.read_bytes()
        meta_raw = meta_path.read_text()
    except OSError as e:
        raise MaskFormatError(str(path), f"cannot read ({e})")
    try:
        meta = MaskSidecar.model_validate_json(meta_raw)
    except ValidationError as e:
        raise MaskFormatError(str(meta_path), f"invalid sidecar ({e})")

    if len(blob) < MASK_HEADER.itemsize:
        raise MaskFormatError(str(path), "file shorter than the header")
    header = np.frombuffer(blob, dtype=MASK_HEADER, count=1)[0]
    if header["magic"] != MASK_MAGIC:
        raise MaskFormatError(str(path), f"bad magic {bytes(header['magic'])!r}")
    if header["version"] != MASK_VERSION or meta.version != MASK_VERSION:
        raise MaskFormatError(str(path), f"unsupported version {int(header['version'])}")
    count = int(header["count"])
    payload = len(blob) - MASK_HEADER.itemsize
    if payload != count * TRIPLE.itemsize:
        raise MaskFormatError(str(path), f"header declares {count} triples, payload holds {payload} bytes")
    if count != meta.triple_count:
        raise MaskFormatError(str(path), f"sidecar declares {meta.triple_count} triples, binary has {count}")
    if meta.width != 2 * meta.height:
        raise MaskFormatError(str(meta_path), f"canvas {meta.height}x{meta.width} violates W = 2H")
    if len(meta.view_dirs) != len(meta.views):
        raise MaskFormatError(str(meta_path), "view direction and pose lists differ in length")

    table = np.frombuffer(blob, dtype=TRIPLE, count=count, offset=MASK_HEADER.itemsize)
    views = tuple(
        CameraPose(fov_deg=record.fov_deg, dir=SphereDir(yaw=yaw, pitch=pitch))
        for record, (yaw, pitch) in zip(meta.views, meta.view_dirs)
    )
    try:
        mask = CrossDomainMask(
            height=meta.height,
            side=meta.side,
            sigma=meta.sigma,
            antipodal_weight=meta.antipodal_weight,
            weight_threshold=meta.weight_threshold,
            antipodal=meta.antipodal,
            views=views,
            frame=table["frame"].astype(np.uint32),
            view=table["view"].astype(np.uint16),
            pano_idx=table["pano_idx"].astype(np.uint32),
            view_idx=table["view_idx"].astype(np.uint32),
            tag=table["tag"].astype(np.uint8),
            weight=table["weight"].astype(np.float32),
        )
    except ValidationError as e:
        raise MaskFormatError(str(path), f"inconsistent triple table ({e})")
    return mask, meta

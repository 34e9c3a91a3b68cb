"""
Clip windowing, static-clip filtering and manifest management.

Flow statistics, shot boundaries and captions come from external tools as
files; nothing here touches raw video.
"""
import json
import logging
import math
from pathlib import Path
from typing import Iterable, Literal

from pydantic import ValidationError

from app.core.exceptions import DuplicateClipId, EmptyFlowStats, FrameFormatError, PreconditionViolation
from app.schemas.dataset import CaptionLine, ClipRecord, ClipWindow, FlowStats, FlowStatsLine

logger = logging.getLogger(__name__)

CLIP_SECONDS = 5.0
OUTPUT_FPS = 20.0
SPEEDUP = 2

FLOW_THRESHOLD = 0.1
MIN_DYNAMIC_FRACTION = 0.10

FilterRule = Literal["fraction", "peak"]


def window_clips(
    total_frames: int,
    src_fps: float,
    clip_seconds: float = CLIP_SECONDS,
    out_fps: float = OUTPUT_FPS,
    speedup: int = SPEEDUP,
) -> list[ClipWindow]:
    """Tile the source into non-overlapping windows of one output clip each.

    Frames are dropped first (every `speedup`-th frame) and the result is
    resampled to `out_fps`, so each output frame advances
    `speedup · src_fps / out_fps` raw frames. A trailing partial window is
    dropped.
    """
    if total_frames < 1:
        raise PreconditionViolation("window_clips", f"total_frames must be >= 1, got {total_frames}")
    if src_fps <= 0:
        raise PreconditionViolation("window_clips", f"src_fps must be > 0, got {src_fps}")

    clip_frames = int(round(clip_seconds * out_fps))
    stride = speedup * src_fps / out_fps
    span = int(math.ceil(clip_frames * stride - 1e-9))
    windows = [
        ClipWindow(start=start, end=start + span, stride=stride)
        for start in range(0, total_frames - span + 1, span)
    ] if span <= total_frames else []
    logger.debug(f"{total_frames} frames at {src_fps} fps -> {len(windows)} windows of {span} raw frames")
    return windows


def windows_for_shots(
    shots: Iterable[tuple[int, int]], src_fps: float, **window_kwargs
) -> list[ClipWindow]:
    """Window every shot independently; shot bounds are inclusive frame pairs."""
    windows: list[ClipWindow] = []
    for first, last in shots:
        length = last - first + 1
        if length < 1:
            continue
        for w in window_clips(length, src_fps, **window_kwargs):
            windows.append(ClipWindow(start=first + w.start, end=first + w.end, stride=w.stride))
    return windows


def static_filter(
    stats: FlowStats,
    thresh: float = FLOW_THRESHOLD,
    min_fraction: float = MIN_DYNAMIC_FRACTION,
    rule: FilterRule = "fraction",
) -> bool:
    """Return True to keep a clip.

    `fraction`: keep iff at least `min_fraction` of frames have mean flow
    above `thresh` (exactly the fraction is kept). `peak`: keep iff the
    largest per-frame flow is above `thresh`.
    """
    if len(stats) == 0:
        raise EmptyFlowStats()
    if rule == "peak":
        return max(stats.values) > thresh
    if rule != "fraction":
        raise PreconditionViolation("static_filter", f"unknown rule '{rule}'")
    dynamic = sum(1 for value in stats.values if value > thresh)
    # tolerance keeps exact-boundary fractions like 3/30 on the keep side
    return dynamic >= min_fraction * len(stats) - 1e-9


def curate(
    records: Iterable[ClipRecord],
    thresh: float = FLOW_THRESHOLD,
    min_fraction: float = MIN_DYNAMIC_FRACTION,
    rule: FilterRule = "fraction",
) -> tuple[list[ClipRecord], list[ClipRecord]]:
    """Split records into (kept, dropped) by the static-clip filter."""
    kept, dropped = [], []
    for record in records:
        if len(record.flow) == 0:
            raise EmptyFlowStats(record.id)
        (kept if static_filter(record.flow, thresh, min_fraction, rule) else dropped).append(record)
    logger.info(f"Static filter kept {len(kept)} clips, dropped {len(dropped)}")
    return kept, dropped


def build_manifest(records: Iterable[ClipRecord], out: Path) -> int:
    """Write records as JSON lines sorted by id; returns the number written."""
    records = list(records)
    seen: set[str] = set()
    for record in records:
        if record.id in seen:
            raise DuplicateClipId(record.id)
        seen.add(record.id)

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as fh:
        for record in sorted(records, key=lambda r: r.id):
            fh.write(record.model_dump_json() + "\n")
    logger.info(f"Wrote {len(records)} clip records to {out}")
    return len(records)


def _read_json_lines(path: Path):
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise FrameFormatError(str(path), f"cannot read ({e})")
    for number, line in enumerate(lines, start=1):
        if line.strip():
            try:
                yield number, json.loads(line)
            except json.JSONDecodeError as e:
                raise FrameFormatError(str(path), f"line {number} is not JSON ({e})")


def load_manifest(path: Path) -> list[ClipRecord]:
    records = []
    for number, payload in _read_json_lines(path):
        try:
            records.append(ClipRecord.model_validate(payload))
        except ValidationError as e:
            raise FrameFormatError(str(path), f"line {number} is not a clip record ({e})")
    return records


def load_flow_stats(path: Path) -> dict[str, FlowStats]:
    """Read `{clip_id, values}` lines; a repeated clip id keeps the last line."""
    stats: dict[str, FlowStats] = {}
    for number, payload in _read_json_lines(path):
        try:
            line = FlowStatsLine.model_validate(payload)
            flow = FlowStats(values=tuple(line.values))
        except ValidationError as e:
            raise FrameFormatError(str(path), f"line {number} is not a flow record ({e})")
        if line.clip_id in stats:
            logger.warning(f"Clip {line.clip_id} repeated in {path}; keeping line {number}")
        stats[line.clip_id] = flow
    return stats


def load_captions(path: Path) -> dict[str, str]:
    captions: dict[str, str] = {}
    for number, payload in _read_json_lines(path):
        try:
            line = CaptionLine.model_validate(payload)
        except ValidationError as e:
            raise FrameFormatError(str(path), f"line {number} is not a caption record ({e})")
        captions[line.clip_id] = line.caption
    return captions


def load_shot_boundaries(path: Path) -> list[tuple[int, int]]:
    """Read shot-detector output: one inclusive `start end` pair per line."""
    path = Path(path)
    shots = []
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise FrameFormatError(str(path), f"cannot read ({e})")
    for number, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            first, last = int(parts[0]), int(parts[1])
        except (IndexError, ValueError):
            raise FrameFormatError(str(path), f"line {number} is not a 'start end' pair")
        shots.append((first, last))
    return shots


def records_from_stats(
    stats: dict[str, FlowStats],
    source: str,
    fps: float = OUTPUT_FPS,
    captions: dict[str, str] | None = None,
) -> list[ClipRecord]:
    """Build minimal clip records when only flow statistics are available."""
    captions = captions or {}
    for clip_id, flow in stats.items():
        if len(flow) == 0:
            raise EmptyFlowStats(clip_id)
    return [
        ClipRecord(
            id=clip_id,
            source=source,
            frame_count=len(flow),
            fps=fps,
            caption=captions.get(clip_id),
            flow=flow,
        )
        for clip_id, flow in stats.items()
    ]

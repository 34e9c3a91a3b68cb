"""
Elevation-aware trajectories: seeded linear pitch sampling for augmentation
and least-squares smoothing of per-frame pitch estimates for inference.
"""
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from scipy import stats

from app.core.exceptions import CorruptEstimates, EstimateFileError, PreconditionViolation
from app.schemas.elevation import (
    SAMPLED_SLOPE_RANGE,
    SAMPLED_START_RANGE,
    ElevationTrajectory,
    EstimateSeries,
    PitchEstimate,
)

logger = logging.getLogger(__name__)


def _open_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    # Generator.uniform is half-open; redraw the (measure-zero) low endpoint
    value = float(rng.uniform(low, high))
    while value == low:
        value = float(rng.uniform(low, high))
    return value


def sample_trajectory(frame_count: int, seed: int) -> ElevationTrajectory:
    """Draw φ_s ∈ (-20°, 20°) and k ∈ (-0.5, 0.5)°/frame from a PCG64 stream."""
    if frame_count < 1:
        raise PreconditionViolation("sample_trajectory", f"frame count must be >= 1, got {frame_count}")
    rng = np.random.default_rng(seed)
    start = _open_uniform(rng, *SAMPLED_START_RANGE)
    slope = _open_uniform(rng, *SAMPLED_SLOPE_RANGE)
    logger.debug(f"Sampled pitch trajectory seed={seed}: start={start:.4f}, slope={slope:.4f}")
    return ElevationTrajectory.from_line(start, slope, frame_count, origin="sampled")


def fit_line(series: EstimateSeries) -> ElevationTrajectory:
    """Ordinary least-squares line through the per-frame estimates.

    The fitted start and slope are not held to the sampling ranges; only the
    ±90° clamp applies to the resulting samples.
    """
    values = np.asarray(series.values, dtype=np.float64)
    if len(values) < 2:
        raise PreconditionViolation("fit_line", f"need at least 2 frames, got {len(values)}")
    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad):
        raise CorruptEstimates(series.source, [int(series.first_frame + i) for i in bad])

    t = np.arange(len(values), dtype=np.float64)
    fit = stats.linregress(t, values)
    logger.info(
        f"Fitted pitch line to {len(values)} estimates from {series.source}: "
        f"start={fit.intercept:.4f}, slope={fit.slope:.4f}, stderr={fit.stderr:.4g}"
    )
    return ElevationTrajectory.from_line(float(fit.intercept), float(fit.slope), len(values), origin="fitted")


def load_estimates(path: Path) -> EstimateSeries:
    """Read JSON-lines pitch estimates; sort, keep the last duplicate, fill gaps."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise EstimateFileError(str(path), f"cannot read ({e})")

    by_frame: dict[int, float] = {}
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = PitchEstimate.model_validate(json.loads(line))
        except (json.JSONDecodeError, ValidationError, TypeError) as e:
            raise EstimateFileError(str(path), f"line {number} is not a valid estimate ({e})")
        by_frame[record.frame] = record.pitch_deg

    if not by_frame:
        raise EstimateFileError(str(path), "file contains no estimates")
    if len(by_frame) < 2:
        raise EstimateFileError(str(path), "need estimates for at least 2 distinct frames")

    known = np.array(sorted(by_frame))
    known_values = np.array([by_frame[f] for f in known])
    frames = np.arange(known[0], known[-1] + 1)
    values = np.interp(frames, known, known_values)
    filled = len(frames) - len(known)
    if filled:
        logger.info(f"Interpolated {filled} missing frames in {path}")
    return EstimateSeries(values=tuple(values.tolist()), first_frame=int(known[0]), source=str(path))

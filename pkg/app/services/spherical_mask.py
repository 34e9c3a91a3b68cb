"""
Cross-domain spherical mask between the panorama canvas and the perspective
view set, with optional antipodal activations and Gaussian spreading.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

import numpy as np
from scipy import sparse

from app.core.exceptions import PreconditionViolation
from app.schemas.geometry import CameraPose
from app.schemas.masks import CrossDomainMask, MaskTag
from app.services.resample import canvas_vectors
from app.services.sphere import project_to_view

logger = logging.getLogger(__name__)

VIEW_COUNT = 20
DEFAULT_WEIGHT_THRESHOLD = 1e-3


def gaussian_offsets(sigma: float, threshold: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integer offsets within ⌈3σ⌉ and their peak-normalized Gaussian weights."""
    if sigma == 0:
        zero = np.zeros(1, dtype=np.int64)
        return zero, zero, np.ones(1)
    radius = int(math.ceil(3.0 * sigma))
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    weights = np.exp(-(dx ** 2 + dy ** 2) / (2.0 * sigma ** 2))
    keep = weights >= threshold
    return dy[keep], dx[keep], weights[keep]


def landing_pixels(col: np.ndarray, row: np.ndarray, side: int) -> np.ndarray:
    """Row-major view pixel nearest to each fractional (col, row)."""
    c = np.clip(np.floor(col + 0.5).astype(np.int64), 0, side - 1)
    r = np.clip(np.floor(row + 0.5).astype(np.int64), 0, side - 1)
    return r * side + c


def _spread(
    pano: np.ndarray,
    col: np.ndarray,
    row: np.ndarray,
    peak: float,
    side: int,
    offsets: tuple[np.ndarray, np.ndarray, np.ndarray],
    threshold: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Landing pixels plus their blurred neighbours, dropping small weights."""
    c = np.clip(np.floor(col + 0.5).astype(np.int64), 0, side - 1)
    r = np.clip(np.floor(row + 0.5).astype(np.int64), 0, side - 1)
    dy, dx, gains = offsets
    out_pano, out_view, out_weight = [], [], []
    for oy, ox, gain in zip(dy, dx, gains):
        weight = peak * gain
        if weight < threshold:
            continue
        nc, nr = c + ox, r + oy
        valid = (nc >= 0) & (nc < side) & (nr >= 0) & (nr < side)
        out_pano.append(pano[valid])
        out_view.append(nr[valid] * side + nc[valid])
        out_weight.append(np.full(int(valid.sum()), weight))
    if not out_pano:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(out_pano), np.concatenate(out_view), np.concatenate(out_weight)


def build_cross_domain_mask(
    height: int,
    views: Sequence[CameraPose],
    sigma: float,
    include_antipodal: bool = True,
    side: int | None = None,
    antipodal_weight: float = 1.0,
    weight_threshold: float = DEFAULT_WEIGHT_THRESHOLD,
    workers: int = 1,
) -> CrossDomainMask:
    """Link every canvas pixel to its direct (and antipodal) landing pixels.

    The table is geometry only, identical for every frame, so triples carry
    frame index 0. The view→pano direction is the transpose of the same table.
    """
    if height < 4:
        raise PreconditionViolation("build_cross_domain_mask", f"canvas height must be >= 4, got {height}")
    if sigma < 0:
        raise PreconditionViolation("build_cross_domain_mask", f"sigma must be >= 0, got {sigma}")
    if len(views) != VIEW_COUNT:
        raise PreconditionViolation(
            "build_cross_domain_mask", f"expected {VIEW_COUNT} views, got {len(views)}"
        )
    if not 0 < antipodal_weight <= 1:
        raise PreconditionViolation(
            "build_cross_domain_mask", f"antipodal weight must be in (0, 1], got {antipodal_weight}"
        )
    side = side if side is not None else height // 2
    if side < 1:
        raise PreconditionViolation("build_cross_domain_mask", f"view side must be >= 1, got {side}")

    vectors = canvas_vectors(height).reshape(-1, 3)
    pano_all = np.arange(vectors.shape[0], dtype=np.int64)
    offsets = gaussian_offsets(sigma, weight_threshold)

    def build_view(index: int) -> list[tuple[np.ndarray, ...]]:
        pose = views[index]
        sources = [(MaskTag.direct, vectors, 1.0)]
        if include_antipodal:
            # the antipode of a unit vector is its negation
            sources.append((MaskTag.antipodal, -vectors, antipodal_weight))
        parts = []
        for tag, vecs, peak in sources:
            col, row, inside = project_to_view(vecs, pose, side)
            pano, view_idx, weight = _spread(
                pano_all[inside], col[inside], row[inside], peak, side, offsets, weight_threshold
            )
            parts.append((
                np.full(len(pano), index, dtype=np.int64),
                pano,
                view_idx,
                np.full(len(pano), int(tag), dtype=np.int64),
                weight,
            ))
        return parts

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            per_view = list(executor.map(build_view, range(len(views))))
    else:
        per_view = [build_view(i) for i in range(len(views))]

    parts = [part for view_parts in per_view for part in view_parts]
    view_col = np.concatenate([p[0] for p in parts])
    pano_col = np.concatenate([p[1] for p in parts])
    view_idx_col = np.concatenate([p[2] for p in parts])
    tag_col = np.concatenate([p[3] for p in parts])
    weight_col = np.concatenate([p[4] for p in parts])

    order = np.lexsort((tag_col, view_idx_col, pano_col, view_col))
    mask = CrossDomainMask(
        height=height,
        side=side,
        sigma=sigma,
        antipodal_weight=antipodal_weight,
        weight_threshold=weight_threshold,
        antipodal=include_antipodal,
        views=tuple(views),
        frame=np.zeros(len(order), dtype=np.uint32),
        view=view_col[order].astype(np.uint16),
        pano_idx=pano_col[order].astype(np.uint32),
        view_idx=view_idx_col[order].astype(np.uint32),
        tag=tag_col[order].astype(np.uint8),
        weight=weight_col[order].astype(np.float32),
    )
    logger.info(
        f"Cross-domain mask H={height} side={side} sigma={sigma}: "
        f"{mask.count(MaskTag.direct)} direct, {mask.count(MaskTag.antipodal)} antipodal triples"
    )
    return mask


def attention_bias(
    mask: CrossDomainMask,
    lambda_direct: float,
    lambda_antipodal: float,
    view: int,
    frame: int = 0,
    dense: bool = False,
) -> sparse.csr_matrix | np.ndarray:
    """Additive attention-logit bias for one (frame, view) pair.

    Rows are queries: canvas pixels for a pano→view mask, view pixels for its
    transpose. Entries without a triple are zero.
    """
    if not (math.isfinite(lambda_direct) and math.isfinite(lambda_antipodal)):
        raise PreconditionViolation("attention_bias", "bias scales must be finite")
    if not 0 <= view < len(mask.views):
        raise PreconditionViolation("attention_bias", f"view {view} outside 0..{len(mask.views) - 1}")

    keep = mask.selection(view=view, frame=frame)
    scale = np.where(mask.tag[keep] == MaskTag.antipodal, lambda_antipodal, lambda_direct)
    values = scale * mask.weight[keep].astype(np.float64)
    pano = mask.pano_idx[keep].astype(np.int64)
    pixel = mask.view_idx[keep].astype(np.int64)
    if mask.orientation == "pano_to_view":
        rows, cols, shape = pano, pixel, (mask.num_pano_pixels, mask.num_view_pixels)
    else:
        rows, cols, shape = pixel, pano, (mask.num_view_pixels, mask.num_pano_pixels)
    bias = sparse.coo_matrix((values, (rows, cols)), shape=shape).tocsr()
    if dense:
        return bias.toarray()
    return bias


def spreading_kernel(side: int, peak: float, sigma: float, threshold: float) -> sparse.csr_matrix:
    """S²×S² matrix K with K[l + o, l] = peak·gain(o) for every in-view offset o."""
    n = side * side
    source = np.arange(n, dtype=np.int64)
    sr, sc = source // side, source % side
    rows, cols, values = [], [], []
    for oy, ox, gain in zip(*gaussian_offsets(sigma, threshold)):
        weight = peak * gain
        if weight < threshold:
            continue
        tr, tc = sr + oy, sc + ox
        valid = (tr >= 0) & (tr < side) & (tc >= 0) & (tc < side)
        rows.append(tr[valid] * side + tc[valid])
        cols.append(source[valid])
        values.append(np.full(int(valid.sum()), weight))
    if not rows:
        return sparse.csr_matrix((n, n))
    return sparse.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def _peak_entries(mask: CrossDomainMask, view: int, tag: MaskTag) -> tuple[np.ndarray, np.ndarray]:
    """Per canvas pixel, the view pixel of its strongest stored entry (sorted by pixel)."""
    keep = mask.selection(view=view, tag=tag)
    pano = mask.pano_idx[keep].astype(np.int64)
    pixel = mask.view_idx[keep].astype(np.int64)
    order = np.lexsort((-mask.weight[keep], pano))
    pano, pixel = pano[order], pixel[order]
    first = np.ones(len(pano), dtype=bool)
    first[1:] = pano[1:] != pano[:-1]
    return pano[first], pixel[first]


def validate_cross_domain_mask(mask: CrossDomainMask, tolerance_px: float = 1.0) -> dict[str, Any]:
    """Check a stored mask against the view geometry it claims.

    For every view and tag the canvas pixels that land inside the frustum
    (directly, or through their antipode) are recomputed. Each must own stored
    entries, and its strongest entry must lie within `tolerance_px` of the
    projected position. The view→pano table is then rebuilt from the view side
    as spreading kernel × landing matrix and must match the transposed mask
    entry for entry.
    """
    vectors = canvas_vectors(mask.height).reshape(-1, 3)
    side = mask.side
    peaks = {MaskTag.direct: 1.0}
    if mask.antipodal:
        peaks[MaskTag.antipodal] = mask.antipodal_weight
    errors = {MaskTag.direct: 0.0, MaskTag.antipodal: 0.0}
    unmatched = 0
    transpose_ok = True
    view_queries = mask if mask.orientation == "view_to_pano" else mask.transpose()

    for index, pose in enumerate(mask.views):
        rebuilt = sparse.csr_matrix((mask.num_view_pixels, mask.num_pano_pixels), dtype=np.float32)
        for tag, peak in peaks.items():
            vecs = -vectors if tag == MaskTag.antipodal else vectors
            col, row, inside = project_to_view(vecs, pose, side)
            if peak >= mask.weight_threshold:
                landed = np.flatnonzero(inside)
            else:
                landed = np.zeros(0, dtype=np.int64)

            pano, pixel = _peak_entries(mask, index, tag)
            common, _, at_peak = np.intersect1d(landed, pano, assume_unique=True, return_indices=True)
            unmatched += (len(landed) - len(common)) + (len(pano) - len(common))
            if len(common):
                hit = pixel[at_peak]
                dist = np.hypot(col[common] - hit % side, row[common] - hit // side)
                errors[tag] = max(errors[tag], float(dist.max()))

            landing = sparse.coo_matrix(
                (np.ones(len(landed)), (landing_pixels(col[landed], row[landed], side), landed)),
                shape=(mask.num_view_pixels, mask.num_pano_pixels),
            ).tocsr()
            kernel = spreading_kernel(side, peak, mask.sigma, mask.weight_threshold)
            rebuilt = rebuilt + (kernel @ landing).astype(np.float32)

        stored = attention_bias(view_queries, 1.0, 1.0, index).astype(np.float32)
        difference = (rebuilt - stored).tocsr()
        difference.eliminate_zeros()
        if difference.nnz:
            transpose_ok = False

    passed = (
        errors[MaskTag.direct] <= tolerance_px
        and errors[MaskTag.antipodal] <= tolerance_px
        and unmatched == 0
        and transpose_ok
    )
    report = {
        "passed": passed,
        "max_direct_error_px": errors[MaskTag.direct],
        "max_antipodal_error_px": errors[MaskTag.antipodal],
        "unmatched_pixels": unmatched,
        "transpose_symmetric": transpose_ok,
        "direct_triples": mask.count(MaskTag.direct),
        "antipodal_triples": mask.count(MaskTag.antipodal),
    }
    logger.info(f"Cross-domain mask validation: {report}")
    return report

"""
Dataset curation tasks.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from app.core.celery_app import celery_app
from app.core.exceptions import PreconditionViolation
from app.services.datapipe import (
    FLOW_THRESHOLD,
    MIN_DYNAMIC_FRACTION,
    OUTPUT_FPS,
    build_manifest,
    curate,
    load_captions,
    load_flow_stats,
    load_manifest,
    records_from_stats,
)
from app.tasks.base import report_progress

logger = logging.getLogger(__name__)


@celery_app.task(bind=True, name="app.tasks.curation.curate_manifest")
def curate_manifest(
    self,
    manifest_out: str,
    flow_path: Optional[str] = None,
    manifest_in: Optional[str] = None,
    captions_path: Optional[str] = None,
    source: str = "",
    fps: float = OUTPUT_FPS,
    thresh: float = FLOW_THRESHOLD,
    min_fraction: float = MIN_DYNAMIC_FRACTION,
    rule: str = "fraction",
) -> Dict[str, Any]:
    """
    Drop static clips and write the manifest of the kept ones.

    Records come from an existing manifest (`manifest_in`) or are built from a
    flow-statistics file; captions, when given, replace the record captions.
    """
    try:
        if manifest_in:
            records = load_manifest(Path(manifest_in))
        elif flow_path:
            records = records_from_stats(load_flow_stats(Path(flow_path)), source=source, fps=fps)
        else:
            raise PreconditionViolation("curate_manifest", "need a manifest or a flow-statistics file")

        if captions_path:
            captions = load_captions(Path(captions_path))
            records = [
                r.model_copy(update={"caption": captions[r.id]}) if r.id in captions else r
                for r in records
            ]

        report_progress(self, 30, "Filtering static clips...")
        kept, dropped = curate(records, thresh, min_fraction, rule)
        written = build_manifest(kept, Path(manifest_out))

        return {
            "status": "success",
            "total": len(records),
            "kept": written,
            "dropped": len(dropped),
            "dropped_ids": sorted(r.id for r in dropped),
            "manifest": manifest_out,
        }

    except Exception as e:
        logger.error(f"Manifest curation failed: {str(e)}")
        raise

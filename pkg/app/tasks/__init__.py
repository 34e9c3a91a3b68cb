"""
Task registration module for Celery.
Import all task modules to ensure they're registered with Celery.
"""
from typing import Any, Dict

from app.core.celery_app import celery_app
from app.core.config import settings

# Import all task modules to register them with Celery
from . import curation, masking, projection

# Re-export commonly used tasks for convenience
from .curation import curate_manifest
from .masking import build_attention_mask, build_video_mask, validate_attention_mask
from .projection import project_anchor, render_views, roundtrip


def run_task(task, **kwargs) -> Dict[str, Any]:
    """Run a task in-process when eager, otherwise dispatch and wait for the report."""
    if celery_app.conf.task_always_eager:
        return task.apply(kwargs=kwargs).get()
    return task.apply_async(kwargs=kwargs).get(timeout=settings.CELERY_TASK_TIME_LIMIT)


__all__ = [
    # Projection tasks
    "render_views",
    "project_anchor",
    "roundtrip",

    # Masking tasks
    "build_video_mask",
    "build_attention_mask",
    "validate_attention_mask",

    # Curation tasks
    "curate_manifest",

    "run_task",
]

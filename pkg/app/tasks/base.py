"""
Shared helpers for pipeline tasks.
"""
from typing import Any, Optional

from app.core.config import RunConfig


def report_progress(task: Any, current: int, status: str, total: int = 100) -> None:
    """Publish a PROGRESS state; skipped for eager runs, which have no result store."""
    if task is None or getattr(task.request, "is_eager", True):
        return
    task.update_state(state="PROGRESS", meta={"current": current, "total": total, "status": status})


def run_config(config: Optional[dict[str, Any]]) -> RunConfig:
    """Rebuild the RunConfig a task received as a JSON dict."""
    return RunConfig.model_validate(config or {})

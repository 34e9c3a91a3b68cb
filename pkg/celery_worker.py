#!/usr/bin/env python3
"""
Celery worker for pano360-kit.

Only needed with CELERY_TASK_ALWAYS_EAGER=false and a reachable broker;
otherwise the CLI runs every task in-process.
"""
import sys

from app.core.celery_app import celery_app
from app.core.config import settings

QUEUES = ("default", "projection", "masking", "curation")


def worker_argv(concurrency: int = 2) -> list[str]:
    return [
        "worker",
        f"--loglevel={settings.LOG_LEVEL.lower()}",
        f"--queues={','.join(QUEUES)}",
        f"--concurrency={concurrency}",
    ]


if __name__ == "__main__":
    if settings.CELERY_TASK_ALWAYS_EAGER:
        print("CELERY_TASK_ALWAYS_EAGER is set; tasks run in the CLI process", file=sys.stderr)
    celery_app.start(worker_argv())

"""
Celery configuration and application instance.
"""
from celery import Celery
from kombu import Queue

from app.core.config import settings

# Create Celery instance
celery_app = Celery(
    "pano360-kit",
    include=[
        "app.tasks.projection",
        "app.tasks.masking",
        "app.tasks.curation",
    ],
)

# Celery configuration
celery_app.conf.update(
    # Broker settings (Redis)
    broker_url=settings.CELERY_BROKER_URL,
    result_backend=settings.CELERY_RESULT_BACKEND,

    # Task settings
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,

    # Eager mode runs tasks in-process; the CLI needs no broker by default
    task_always_eager=settings.CELERY_TASK_ALWAYS_EAGER,
    task_eager_propagates=True,
    task_store_eager_result=False,

    # Task routing
    task_routes={
        "app.tasks.projection.*": {"queue": "projection"},
        "app.tasks.masking.*": {"queue": "masking"},
        "app.tasks.curation.*": {"queue": "curation"},
    },

    # Define queues
    task_default_queue="default",
    task_queues=(
        Queue("default"),
        Queue("projection"),
        Queue("masking"),
        Queue("curation"),
    ),

    # Worker settings
    worker_prefetch_multiplier=1,
    task_acks_late=True,
    worker_max_tasks_per_child=200,

    # Task execution settings
    task_soft_time_limit=settings.CELERY_TASK_SOFT_TIME_LIMIT,
    task_time_limit=settings.CELERY_TASK_TIME_LIMIT,
    task_track_started=True,
    task_reject_on_worker_lost=True,

    # Result backend settings
    result_expires=3600,  # Results expire after 1 hour
    result_persistent=True,
)

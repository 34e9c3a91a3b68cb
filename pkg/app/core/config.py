import os
from pathlib import Path
from typing import Any, Optional

# Load environment variables from .env if it exists
from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.exceptions import PreconditionViolation

load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("true", "1", "yes")


class Settings:
    # Project settings
    PROJECT_NAME: str = os.getenv("PROJECT_NAME", "pano360-kit")
    VERSION: str = "0.1.0"

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")
    LOG_FILE: Optional[str] = os.getenv("LOG_FILE")

    # Geometry defaults
    PANO_CANVAS_HEIGHT: int = int(os.getenv("PANO_CANVAS_HEIGHT", "512"))
    PANO_LATENT_HEIGHT: int = int(os.getenv("PANO_LATENT_HEIGHT", "64"))
    PANO_VIEW_FOV: float = float(os.getenv("PANO_VIEW_FOV", "80.0"))
    PANO_ANCHOR_FOV: float = float(os.getenv("PANO_ANCHOR_FOV", "90.0"))

    # Cross-domain mask defaults
    PANO_BLUR_SIGMA: float = float(os.getenv("PANO_BLUR_SIGMA", "1.0"))
    PANO_ANTIPODAL_WEIGHT: float = float(os.getenv("PANO_ANTIPODAL_WEIGHT", "1.0"))
    PANO_LAMBDA_DIRECT: float = float(os.getenv("PANO_LAMBDA_DIRECT", "1.0"))
    PANO_LAMBDA_ANTIPODAL: float = float(os.getenv("PANO_LAMBDA_ANTIPODAL", "1.0"))
    PANO_WEIGHT_THRESHOLD: float = float(os.getenv("PANO_WEIGHT_THRESHOLD", "1e-3"))

    # Positional encoding / sampling
    PANO_EMBED_DIM: int = int(os.getenv("PANO_EMBED_DIM", "16"))
    PANO_SEED: int = int(os.getenv("PANO_SEED", "0"))
    PANO_CLIP_FRAMES: int = int(os.getenv("PANO_CLIP_FRAMES", "40"))

    # Frame-level thread pool size
    PANO_WORKERS: int = int(os.getenv("PANO_WORKERS", "1"))

    # Celery settings
    CELERY_BROKER_URL: str = os.getenv("CELERY_BROKER_URL", "redis://localhost:6379/0")
    CELERY_RESULT_BACKEND: str = os.getenv("CELERY_RESULT_BACKEND", "redis://localhost:6379/0")
    CELERY_TASK_ALWAYS_EAGER: bool = _env_bool("CELERY_TASK_ALWAYS_EAGER", "true")
    CELERY_TASK_TIME_LIMIT: int = int(os.getenv("CELERY_TASK_TIME_LIMIT", "3600"))
    CELERY_TASK_SOFT_TIME_LIMIT: int = int(os.getenv("CELERY_TASK_SOFT_TIME_LIMIT", "3000"))


settings = Settings()


class RunConfig(BaseModel):
    """Geometry and I/O parameters shared by the batch commands."""

    height: int = Field(default_factory=lambda: settings.PANO_CANVAS_HEIGHT, ge=4)
    fov_deg: float = Field(default_factory=lambda: settings.PANO_VIEW_FOV, gt=0, lt=180)
    anchor_fov_deg: float = Field(default_factory=lambda: settings.PANO_ANCHOR_FOV, gt=0, lt=180)
    side: Optional[int] = Field(default=None, ge=2)
    sigma: float = Field(default_factory=lambda: settings.PANO_BLUR_SIGMA, ge=0)
    antipodal_weight: float = Field(default_factory=lambda: settings.PANO_ANTIPODAL_WEIGHT, gt=0, le=1)
    lambda_direct: float = Field(default_factory=lambda: settings.PANO_LAMBDA_DIRECT)
    lambda_antipodal: float = Field(default_factory=lambda: settings.PANO_LAMBDA_ANTIPODAL)
    weight_threshold: float = Field(default_factory=lambda: settings.PANO_WEIGHT_THRESHOLD, gt=0, lt=1)
    embed_dim: int = Field(default_factory=lambda: settings.PANO_EMBED_DIM, ge=2)
    seed: int = Field(default_factory=lambda: settings.PANO_SEED)
    frames: int = Field(default_factory=lambda: settings.PANO_CLIP_FRAMES, ge=1)
    workers: int = Field(default_factory=lambda: settings.PANO_WORKERS, ge=1)
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None

    @field_validator("height")
    @classmethod
    def validate_height(cls, v: int) -> int:
        if v % 2:
            raise ValueError("canvas height must be even so that W = 2H and side = H/2 are integral")
        return v

    @field_validator("embed_dim")
    @classmethod
    def validate_embed_dim(cls, v: int) -> int:
        if v % 2:
            raise ValueError("embedding dimension must be even")
        return v

    @field_validator("lambda_direct", "lambda_antipodal")
    @classmethod
    def validate_lambda(cls, v: float) -> float:
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("bias scale must be finite")
        return v

    @model_validator(mode="after")
    def default_side(self) -> "RunConfig":
        if self.side is None:
            # per-view resolution follows the H/2 rule unless overridden
            self.side = self.height // 2
        return self

    @property
    def width(self) -> int:
        return 2 * self.height


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a key=value config file into RunConfig field overrides.

    Keys are matched case-insensitively against RunConfig fields; unknown keys
    raise so typos do not pass silently.
    """
    if not Path(path).is_file():
        raise PreconditionViolation("load_config_file", f"no config file at {path}")
    raw = dotenv_values(path)
    fields = RunConfig.model_fields
    overrides: dict[str, Any] = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in fields:
            raise PreconditionViolation("load_config_file", f"unknown key '{key}' in {path}")
        if value is not None and value != "":
            overrides[name] = value
    return overrides


def build_run_config(
    config_file: Optional[Path] = None,
    defaults: Optional[dict[str, Any]] = None,
    **flags: Any,
) -> RunConfig:
    """Merge settings defaults, command defaults, an optional config file and explicit flags."""
    values: dict[str, Any] = dict(defaults or {})
    if config_file is not None:
        values.update(load_config_file(config_file))
    values.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig(**values)

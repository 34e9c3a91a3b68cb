"""
Tests for run configuration merging and config files.
"""
import pytest
from pydantic import ValidationError

from app.core.config import RunConfig, build_run_config, load_config_file, settings
from app.core.exceptions import PreconditionViolation


def test_defaults_follow_settings():
    cfg = RunConfig()
    assert cfg.height == settings.PANO_CANVAS_HEIGHT
    assert cfg.fov_deg == settings.PANO_VIEW_FOV
    assert cfg.side == cfg.height // 2
    assert cfg.width == 2 * cfg.height


def test_explicit_side_is_kept():
    assert RunConfig(height=64, side=20).side == 20


@pytest.mark.parametrize("overrides", [
    {"height": 63},
    {"height": 2},
    {"embed_dim": 7},
    {"fov_deg": 180.0},
    {"antipodal_weight": 0.0},
    {"lambda_direct": float("nan")},
    {"workers": 0},
])
def test_invalid_values(overrides):
    with pytest.raises(ValidationError):
        RunConfig(**overrides)


def test_config_file_overrides(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("HEIGHT=128\nsigma=0.5\n# comment\nSEED=\n")
    assert load_config_file(path) == {"height": "128", "sigma": "0.5"}


def test_precedence(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("HEIGHT=128\nSIGMA=0.5\n")
    cfg = build_run_config(path, defaults={"height": 64, "frames": 8}, sigma=2.0, seed=None)
    assert cfg.height == 128
    assert cfg.sigma == 2.0
    assert cfg.frames == 8
    assert cfg.seed == settings.PANO_SEED
    assert cfg.side == 64


def test_unknown_key(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("HIEGHT=128\n")
    with pytest.raises(PreconditionViolation) as exc_info:
        load_config_file(path)
    assert exc_info.value.exit_code == 2


def test_missing_file(tmp_path):
    with pytest.raises(PreconditionViolation):
        build_run_config(tmp_path / "absent.env")

"""
Tests for clip windowing, the static-clip filter and manifest files.
"""
import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import DuplicateClipId, EmptyFlowStats, FrameFormatError, PreconditionViolation
from app.schemas.dataset import ClipRecord, FlowStats
from app.services.datapipe import (
    build_manifest,
    curate,
    load_captions,
    load_flow_stats,
    load_manifest,
    load_shot_boundaries,
    records_from_stats,
    static_filter,
    window_clips,
    windows_for_shots,
)


def flow(dynamic: int, total: int = 100, high: float = 0.2) -> FlowStats:
    return FlowStats(values=tuple([high] * dynamic + [0.0] * (total - dynamic)))


def record(clip_id: str, caption: str | None = None, values=(0.3, 0.0, 0.5)) -> ClipRecord:
    return ClipRecord(
        id=clip_id, source="tour.mp4", frame_count=len(values), fps=20.0,
        caption=caption, flow=FlowStats(values=tuple(values)),
    )


class TestWindowClips:
    def test_one_clip_from_two_hundred_frames(self):
        windows = window_clips(200, 20.0)
        assert len(windows) == 1
        w = windows[0]
        assert (w.start, w.end, w.stride) == (0, 200, 2.0)
        indices = w.frame_indices(100)
        assert indices[0] == 0 and indices[-1] == 198
        assert len(set(indices)) == 100

    def test_two_full_windows(self):
        windows = window_clips(400, 20.0)
        assert [(w.start, w.end) for w in windows] == [(0, 200), (200, 400)]

    def test_short_remainder_dropped(self):
        assert len(window_clips(399, 20.0)) == 1
        assert window_clips(199, 20.0) == []

    def test_higher_source_rate(self):
        windows = window_clips(1000, 30.0)
        assert windows[0].stride == pytest.approx(3.0)
        assert windows[0].end - windows[0].start == 300
        assert len(windows) == 3

    def test_windows_never_overlap(self):
        for total in (1, 57, 600, 1234):
            windows = window_clips(total, 24.0)
            for a, b in zip(windows, windows[1:]):
                assert a.end <= b.start
            assert all(w.end <= total for w in windows)

    def test_preconditions(self):
        with pytest.raises(PreconditionViolation):
            window_clips(0, 20.0)
        with pytest.raises(PreconditionViolation):
            window_clips(100, 0.0)

    def test_shots_are_windowed_independently(self):
        windows = windows_for_shots([(0, 249), (250, 649), (650, 700)], 20.0)
        assert [(w.start, w.end) for w in windows] == [(0, 200), (250, 450), (450, 650)]


class TestStaticFilter:
    def test_nine_percent_dropped(self):
        assert static_filter(flow(9)) is False

    def test_exactly_ten_percent_kept(self):
        assert static_filter(flow(10)) is True

    def test_boundary_with_inexact_fraction(self):
        assert static_filter(flow(3, total=30)) is True
        assert static_filter(flow(2, total=30)) is False

    def test_all_moving_kept(self):
        assert static_filter(FlowStats(values=(1.0,) * 50)) is True

    def test_values_at_threshold_are_static(self):
        assert static_filter(flow(100, high=0.1)) is False

    def test_monotone_under_raised_flow(self, rng):
        for _ in range(200):
            values = rng.random(40) * 0.2
            raised = np.minimum(values + rng.random(40) * (1.0 - values), 1.0)
            if static_filter(FlowStats(values=tuple(values))):
                assert static_filter(FlowStats(values=tuple(raised)))

    def test_peak_rule(self):
        assert static_filter(flow(1), rule="peak") is True
        assert static_filter(flow(0), rule="peak") is False

    def test_empty_and_unknown_rule(self):
        with pytest.raises(EmptyFlowStats):
            static_filter(FlowStats(values=()))
        with pytest.raises(PreconditionViolation):
            static_filter(flow(10), rule="median")

    def test_flow_values_must_be_normalized(self):
        with pytest.raises(ValidationError):
            FlowStats(values=(0.5, 1.5))

    def test_curate_splits_records(self):
        records = [record("a", values=(0.5,) * 10), record("b", values=(0.0,) * 10)]
        kept, dropped = curate(records)
        assert [r.id for r in kept] == ["a"]
        assert [r.id for r in dropped] == ["b"]


class TestManifest:
    def test_round_trip(self, tmp_path):
        records = [record("c"), record("a", caption="A tram passes."), record("b")]
        out = tmp_path / "out" / "manifest.jsonl"
        assert build_manifest(records, out) == 3
        lines = out.read_text().splitlines()
        assert [json.loads(line)["id"] for line in lines] == ["a", "b", "c"]
        assert load_manifest(out) == sorted(records, key=lambda r: r.id)

    def test_empty_manifest(self, tmp_path):
        out = tmp_path / "empty.jsonl"
        assert build_manifest([], out) == 0
        assert out.read_text() == ""
        assert load_manifest(out) == []

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(DuplicateClipId) as exc_info:
            build_manifest([record("a"), record("a")], tmp_path / "m.jsonl")
        assert exc_info.value.clip_id == "a"
        assert exc_info.value.exit_code == 4

    def test_flow_length_must_match(self):
        with pytest.raises(ValidationError):
            ClipRecord(id="x", source="s", frame_count=4, fps=20.0, flow=FlowStats(values=(0.1,)))

    def test_bad_manifest_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id": "a"}\n')
        with pytest.raises(FrameFormatError):
            load_manifest(path)


class TestSidecarFiles:
    def test_flow_stats_keep_last_line(self, tmp_path):
        path = tmp_path / "flow.jsonl"
        path.write_text(
            '{"clip_id": "a", "values": [0.0, 0.0]}\n'
            '\n'
            '{"clip_id": "b", "values": [0.5]}\n'
            '{"clip_id": "a", "values": [0.3, 0.4]}\n'
        )
        stats = load_flow_stats(path)
        assert stats["a"].values == (0.3, 0.4)
        assert len(stats["b"]) == 1

    def test_flow_stats_errors(self, tmp_path):
        path = tmp_path / "flow.jsonl"
        path.write_text('{"clip_id": "a", "values": [2.0]}\n')
        with pytest.raises(FrameFormatError):
            load_flow_stats(path)
        with pytest.raises(FrameFormatError):
            load_flow_stats(tmp_path / "missing.jsonl")

    def test_captions(self, tmp_path):
        path = tmp_path / "captions.jsonl"
        path.write_text('{"clip_id": "a", "caption": "Snow on a ridge."}\n')
        assert load_captions(path) == {"a": "Snow on a ridge."}

    def test_shot_boundaries(self, tmp_path):
        path = tmp_path / "shots.txt"
        path.write_text("0 99\n\n100 350\n")
        assert load_shot_boundaries(path) == [(0, 99), (100, 350)]
        path.write_text("12\n")
        with pytest.raises(FrameFormatError):
            load_shot_boundaries(path)

    def test_records_from_stats(self):
        records = records_from_stats(
            {"a": FlowStats(values=(0.2, 0.3))}, source="src.mp4", captions={"a": "Boats."}
        )
        assert records[0].frame_count == 2
        assert records[0].caption == "Boats."
        with pytest.raises(EmptyFlowStats):
            records_from_stats({"z": FlowStats(values=())}, source="src.mp4")

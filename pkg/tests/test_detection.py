import json

import numpy as np
import pytest

import lofi.simulate as sim
from lofi.detection import (
    BoundingBox,
    Detection,
    DetectionFrame,
    ground_point,
    label_stream,
    read_detections_jsonl,
    read_labels_jsonl,
    select_person,
    write_detections_jsonl,
    write_labels_jsonl,
)
from lofi.errors import SchemaError
from lofi.geometry import PixelPoint


def det(label, conf, box=(0, 0, 10, 10)):
    return Detection(box=BoundingBox(*box), label=label, confidence=conf)


class TestSelectPerson:
    def test_argmax_over_target_label(self):
        frame = DetectionFrame(0.0, (det("person", 0.9), det("person", 0.7), det("chair", 0.99)))
        assert select_person(frame).confidence == 0.9

    def test_empty_frame(self):
        assert select_person(DetectionFrame(0.0, ())) is None

    def test_tie_keeps_first_listed(self):
        first = det("person", 0.8, box=(0, 0, 1, 1))
        second = det("person", 0.8, box=(5, 5, 6, 6))
        assert select_person(DetectionFrame(0.0, (first, second))) is first

    def test_no_matching_label(self):
        frame = DetectionFrame(0.0, (det("chair", 0.99),))
        assert select_person(frame) is None

    def test_custom_target_label(self):
        frame = DetectionFrame(0.0, (det("pedestrian", 0.6), det("person", 0.9)))
        assert select_person(frame, "pedestrian").label == "pedestrian"

    def test_adding_lower_confidence_never_changes_selection(self):
        rng = np.random.default_rng(3)
        dets = tuple(det("person", c) for c in rng.uniform(0.2, 0.9, size=6))
        best = select_person(DetectionFrame(0.0, dets))
        weaker = det("person", best.confidence - 0.1)
        assert select_person(DetectionFrame(0.0, dets + (weaker,))) is best


class TestGroundPoint:
    def test_formula(self):
        assert ground_point(det("person", 1.0, box=(10, 20, 30, 60))) == PixelPoint(20, 60)

    def test_degenerate_box(self):
        assert ground_point(det("person", 1.0, box=(5, 5, 5, 5))) == PixelPoint(5, 5)

    def test_full_frame_box(self):
        assert ground_point(det("person", 1.0, box=(0, 0, 640, 480))) == PixelPoint(320, 480)

    def test_on_boundary_and_u_mean(self):
        d = det("person", 1.0, box=(12.5, 3.0, 77.5, 41.0))
        g = ground_point(d)
        assert g.v == d.box.v_max
        assert g.u == (d.box.u_min + d.box.u_max) / 2.0


class TestLabelStream:
    def test_composition_with_scaling(self, scale_homography):
        frame = DetectionFrame(1.5, (det("person", 0.9, box=(0.0, -0.5, 1.0, 0.5)),))
        series, stats = label_stream([frame], scale_homography)
        assert len(series) == 1
        assert series.ts[0] == 1.5
        assert np.allclose(series.xy[0], [0.9, 2.4])
        assert stats.no_person == 0

    def test_missing_frame(self, scale_homography):
        series, stats = label_stream([DetectionFrame(2.0, ())], scale_homography)
        assert np.isnan(series.xy[0]).all()
        assert stats.no_person == 1

    def test_length_and_order_preserved(self, identity_homography):
        frames = [DetectionFrame(t, (det("person", 0.5),)) for t in (0.3, 0.1, 0.2)]
        series, _ = label_stream(frames, identity_homography)
        assert len(series) == 3
        assert np.array_equal(series.ts, [0.1, 0.2, 0.3])

    def test_point_at_infinity_becomes_missing(self):
        from lofi.geometry import Homography

        m = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.1, 0.0, 1.0]])
        bad = DetectionFrame(0.0, (det("person", 0.9, box=(-12.0, -1.0, -8.0, 0.0)),))
        good = DetectionFrame(1.0, (det("person", 0.9, box=(0.0, 0.0, 2.0, 2.0)),))
        series, stats = label_stream([bad, good], Homography(matrix=m))
        assert stats.at_infinity == 1
        assert np.isnan(series.xy[0]).all()
        assert np.isfinite(series.xy[1]).all()

    def test_simulator_zero_noise_matches_truth(self):
        sc = sim.Scenario(duration=4.0, seed=9)
        frames, _, truth = sim.generate(sc)
        series, stats = label_stream(frames[:100], sc.resolved_homography())
        assert stats.no_person == 0
        assert np.abs(series.xy - truth.camera_xy[:100]).max() < 1e-6


class TestFileFormats:
    def test_detections_roundtrip(self, tmp_path):
        frames = [
            DetectionFrame(0.0, (det("person", 0.9, box=(1, 2, 3, 4)),)),
            DetectionFrame(0.5, ()),
        ]
        path = tmp_path / "d.jsonl"
        write_detections_jsonl(path, frames)
        assert read_detections_jsonl(path) == frames

    def test_schema_error_carries_line_number(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"ts": 0.0, "detections": []}\n{"nope": 1}\n')
        with pytest.raises(SchemaError, match="line 2"):
            read_detections_jsonl(path)

    def test_bad_confidence_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        row = {"ts": 0.0, "detections": [{"bbox": [0, 0, 1, 1], "label": "person", "conf": 1.7}]}
        path.write_text(json.dumps(row) + "\n")
        with pytest.raises(SchemaError):
            read_detections_jsonl(path)

    def test_labels_roundtrip_with_missing(self, tmp_path, scale_homography):
        frames = [
            DetectionFrame(0.0, (det("person", 0.9, box=(0.0, 0.0, 1.0, 1.0)),)),
            DetectionFrame(0.5, ()),
        ]
        series, _ = label_stream(frames, scale_homography)
        path = tmp_path / "labels.jsonl"
        write_labels_jsonl(path, series)
        back = read_labels_jsonl(path)
        assert np.array_equal(back.ts, series.ts)
        assert np.array_equal(back.xy, series.xy, equal_nan=True)
        assert json.loads(path.read_text().splitlines()[1])["x"] is None

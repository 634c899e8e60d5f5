"""Per-frame person extraction from object-detection output.

Each frame is reduced to a single pixel coordinate: among the detections
matching the target label, the highest-confidence box wins (first listed
on ties) and the midpoint of its bottom edge is taken as the ground
contact point. Frames may be processed in parallel; results are emitted
in timestamp order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InputOutputError, SchemaError
from .geometry import Homography, PixelPoint, WorldPoint, project_points

DEFAULT_TARGET_LABEL = "person"


@dataclass(frozen=True)
class BoundingBox:
    u_min: float
    v_min: float
    u_max: float
    v_max: float

    def __post_init__(self):
        if self.u_min > self.u_max or self.v_min > self.v_max:
            raise SchemaError(
                f"degenerate bounding box: ({self.u_min}, {self.v_min}, {self.u_max}, {self.v_max})"
            )


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    label: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise SchemaError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class DetectionFrame:
    timestamp: float
    detections: tuple[Detection, ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.timestamp):
            raise SchemaError(f"non-finite frame timestamp {self.timestamp}")


def select_person(frame: DetectionFrame, target_label: str = DEFAULT_TARGET_LABEL) -> Detection | None:
    """Highest-confidence detection with the target label; None when absent.

    Ties keep the first-listed detection, so results are order-stable.
    """
    best = None
    for det in frame.detections:
        if det.label != target_label:
            continue
        if best is None or det.confidence > best.confidence:
            best = det
    return best


def ground_point(d: Detection) -> PixelPoint:
    """Midpoint of the box's bottom edge (maximal v under the top-left-origin convention)."""
    return PixelPoint((d.box.u_min + d.box.u_max) / 2.0, d.box.v_max)


@dataclass(frozen=True)
class LabelSeries:
    """Time-ordered position labels; NaN coordinate rows mark missing detections."""

    ts: np.ndarray
    xy: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=np.float64)
        xy = np.asarray(self.xy, dtype=np.float64)
        if xy.shape != (ts.shape[0], 2):
            raise SchemaError(f"label xy shape {xy.shape} does not match {ts.shape[0]} timestamps")
        ts.setflags(write=False)
        xy.setflags(write=False)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "xy", xy)

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.xy[:, 0])

    def entries(self) -> Iterator[tuple[float, WorldPoint | None]]:
        for t, (x, y) in zip(self.ts, self.xy):
            yield float(t), (None if np.isnan(x) else WorldPoint(float(x), float(y)))


@dataclass
class LabelStats:
    frames: int = 0
    no_person: int = 0
    at_infinity: int = 0

    def to_dict(self) -> dict:
        return {"frames": self.frames, "no_person": self.no_person, "at_infinity": self.at_infinity}


def label_stream(
    frames: Sequence[DetectionFrame],
    h: Homography,
    target_label: str = DEFAULT_TARGET_LABEL,
) -> tuple[LabelSeries, LabelStats]:
    """Map every frame to a world-coordinate label (or a missing entry).

    Output has exactly one entry per input frame, in timestamp order;
    frames whose ground point maps to infinity become missing entries and
    are tallied in the stats rather than aborting the stream.
    """
    frames = list(frames)
    ts = np.array([f.timestamp for f in frames], dtype=np.float64)
    if ts.shape[0] > 1 and np.any(np.diff(ts) < 0):
        order = np.argsort(ts, kind="stable")
        frames = [frames[i] for i in order]
        ts = ts[order]

    stats = LabelStats(frames=len(frames))
    uv = np.full((len(frames), 2), np.nan)
    for i, frame in enumerate(frames):
        det = select_person(frame, target_label)
        if det is None:
            stats.no_person += 1
            continue
        uv[i] = ground_point(det)

    xy = np.full((len(frames), 2), np.nan)
    have = ~np.isnan(uv[:, 0])
    if have.any():
        mapped, ok = project_points(h.matrix, uv[have])
        stats.at_infinity = int((~ok).sum())
        xy[have] = mapped
    return LabelSeries(ts=ts, xy=xy), stats


# ---------------------------------------------------------------------------
# File formats

def _frame_from_obj(obj, lineno: int) -> DetectionFrame:
    if not isinstance(obj, dict) or "ts" not in obj:
        raise SchemaError(f"detections line {lineno}: expected an object with 'ts'")
    try:
        dets = []
        for d in obj.get("detections", []):
            u_min, v_min, u_max, v_max = (float(x) for x in d["bbox"])
            dets.append(
                Detection(
                    box=BoundingBox(u_min, v_min, u_max, v_max),
                    label=str(d["label"]),
                    confidence=float(d["conf"]),
                )
            )
        return DetectionFrame(timestamp=float(obj["ts"]), detections=tuple(dets))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"detections line {lineno}: {exc}") from exc


def read_detections_jsonl(path) -> list[DetectionFrame]:
    """Parse a detection file: one JSON object per frame."""
    frames = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"detections line {lineno}: invalid JSON: {exc}") from exc
                frames.append(_frame_from_obj(obj, lineno))
    except OSError as exc:
        raise InputOutputError(f"cannot read detections file {path}: {exc}") from exc
    return frames


def write_detections_jsonl(path, frames: Sequence[DetectionFrame]) -> None:
    with open(path, "w") as fh:
        for f in frames:
            obj = {
                "ts": f.timestamp,
                "detections": [
                    {
                        "bbox": [d.box.u_min, d.box.v_min, d.box.u_max, d.box.v_max],
                        "label": d.label,
                        "conf": d.confidence,
                    }
                    for d in f.detections
                ],
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def write_labels_jsonl(path, series: LabelSeries) -> None:
    """Emit {"ts":..., "x":..., "y":...} per frame; missing entries carry nulls."""
    with open(path, "w") as fh:
        for t, p in series.entries():
            if p is None:
                fh.write(json.dumps({"ts": t, "x": None, "y": None}, separators=(",", ":")) + "\n")
            else:
                fh.write(json.dumps({"ts": t, "x": p.x, "y": p.y}, separators=(",", ":")) + "\n")


def read_labels_jsonl(path) -> LabelSeries:
    ts, xy = [], []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    ts.append(float(obj["ts"]))
                    x, y = obj.get("x"), obj.get("y")
                    xy.append((np.nan, np.nan) if x is None else (float(x), float(y)))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(f"labels line {lineno}: {exc}") from exc
    except OSError as exc:
        raise InputOutputError(f"cannot read labels file {path}: {exc}") from exc
    return LabelSeries(ts=np.asarray(ts, dtype=np.float64), xy=np.asarray(xy, dtype=np.float64).reshape(-1, 2))

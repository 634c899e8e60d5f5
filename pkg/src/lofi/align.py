"""Join each CSI packet to the nearest-in-time position label.

Both streams share one clock, so a packet at t_i simply takes the label
whose timestamp minimizes |t_i - T_m| (ties to the earlier image).
Packets whose nearest label is missing, or farther than max_gap, are
dropped and tallied by reason; output count plus drop counts always
equals the input packet count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import pandas as pd

from . import _kernels
from .csi import CsiSequence
from .detection import LabelSeries
from .errors import EmptyLabels, InputOutputError, SchemaError
from .geometry import WorldPoint


@dataclass(frozen=True)
class LabeledFrame:
    timestamp: float
    world: WorldPoint
    person_id: str
    rssi: float
    csi: np.ndarray
    interpolated: bool
    label_gap: float


@dataclass
class DropReport:
    no_label: int = 0
    missing_detection: int = 0
    gap_exceeded: int = 0

    def total(self) -> int:
        return self.no_label + self.missing_detection + self.gap_exceeded

    def to_dict(self) -> dict:
        return {
            "no_label": self.no_label,
            "missing_detection": self.missing_detection,
            "gap_exceeded": self.gap_exceeded,
        }


@dataclass(frozen=True)
class LabeledDataset:
    """The dataset rows: CSI packets joined with world coordinates."""

    ts: np.ndarray
    xy: np.ndarray
    rssi: np.ndarray
    csi: np.ndarray
    interpolated: np.ndarray
    label_gap: np.ndarray
    person_id: str

    def __post_init__(self):
        object.__setattr__(self, "ts", np.asarray(self.ts, dtype=np.float64))
        object.__setattr__(self, "xy", np.asarray(self.xy, dtype=np.float64))
        object.__setattr__(self, "rssi", np.asarray(self.rssi, dtype=np.float64))
        object.__setattr__(self, "csi", np.asarray(self.csi, dtype=np.complex128))
        object.__setattr__(self, "interpolated", np.asarray(self.interpolated, dtype=bool))
        object.__setattr__(self, "label_gap", np.asarray(self.label_gap, dtype=np.float64))
        if len(self) and (np.any(self.label_gap < 0) or not np.isfinite(self.xy).all()):
            raise SchemaError("dataset rows need finite coordinates and non-negative label gaps")

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    @property
    def subcarrier_count(self) -> int:
        return int(self.csi.shape[1])

    def frame(self, i: int) -> LabeledFrame:
        return LabeledFrame(
            timestamp=float(self.ts[i]),
            world=WorldPoint(float(self.xy[i, 0]), float(self.xy[i, 1])),
            person_id=self.person_id,
            rssi=float(self.rssi[i]),
            csi=self.csi[i].copy(),
            interpolated=bool(self.interpolated[i]),
            label_gap=float(self.label_gap[i]),
        )

    def frames(self) -> Iterator[LabeledFrame]:
        for i in range(len(self)):
            yield self.frame(i)

    def amplitude(self) -> np.ndarray:
        return np.abs(self.csi)


def nearest_label(t_i: float, labels: LabelSeries) -> tuple[int, float]:
    """Index and |t_i - T_m| of the nearest label timestamp (binary search)."""
    if len(labels) == 0:
        raise EmptyLabels("cannot align against an empty label stream")
    idx = int(_kernels.nearest_indices(np.array([t_i], dtype=np.float64), labels.ts)[0])
    return idx, abs(t_i - float(labels.ts[idx]))


def align(
    seq: CsiSequence,
    labels: LabelSeries,
    person_id: str,
    max_gap: float = np.inf,
) -> tuple[LabeledDataset, DropReport]:
    """Label every packet whose nearest label exists, is present, and is within max_gap.

    Deterministic and read-only over both inputs; output rows keep CSI
    timestamp order and preserve the interpolated flag so downstream users
    can filter completed packets.
    """
    if len(labels) == 0:
        raise EmptyLabels("cannot align against an empty label stream")

    idx = _kernels.nearest_indices(seq.ts, labels.ts)
    gap = np.abs(seq.ts - labels.ts[idx])
    label_xy = labels.xy[idx]
    missing = np.isnan(label_xy[:, 0])
    too_far = ~missing & (gap > max_gap)
    keep = ~missing & ~too_far

    report = DropReport(
        missing_detection=int(missing.sum()),
        gap_exceeded=int(too_far.sum()),
    )
    dataset = LabeledDataset(
        ts=seq.ts[keep],
        xy=label_xy[keep],
        rssi=seq.rssi[keep],
        csi=seq.csi[keep],
        interpolated=seq.interpolated[keep],
        label_gap=gap[keep],
        person_id=person_id,
    )
    return dataset, report


# ---------------------------------------------------------------------------
# File formats

def write_dataset_jsonl(path, ds: LabeledDataset) -> None:
    with open(path, "w") as fh:
        for i in range(len(ds)):
            row = {
                "ts": float(ds.ts[i]),
                "x": float(ds.xy[i, 0]),
                "y": float(ds.xy[i, 1]),
                "person_id": ds.person_id,
                "rssi": float(ds.rssi[i]),
                "csi_re": [float(v) for v in ds.csi[i].real],
                "csi_im": [float(v) for v in ds.csi[i].imag],
                "interp": int(ds.interpolated[i]),
                "label_gap": float(ds.label_gap[i]),
            }
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")


def read_dataset_jsonl(path) -> LabeledDataset:
    ts, xy, rssi, csi, interp, gap = [], [], [], [], [], []
    person_id = ""
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    ts.append(float(row["ts"]))
                    xy.append((float(row["x"]), float(row["y"])))
                    rssi.append(float(row["rssi"]))
                    csi.append(np.asarray(row["csi_re"], dtype=np.float64) + 1j * np.asarray(row["csi_im"], dtype=np.float64))
                    interp.append(bool(row.get("interp", 0)))
                    gap.append(float(row.get("label_gap", 0.0)))
                    person_id = str(row.get("person_id", person_id))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(f"dataset line {lineno}: {exc}") from exc
    except OSError as exc:
        raise InputOutputError(f"cannot read dataset file {path}: {exc}") from exc
    if not ts:
        return LabeledDataset(
            ts=np.zeros(0), xy=np.zeros((0, 2)), rssi=np.zeros(0),
            csi=np.zeros((0, 0), dtype=np.complex128),
            interpolated=np.zeros(0, dtype=bool), label_gap=np.zeros(0), person_id=person_id,
        )
    return LabeledDataset(
        ts=np.asarray(ts), xy=np.asarray(xy), rssi=np.asarray(rssi),
        csi=np.vstack(csi), interpolated=np.asarray(interp, dtype=bool),
        label_gap=np.asarray(gap), person_id=person_id,
    )


def write_dataset_csv(path, ds: LabeledDataset) -> None:
    """CSV variant mirroring the CSI input schema with appended x,y,person_id."""
    s = ds.subcarrier_count
    data = {"ts": ds.ts, "rssi": ds.rssi}
    for i in range(s):
        data[f"re_{i}"] = ds.csi[:, i].real
        data[f"im_{i}"] = ds.csi[:, i].imag
    data["interp"] = ds.interpolated.astype(np.int64)
    data["x"] = ds.xy[:, 0]
    data["y"] = ds.xy[:, 1]
    data["person_id"] = ds.person_id
    pd.DataFrame(data).to_csv(path, index=False)

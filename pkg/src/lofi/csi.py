"""CSI/RSSI packet stream ingestion, loss detection and gap completion.

A stream pinged at nominal rate f2 should have consecutive timestamps
roughly 1/f2 apart; the lost-packet count for a gap is

    k = max(round_half_up((t_next - t_i) * f2 - 1), 0)

and completion inserts k packets per gap, linearly interpolating RSSI and
per-subcarrier amplitude / unwrapped phase between the neighbors.
Sequences are immutable; complete() returns a new sequence and is
idempotent. Gap processing is independent per gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from . import _kernels
from .errors import InputOutputError, NegativeGap, NonFiniteValue, SchemaError, TooShort

DEFAULT_SUBCARRIERS = 52
DEFAULT_RATE = 100.0


@dataclass(frozen=True)
class CsiPacket:
    timestamp: float
    rssi: float
    csi: np.ndarray
    interpolated: bool = False


@dataclass(frozen=True)
class CsiSequence:
    """Array-backed, time-ordered packet stream with uniform subcarrier count."""

    ts: np.ndarray
    rssi: np.ndarray
    csi: np.ndarray
    interpolated: np.ndarray
    nominal_rate: float

    def __post_init__(self):
        ts = np.ascontiguousarray(self.ts, dtype=np.float64)
        rssi = np.ascontiguousarray(self.rssi, dtype=np.float64)
        csi = np.ascontiguousarray(self.csi, dtype=np.complex128)
        interp = np.ascontiguousarray(self.interpolated, dtype=bool)
        n = ts.shape[0]
        if csi.ndim != 2 or csi.shape[0] != n or rssi.shape[0] != n or interp.shape[0] != n:
            raise SchemaError("inconsistent packet array shapes")
        if self.nominal_rate <= 0:
            raise SchemaError(f"nominal rate must be positive, got {self.nominal_rate}")
        if not np.isfinite(ts).all():
            raise NonFiniteValue("non-finite packet timestamp")
        if n > 1 and np.any(np.diff(ts) <= 0):
            raise SchemaError("packet timestamps must be strictly increasing")
        for arr in (ts, rssi, csi, interp):
            arr.setflags(write=False)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "rssi", rssi)
        object.__setattr__(self, "csi", csi)
        object.__setattr__(self, "interpolated", interp)

    @property
    def subcarrier_count(self) -> int:
        return int(self.csi.shape[1])

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    def packet(self, i: int) -> CsiPacket:
        return CsiPacket(
            timestamp=float(self.ts[i]),
            rssi=float(self.rssi[i]),
            csi=self.csi[i].copy(),
            interpolated=bool(self.interpolated[i]),
        )


@dataclass
class IngestReport:
    rows_in: int = 0
    duplicates_dropped: int = 0
    reordered: bool = False

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "duplicates_dropped": self.duplicates_dropped,
            "reordered": self.reordered,
        }


def ingest(
    ts: Sequence[float],
    rssi: Sequence[float],
    csi: np.ndarray,
    nominal_rate: float,
    interpolated: np.ndarray | None = None,
) -> tuple[CsiSequence, IngestReport]:
    """Normalize raw rows into a sequence: sort by timestamp, drop exact-duplicate
    timestamps keeping the first occurrence, and validate finiteness."""
    ts = np.asarray(ts, dtype=np.float64)
    rssi = np.asarray(rssi, dtype=np.float64)
    csi = np.asarray(csi, dtype=np.complex128)
    if csi.ndim != 2 or csi.shape[0] != ts.shape[0]:
        raise SchemaError(
            f"csi array shape {csi.shape} does not match {ts.shape[0]} timestamps"
        )
    if interpolated is None:
        interpolated = np.zeros(ts.shape[0], dtype=bool)
    else:
        interpolated = np.asarray(interpolated, dtype=bool)

    if not np.isfinite(ts).all():
        raise NonFiniteValue("non-finite timestamp in input rows")
    if not np.isfinite(rssi).all():
        raise NonFiniteValue("non-finite rssi in input rows")
    if not np.isfinite(csi).all():
        raise NonFiniteValue("non-finite csi component in input rows")

    report = IngestReport(rows_in=int(ts.shape[0]))
    order = np.argsort(ts, kind="stable")
    report.reordered = bool(np.any(order != np.arange(ts.shape[0])))
    ts, rssi, csi, interpolated = ts[order], rssi[order], csi[order], interpolated[order]

    if ts.shape[0] > 1:
        keep = np.concatenate([[True], np.diff(ts) > 0])
        report.duplicates_dropped = int((~keep).sum())
        ts, rssi, csi, interpolated = ts[keep], rssi[keep], csi[keep], interpolated[keep]

    seq = CsiSequence(ts=ts, rssi=rssi, csi=csi, interpolated=interpolated, nominal_rate=nominal_rate)
    return seq, report


def count_lost(t_i: float, t_next: float, f2: float) -> int:
    """Lost packets in one gap; half-up rounding makes the 1.5-packet case 2."""
    if f2 <= 0:
        raise SchemaError(f"nominal rate must be positive, got {f2}")
    if t_next < t_i:
        raise NegativeGap(f"t_next {t_next} is before t_i {t_i}")
    x = (t_next - t_i) * f2 - 1.0
    return max(int(math.floor(x + 0.5)), 0)


def count_lost_stream(seq: CsiSequence) -> np.ndarray:
    """Per-gap lost counts over all consecutive packet pairs."""
    if len(seq) < 2:
        return np.zeros(0, dtype=np.int64)
    return _kernels.count_lost_batch(seq.ts, float(seq.nominal_rate))


def complete(seq: CsiSequence) -> CsiSequence:
    """Fill every detected gap with linearly interpolated packets.

    Inserted packets sit uniformly on the open interval between their
    neighbors, carry interpolated=True, and interpolate RSSI plus
    per-subcarrier amplitude and unwrapped phase (linear complex
    interpolation would shrink magnitude through phase rotations).
    Original packets are carried over bit-identically. Losses before the
    first or after the last packet are undetectable and not synthesized.
    """
    if len(seq) < 2:
        raise TooShort(f"completion needs at least 2 packets, got {len(seq)}")
    lost = count_lost_stream(seq)
    if not lost.any():
        return seq

    amp = np.ascontiguousarray(np.abs(seq.csi))
    phase = _kernels.unwrap_phase(np.ascontiguousarray(np.angle(seq.csi)))
    ts2, rssi2, amp2, phase2, src = _kernels.fill_gaps(
        seq.ts, seq.rssi, amp, phase, lost
    )

    csi2 = np.empty((ts2.shape[0], seq.subcarrier_count), dtype=np.complex128)
    carried = src >= 0
    csi2[carried] = seq.csi[src[carried]]
    inserted = ~carried
    csi2[inserted] = amp2[inserted] * np.exp(1j * phase2[inserted])

    interp2 = np.empty(ts2.shape[0], dtype=bool)
    interp2[carried] = seq.interpolated[src[carried]]
    interp2[inserted] = True

    return CsiSequence(
        ts=ts2, rssi=rssi2, csi=csi2, interpolated=interp2, nominal_rate=seq.nominal_rate
    )


# ---------------------------------------------------------------------------
# File format: CSV with header ts,rssi,re_0,im_0,...,re_{S-1},im_{S-1}[,interp]

def _expected_columns(subcarriers: int) -> list[str]:
    cols = ["ts", "rssi"]
    for i in range(subcarriers):
        cols += [f"re_{i}", f"im_{i}"]
    return cols


def read_csi_csv(path, subcarriers: int | None = None):
    """Load a CSI CSV; infers the subcarrier count from the header when not given.

    Returns (ts, rssi, csi complex (n, S), interpolated-or-None).
    """
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise InputOutputError(f"cannot read csi file {path}: {exc}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise SchemaError(f"csi file {path} is not parsable CSV: {exc}") from exc

    cols = list(df.columns)
    has_interp = cols and cols[-1] == "interp"
    data_cols = cols[:-1] if has_interp else cols
    if len(data_cols) < 4 or (len(data_cols) - 2) % 2 != 0:
        raise SchemaError(
            f"csi file {path}: expected ts,rssi,re_0,im_0,... columns, got {len(cols)}"
        )
    inferred = (len(data_cols) - 2) // 2
    if subcarriers is not None and inferred != subcarriers:
        raise SchemaError(
            f"csi file {path}: header has {inferred} subcarriers, expected {subcarriers}"
        )
    expected = _expected_columns(inferred)
    if data_cols != expected:
        raise SchemaError(f"csi file {path}: header mismatch, expected {expected[:4]}...")
    if df.isna().any().any():
        raise SchemaError(f"csi file {path}: missing fields (short row or empty cell)")

    ts = df["ts"].to_numpy(dtype=np.float64)
    rssi = df["rssi"].to_numpy(dtype=np.float64)
    re = df[[f"re_{i}" for i in range(inferred)]].to_numpy(dtype=np.float64)
    im = df[[f"im_{i}" for i in range(inferred)]].to_numpy(dtype=np.float64)
    csi = re + 1j * im
    interp = df["interp"].to_numpy(dtype=np.int64).astype(bool) if has_interp else None
    return ts, rssi, csi, interp


def read_csi_sequence(
    path, nominal_rate: float, subcarriers: int | None = None
) -> tuple[CsiSequence, IngestReport]:
    ts, rssi, csi, interp = read_csi_csv(path, subcarriers)
    return ingest(ts, rssi, csi, nominal_rate, interpolated=interp)


def write_csi_csv(path, seq: CsiSequence, include_interp: bool = True) -> None:
    """Write a sequence back out; completed streams carry the interp 0/1 column."""
    s = seq.subcarrier_count
    data = {"ts": seq.ts, "rssi": seq.rssi}
    for i in range(s):
        data[f"re_{i}"] = seq.csi[:, i].real
        data[f"im_{i}"] = seq.csi[:, i].imag
    if include_interp:
        data["interp"] = seq.interpolated.astype(np.int64)
    pd.DataFrame(data).to_csv(path, index=False)

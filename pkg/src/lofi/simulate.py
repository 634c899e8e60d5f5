"""Synthetic scenario generator with known ground truth.

Produces a random-waypoint trajectory inside the region (uniform waypoints,
uniform speed, dwell pauses to model standing), camera detections obtained
by projecting the true position through the inverse of a known homography
plus Gaussian pixel noise, and a CSI stream whose values are a
deterministic smooth function of true position (per-subcarrier sinusoids),
so position is learnable but no RF physics is claimed.

Everything is reproducible from the scenario seed: draws happen in a fixed
order (trajectory, camera misses, pixel noise, packet jitter, packet
drops). The first and last CSI packets are never dropped, because edge
losses are invisible to timestamp-gap counting, which would make the
drop-mask oracle inexact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .csi import CsiSequence
from .detection import BoundingBox, Detection, DetectionFrame
from .errors import ConfigError, EmptyInput, InputOutputError, SchemaError
from .geometry import AnchorSet, Homography, PixelPoint, WorldPoint, invert, project_points, solve_homography

# Synthesized person box size in pixels; only its bottom-edge midpoint matters.
BOX_W = 40.0
BOX_H = 110.0
BOX_CONF = 0.9

# Jitter is clipped at this fraction of the packet period so ordering is
# always preserved (min residual gap 0.2 periods).
JITTER_CLIP = 0.4


@dataclass
class Scenario:
    """Simulation parameters; defaults mirror a small-room walking session."""

    x_len: float = 1.8
    y_len: float = 4.8
    duration: float = 60.0
    f1: float = 26.0
    f2: float = 100.0
    subcarriers: int = 52
    homography: Homography | None = None
    pixel_noise: float = 0.0
    miss_prob: float = 0.0
    loss_prob: float = 0.0
    jitter: float = 0.0
    speed_range: tuple[float, float] = (0.3, 1.5)
    pause_prob: float = 0.3
    pause_range: tuple[float, float] = (0.5, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.x_len <= 0 or self.y_len <= 0:
            raise ConfigError("region extents must be positive")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.f1 <= 0 or self.f2 <= 0:
            raise ConfigError("rates must be positive")
        if self.subcarriers < 1:
            raise ConfigError("subcarrier count must be at least 1")
        for name in ("miss_prob", "loss_prob", "pause_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.pixel_noise < 0 or self.jitter < 0:
            raise ConfigError("noise parameters must be non-negative")
        lo, hi = self.speed_range
        if lo < 0 or hi < lo:
            raise ConfigError(f"speed range must satisfy 0 <= lo <= hi, got {self.speed_range}")
        plo, phi = self.pause_range
        if plo < 0 or phi < plo:
            raise ConfigError(f"pause range must satisfy 0 <= lo <= hi, got {self.pause_range}")

    def resolved_homography(self) -> Homography:
        return self.homography if self.homography is not None else default_homography(self.x_len, self.y_len)


def default_homography(x_len: float, y_len: float) -> Homography:
    """Perspective camera stand-in: image trapezoid mapped onto the region."""
    anchors = AnchorSet(
        pixel=(
            PixelPoint(100.0, 420.0),
            PixelPoint(540.0, 420.0),
            PixelPoint(600.0, 60.0),
            PixelPoint(40.0, 60.0),
        ),
        world=(
            WorldPoint(0.0, 0.0),
            WorldPoint(x_len, 0.0),
            WorldPoint(x_len, y_len),
            WorldPoint(0.0, y_len),
        ),
    )
    return solve_homography(anchors)


@dataclass
class GroundTruth:
    """Trajectory breakpoints plus per-modality clocks and drop masks."""

    leg_t: np.ndarray
    leg_xy: np.ndarray
    camera_ts: np.ndarray
    camera_xy: np.ndarray
    image_missed: np.ndarray
    packet_ts: np.ndarray
    packet_xy: np.ndarray
    packet_dropped: np.ndarray

    def position_at(self, t) -> np.ndarray:
        """Exact trajectory position at arbitrary times (piecewise linear)."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        x = np.interp(t, self.leg_t, self.leg_xy[:, 0])
        y = np.interp(t, self.leg_t, self.leg_xy[:, 1])
        return np.column_stack([x, y])

    @property
    def dropped_count(self) -> int:
        return int(self.packet_dropped.sum())

    @property
    def missed_count(self) -> int:
        return int(self.image_missed.sum())


def _trajectory(sc: Scenario, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([0.0, 0.0])
    hi = np.array([sc.x_len, sc.y_len])
    start = rng.uniform(lo, hi)
    v_lo, v_hi = sc.speed_range
    if v_hi <= 0.0:
        return np.array([0.0, sc.duration]), np.vstack([start, start])

    times = [0.0]
    points = [start]
    t = 0.0
    cur = start
    while t < sc.duration:
        wp = rng.uniform(lo, hi)
        v = max(rng.uniform(v_lo, v_hi), 1e-9)
        dt = float(np.linalg.norm(wp - cur)) / v
        if dt > 0.0:
            t += dt
            times.append(t)
            points.append(wp)
            cur = wp
        if rng.random() < sc.pause_prob:
            pdur = rng.uniform(*sc.pause_range)
            if pdur > 0.0:
                t += pdur
                times.append(t)
                points.append(cur)
    return np.asarray(times), np.vstack(points)


def _clock(duration: float, rate: float) -> np.ndarray:
    n = int(math.floor(duration * rate + 1e-9))
    return np.arange(n, dtype=np.float64) / rate


def _csi_from_positions(xy: np.ndarray, subcarriers: int, x_len: float) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic position-to-signal map: distinct spatial sinusoids per
    subcarrier for amplitude and phase, log-distance RSSI from a fixed
    receiver point. Non-physical by design; only determinism and
    position-dependence are promised."""
    j = np.arange(subcarriers, dtype=np.float64)
    ax = 1.0 + 3.0 * j / subcarriers
    ay = 0.7 + 2.4 * j / subcarriers
    px = 2.399963229728653 * j
    py = 1.0 + 1.7 * j
    x = xy[:, 0:1]
    y = xy[:, 1:2]
    amp = 2.0 + 0.8 * np.sin(ax * x + px) + 0.6 * np.cos(ay * y + py)
    theta = (2.3 * x) * (0.5 + j / subcarriers) - (1.7 * y) * (0.3 + j / (2.0 * subcarriers))
    csi = amp * np.exp(1j * theta)
    rx = np.array([x_len / 2.0, -0.5])
    d = np.sqrt(((xy - rx) ** 2).sum(axis=1))
    rssi = -40.0 - 12.0 * np.log10(1.0 + d ** 2)
    return csi, rssi


def generate(sc: Scenario) -> tuple[list[DetectionFrame], CsiSequence, GroundTruth]:
    """Produce (detection frames, raw CSI sequence, ground truth) for a scenario."""
    rng = np.random.default_rng(sc.seed)
    leg_t, leg_xy = _trajectory(sc, rng)

    truth = GroundTruth(
        leg_t=leg_t,
        leg_xy=leg_xy,
        camera_ts=_clock(sc.duration, sc.f1),
        camera_xy=np.zeros((0, 2)),
        image_missed=np.zeros(0, dtype=bool),
        packet_ts=np.zeros(0),
        packet_xy=np.zeros((0, 2)),
        packet_dropped=np.zeros(0, dtype=bool),
    )
    truth.camera_xy = truth.position_at(truth.camera_ts)
    n1 = truth.camera_ts.shape[0]
    truth.image_missed = rng.random(n1) < sc.miss_prob
    pixel_noise = rng.normal(0.0, sc.pixel_noise, size=(n1, 2))

    nominal = _clock(sc.duration, sc.f2)
    n2 = nominal.shape[0]
    jitter = rng.normal(0.0, sc.jitter, size=n2) if n2 else np.zeros(0)
    clip = JITTER_CLIP / sc.f2
    truth.packet_ts = nominal + np.clip(jitter, -clip, clip)
    truth.packet_xy = truth.position_at(truth.packet_ts)
    dropped = rng.random(n2) < sc.loss_prob
    if n2:
        dropped[0] = False
        dropped[-1] = False
    truth.packet_dropped = dropped

    # Camera frames: project truth through the world-to-pixel inverse map.
    h = sc.resolved_homography()
    world_to_pixel = invert(h)
    uv, ok = project_points(world_to_pixel.matrix, truth.camera_xy)
    if n1 and not ok.all():
        raise ConfigError("trajectory projects to infinity; check the scenario homography")
    uv = uv + pixel_noise
    frames = []
    for i in range(n1):
        ts = float(truth.camera_ts[i])
        if truth.image_missed[i]:
            frames.append(DetectionFrame(timestamp=ts, detections=()))
            continue
        u, v = float(uv[i, 0]), float(uv[i, 1])
        box = BoundingBox(u - BOX_W / 2.0, v - BOX_H, u + BOX_W / 2.0, v)
        frames.append(
            DetectionFrame(
                timestamp=ts,
                detections=(Detection(box=box, label="person", confidence=BOX_CONF),),
            )
        )

    keep = ~dropped
    csi_vals, rssi = _csi_from_positions(truth.packet_xy[keep], sc.subcarriers, sc.x_len)
    seq = CsiSequence(
        ts=truth.packet_ts[keep],
        rssi=rssi,
        csi=csi_vals,
        interpolated=np.zeros(int(keep.sum()), dtype=bool),
        nominal_rate=sc.f2,
    )
    return frames, seq, truth


# ---------------------------------------------------------------------------
# Label-error evaluation

@dataclass
class ErrorReport:
    """Euclidean label-error summary with a 1 cm resolution CDF table."""

    mean: float
    std: float
    count: int
    cdf: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mean_m": self.mean,
            "std_m": self.std,
            "count": self.count,
            "cdf": [{"cm": c, "fraction": f} for c, f in self.cdf],
        }

    def format_table(self) -> str:
        lines = [
            f"samples        {self.count}",
            f"mean error     {self.mean * 100:.2f} cm",
            f"error std      {self.std * 100:.2f} cm",
            "error CDF (cm, fraction):",
        ]
        lines += [f"  {c:4d}  {f:.4f}" for c, f in self.cdf]
        return "\n".join(lines)


def _error_report(errors: np.ndarray) -> ErrorReport:
    if errors.size == 0:
        raise EmptyInput("no produced labels to evaluate")
    max_cm = int(math.ceil(errors.max() * 100.0))
    cdf = [
        (cm, float((errors <= cm / 100.0 + 1e-12).mean()))
        for cm in range(0, max_cm + 1)
    ]
    return ErrorReport(
        mean=float(errors.mean()), std=float(errors.std()), count=int(errors.size), cdf=cdf
    )


def eval_labels(produced_ts, produced_xy, truth: GroundTruth) -> ErrorReport:
    """Per-frame error of produced labels against the exact trajectory."""
    produced_ts = np.asarray(produced_ts, dtype=np.float64)
    produced_xy = np.asarray(produced_xy, dtype=np.float64).reshape(-1, 2)
    if produced_ts.size == 0:
        raise EmptyInput("no produced labels to evaluate")
    ref = truth.position_at(produced_ts)
    errors = np.sqrt(((produced_xy - ref) ** 2).sum(axis=1))
    return _error_report(errors)


def eval_labels_against_samples(produced_ts, produced_xy, truth_ts, truth_xy) -> ErrorReport:
    """File-based variant: match each produced row to the nearest truth sample."""
    from . import _kernels

    produced_ts = np.asarray(produced_ts, dtype=np.float64)
    produced_xy = np.asarray(produced_xy, dtype=np.float64).reshape(-1, 2)
    truth_ts = np.asarray(truth_ts, dtype=np.float64)
    truth_xy = np.asarray(truth_xy, dtype=np.float64).reshape(-1, 2)
    if produced_ts.size == 0:
        raise EmptyInput("no produced labels to evaluate")
    if truth_ts.size == 0:
        raise EmptyInput("truth sample set is empty")
    idx = _kernels.nearest_indices(produced_ts, truth_ts)
    errors = np.sqrt(((produced_xy - truth_xy[idx]) ** 2).sum(axis=1))
    return _error_report(errors)


# ---------------------------------------------------------------------------
# File formats

def write_truth_jsonl(path, truth: GroundTruth) -> None:
    """Truth positions sampled on the full packet clock (dropped ones included)."""
    with open(path, "w") as fh:
        for t, (x, y) in zip(truth.packet_ts, truth.packet_xy):
            fh.write(
                json.dumps({"ts": float(t), "x": float(x), "y": float(y)}, separators=(",", ":"))
                + "\n"
            )


def read_truth_jsonl(path) -> tuple[np.ndarray, np.ndarray]:
    ts, xy = [], []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    if obj.get("x") is None:
                        continue
                    ts.append(float(obj["ts"]))
                    xy.append((float(obj["x"]), float(obj["y"])))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(f"truth line {lineno}: {exc}") from exc
    except OSError as exc:
        raise InputOutputError(f"cannot read truth file {path}: {exc}") from exc
    return np.asarray(ts, dtype=np.float64), np.asarray(xy, dtype=np.float64).reshape(-1, 2)


def scenario_from_dict(data: dict) -> Scenario:
    """Build a scenario from its JSON form; unknown keys are rejected."""
    data = dict(data)
    region = data.pop("region", None)
    kwargs = {}
    if region is not None:
        kwargs["x_len"] = float(region["x_len"])
        kwargs["y_len"] = float(region["y_len"])
    hom = data.pop("homography", None)
    if hom is not None:
        if "matrix" in hom:
            m = np.asarray(hom["matrix"], dtype=np.float64).reshape(3, 3)
            kwargs["homography"] = Homography(matrix=m)
        elif "anchors" in hom:
            a = hom["anchors"]
            kwargs["homography"] = solve_homography(
                AnchorSet(
                    pixel=tuple(PixelPoint(float(u), float(v)) for u, v in a["pixel"]),
                    world=tuple(WorldPoint(float(x), float(y)) for x, y in a["world"]),
                )
            )
        else:
            raise ConfigError("homography must provide 'matrix' or 'anchors'")
    for key in ("duration", "f1", "f2", "pixel_noise", "miss_prob", "loss_prob", "jitter", "pause_prob"):
        if key in data:
            kwargs[key] = float(data.pop(key))
    for key in ("subcarriers", "seed"):
        if key in data:
            kwargs[key] = int(data.pop(key))
    for key in ("speed_range", "pause_range"):
        if key in data:
            lo, hi = data.pop(key)
            kwargs[key] = (float(lo), float(hi))
    if data:
        raise ConfigError(f"unknown scenario keys: {sorted(data)}")
    try:
        return Scenario(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def read_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputOutputError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("scenario file must hold a JSON object")
    return scenario_from_dict(data)

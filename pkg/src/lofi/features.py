"""Benchmark preprocessing: correlation features, standardization,
sliding windows, region quantization and a k-NN baseline.

All operations here are pure; windowing and feature extraction can be
parallelized per window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .align import LabeledDataset
from .errors import EmptyTrain, OutOfRegion, SchemaError, TooShort
from .geometry import WorldPoint

# Columns whose time std falls below this become all zeros instead of
# dividing by a vanishing scale.
STD_EPS = 1e-12

# Points up to this far outside the region are clamped onto its edge.
CLAMP_TOL = 0.01

DEFAULT_WINDOW = 100
DEFAULT_STRIDE = 25
DEFAULT_K = 5


@dataclass(frozen=True)
class AmplitudeWindow:
    """A t x s block of CSI amplitudes (time along axis 0)."""

    matrix: np.ndarray
    start_ts: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 2:
            raise SchemaError(f"amplitude window needs a (t>=2, s) matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class RegionGrid:
    """Cell grid over the movement space; cells are half-open with the last
    cell closed, so boundary points belong to the upper cell."""

    x_len: float
    y_len: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if self.x_len <= 0 or self.y_len <= 0:
            raise SchemaError("region extents must be positive")
        if self.n_x < 1 or self.n_y < 1:
            raise SchemaError("class counts must be at least 1")

    @property
    def classes(self) -> int:
        return self.n_x * self.n_y


# Paper-style class counts map onto balanced near-square grids; the long
# (y) axis takes the extra split.
CLASS_GRIDS = {2: (1, 2), 4: (2, 2), 6: (2, 3)}


def grid_for_classes(classes: int, x_len: float, y_len: float) -> RegionGrid:
    if classes not in CLASS_GRIDS:
        raise SchemaError(f"supported class counts are {sorted(CLASS_GRIDS)}, got {classes}")
    n_x, n_y = CLASS_GRIDS[classes]
    return RegionGrid(x_len=x_len, y_len=y_len, n_x=n_x, n_y=n_y)


def correlation_matrix(w: AmplitudeWindow) -> np.ndarray:
    """Subcarrier correlation F = M^T M (symmetric, positive semidefinite)."""
    m = w.matrix
    return m.T @ m


def standardize(w: AmplitudeWindow) -> AmplitudeWindow:
    """Zero-mean, unit population-std per subcarrier along time.

    Near-constant columns (std < 1e-12) become all zeros. Idempotent and
    invariant to per-column affine rescaling with positive slope.
    """
    m = w.matrix
    mean = m.mean(axis=0)
    std = m.std(axis=0)
    out = np.zeros_like(m)
    live = std >= STD_EPS
    out[:, live] = (m[:, live] - mean[live]) / std[live]
    return AmplitudeWindow(matrix=out, start_ts=w.start_ts)


def window_count(n: int, length: int, stride: int) -> int:
    return 0 if n < length else (n - length) // stride + 1


def windows(
    ds: LabeledDataset, length: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE
) -> list[tuple[AmplitudeWindow, WorldPoint]]:
    """Sliding windows of consecutive frames; the target coordinate is the
    last frame's world point and a trailing partial window is discarded."""
    if length < 2:
        raise SchemaError(f"window length must be >= 2, got {length}")
    if stride < 1:
        raise SchemaError(f"stride must be >= 1, got {stride}")
    n = len(ds)
    if n < length:
        raise TooShort(f"need at least {length} frames, got {n}")
    amp = ds.amplitude()
    out = []
    for w in range(window_count(n, length, stride)):
        lo = w * stride
        hi = lo + length
        win = AmplitudeWindow(matrix=amp[lo:hi], start_ts=float(ds.ts[lo]))
        last = hi - 1
        out.append((win, WorldPoint(float(ds.xy[last, 0]), float(ds.xy[last, 1]))))
    return out


def region_class(p: WorldPoint | Sequence[float], g: RegionGrid) -> int:
    """Cell index y_cell * n_x + x_cell; points within 1 cm outside the
    region are clamped onto it, anything farther raises OutOfRegion."""
    x, y = float(p[0]), float(p[1])
    if x < -CLAMP_TOL or x > g.x_len + CLAMP_TOL or y < -CLAMP_TOL or y > g.y_len + CLAMP_TOL:
        raise OutOfRegion(f"point ({x}, {y}) outside {g.x_len} x {g.y_len} region")
    x = min(max(x, 0.0), g.x_len)
    y = min(max(y, 0.0), g.y_len)
    x_cell = min(int(x / (g.x_len / g.n_x)), g.n_x - 1)
    y_cell = min(int(y / (g.y_len / g.n_y)), g.n_y - 1)
    return y_cell * g.n_x + x_cell


def knn_localize(
    train: Sequence[tuple[np.ndarray, WorldPoint]],
    query: np.ndarray,
    k: int = DEFAULT_K,
) -> WorldPoint:
    """Mean coordinate of the k nearest training features under Frobenius
    distance; k is clamped to the training-set size."""
    if len(train) == 0:
        raise EmptyTrain("knn needs a non-empty training set")
    feats = np.stack([np.asarray(f, dtype=np.float64).ravel() for f, _ in train])
    coords = np.asarray([[p[0], p[1]] for _, p in train], dtype=np.float64)
    q = np.asarray(query, dtype=np.float64).ravel()[None, :]
    if q.shape[1] != feats.shape[1]:
        raise SchemaError(f"query feature size {q.shape[1]} != train feature size {feats.shape[1]}")
    d = _kernels.pairwise_sq_dists(np.ascontiguousarray(q), np.ascontiguousarray(feats))[0]
    k = min(int(k), len(train))
    nearest = np.argsort(d, kind="stable")[:k]
    xy = coords[nearest].mean(axis=0)
    return WorldPoint(float(xy[0]), float(xy[1]))


def knn_localize_batch(
    train_feats: np.ndarray,
    train_xy: np.ndarray,
    query_feats: np.ndarray,
    k: int = DEFAULT_K,
) -> np.ndarray:
    """Vectorized knn_localize over many queries (features pre-flattened)."""
    if train_feats.shape[0] == 0:
        raise EmptyTrain("knn needs a non-empty training set")
    tf = np.ascontiguousarray(train_feats.reshape(train_feats.shape[0], -1), dtype=np.float64)
    qf = np.ascontiguousarray(query_feats.reshape(query_feats.shape[0], -1), dtype=np.float64)
    d = _kernels.pairwise_sq_dists(qf, tf)
    k = min(int(k), tf.shape[0])
    nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
    return train_xy[nearest].mean(axis=1)


def extract_features(
    ds: LabeledDataset,
    length: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    mode: str = "corr",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Windowed features for the whole dataset.

    mode 'corr' yields (n, s, s) correlation matrices of raw amplitude;
    mode 'std' yields (n, t, s) standardized windows. Returns
    (features, targets (n, 2), window start timestamps (n,)).
    """
    if mode not in ("corr", "std"):
        raise SchemaError(f"feature mode must be 'corr' or 'std', got {mode!r}")
    wins = windows(ds, length, stride)
    targets = np.asarray([[p.x, p.y] for _, p in wins], dtype=np.float64)
    starts = np.asarray([w.start_ts for w, _ in wins], dtype=np.float64)
    if mode == "corr":
        feats = np.stack([correlation_matrix(w) for w, _ in wins])
    else:
        feats = np.stack([standardize(w).matrix for w, _ in wins])
    return feats, targets, starts

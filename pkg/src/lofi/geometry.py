"""Pixel-space to physical-space perspective transform.

COORDINATE CONVENTIONS:
    Pixel frame: origin top-left, u right, v down (standard image convention).
    World frame: ground-plane meters, x/y.

The transform is a 3x3 planar homography estimated from exactly four
anchor correspondences via the classical 4-point method: an 8-unknown
linear system with the bottom-right matrix entry fixed to 1, preceded by
isotropic point normalization (translate to centroid, scale mean distance
to sqrt(2)) for conditioning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import CollinearAnchors, InputOutputError, PointAtInfinity, SchemaError, SingularSystem

# Scale-free collinearity threshold: a triple is degenerate when twice its
# triangle area falls below this fraction of the squared point-set span.
COLLINEAR_REL_TOL = 1e-9

# Homogeneous third components below this are treated as points at infinity.
W_TOL = 1e-9

ANCHOR_COUNT = 4


class PixelPoint(NamedTuple):
    u: float
    v: float


class WorldPoint(NamedTuple):
    x: float
    y: float


def _as_array(points: Iterable[Sequence[float]]) -> np.ndarray:
    arr = np.asarray([(p[0], p[1]) for p in points], dtype=np.float64)
    return arr


def _span(pts: np.ndarray) -> float:
    """Maximum pairwise distance of a small point set."""
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2).max()))


def _has_collinear_triple(pts: np.ndarray) -> bool:
    span = _span(pts)
    if span == 0.0:
        return True
    limit = COLLINEAR_REL_TOL * span * span
    n = pts.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ab = pts[j] - pts[i]
                ac = pts[k] - pts[i]
                area2 = abs(ab[0] * ac[1] - ab[1] * ac[0])
                if area2 < limit:
                    return True
    return False


@dataclass(frozen=True)
class AnchorSet:
    """Four (pixel, world) correspondences with no three collinear on either side."""

    pixel: tuple[PixelPoint, ...]
    world: tuple[WorldPoint, ...]

    def __post_init__(self):
        pixel = tuple(PixelPoint(float(p[0]), float(p[1])) for p in self.pixel)
        world = tuple(WorldPoint(float(w[0]), float(w[1])) for w in self.world)
        object.__setattr__(self, "pixel", pixel)
        object.__setattr__(self, "world", world)
        if len(pixel) != ANCHOR_COUNT or len(world) != ANCHOR_COUNT:
            raise SchemaError(
                f"anchor set needs exactly {ANCHOR_COUNT} pixel and {ANCHOR_COUNT} world points, "
                f"got {len(pixel)} and {len(world)}"
            )
        px = _as_array(pixel)
        wd = _as_array(world)
        if not (np.isfinite(px).all() and np.isfinite(wd).all()):
            raise SchemaError("anchor coordinates must be finite")
        if _has_collinear_triple(px):
            raise CollinearAnchors("three pixel anchors are collinear")
        if _has_collinear_triple(wd):
            raise CollinearAnchors("three world anchors are collinear")

    def pixel_array(self) -> np.ndarray:
        return _as_array(self.pixel)

    def world_array(self) -> np.ndarray:
        return _as_array(self.world)


@dataclass(frozen=True)
class Homography:
    """3x3 projective map from pixel to world coordinates, normalized to T33 = 1.

    Immutable after construction; all operations on it are pure functions,
    so instances are safe for unrestricted concurrent reads.
    """

    matrix: np.ndarray
    anchors: AnchorSet | None = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise SchemaError(f"homography matrix must be 3x3, got {m.shape}")
        if not np.isfinite(m).all():
            raise SingularSystem("homography matrix contains non-finite entries")
        if abs(m[2, 2] - 1.0) > 1e-12:
            raise SingularSystem("homography matrix must be normalized to T33 = 1")
        det = float(np.linalg.det(m))
        scale = float(np.linalg.norm(m))
        if abs(det) <= 1e-12 * scale ** 3:
            raise SingularSystem(f"homography matrix is singular (det={det:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.anchors is not None:
            src = self.anchors.pixel_array()
            dst = self.anchors.world_array()
            mapped, ok = project_points(m, src)
            if not ok.all():
                raise SingularSystem("an anchor maps to infinity under this matrix")
            err = np.abs(mapped - dst).max()
            if err > 1e-6:
                raise SingularSystem(
                    f"anchors are not reproduced by the matrix (max error {err:.3e} m)"
                )


def _normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity transform moving the centroid to the origin with mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    if dist <= 0.0:
        raise SingularSystem("anchor points are coincident")
    s = np.sqrt(2.0) / dist
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def solve_homography(anchors: AnchorSet) -> Homography:
    """Estimate the pixel-to-world homography from four anchor correspondences.

    Sets up the 8x8 linear system of the 4-point method on normalized
    coordinates, solves it directly, denormalizes, and rescales so the
    bottom-right entry is exactly 1.

    Raises:
        CollinearAnchors: enforced by AnchorSet construction.
        SingularSystem: the linear system is rank-deficient despite the
            collinearity pre-check, or the result cannot be normalized.
    """
    src = anchors.pixel_array()
    dst = anchors.world_array()
    n_src = _normalization(src)
    n_dst = _normalization(dst)
    sn = _apply_affine(n_src, src)
    dn = _apply_affine(n_dst, dst)

    a = np.zeros((8, 8), dtype=np.float64)
    b = np.zeros(8, dtype=np.float64)
    for i in range(ANCHOR_COUNT):
        u, v = sn[i]
        x, y = dn[i]
        a[2 * i] = [u, v, 1.0, 0.0, 0.0, 0.0, -x * u, -x * v]
        b[2 * i] = x
        a[2 * i + 1] = [0.0, 0.0, 0.0, u, v, 1.0, -y * u, -y * v]
        b[2 * i + 1] = y
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"8x8 homography system is singular: {exc}") from exc

    t_norm = np.append(h, 1.0).reshape(3, 3)
    t = np.linalg.inv(n_dst) @ t_norm @ n_src
    if abs(t[2, 2]) <= 1e-12 * np.linalg.norm(t):
        raise SingularSystem("homography cannot be normalized to T33 = 1")
    t = t / t[2, 2]
    return Homography(matrix=t, anchors=anchors)


def _apply_affine(m: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return pts @ m[:2, :2].T + m[:2, 2]


def project_points(matrix: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projectively map an (n, 2) point array through a 3x3 matrix.

    Returns (mapped (n, 2), ok (n,) bool); rows whose homogeneous third
    component falls below tolerance are NaN with ok=False instead of
    raising, so streams can degrade per point.
    """
    pts = np.asarray(pts, dtype=np.float64)
    homo = np.column_stack([pts, np.ones(pts.shape[0])])
    proj = homo @ matrix.T
    w = proj[:, 2]
    ok = np.abs(w) >= W_TOL
    out = np.full((pts.shape[0], 2), np.nan)
    np.divide(proj[:, :2], w[:, None], out=out, where=ok[:, None])
    return out, ok


def apply(h: Homography, p: PixelPoint | Sequence[float]) -> WorldPoint:
    """Map a single pixel point to world coordinates.

    Raises:
        PointAtInfinity: the homogeneous third component vanishes at p.
    """
    u, v = float(p[0]), float(p[1])
    m = h.matrix
    w = m[2, 0] * u + m[2, 1] * v + m[2, 2]
    if abs(w) < W_TOL:
        raise PointAtInfinity(f"pixel ({u}, {v}) maps to infinity (w={w:.3e})")
    x = (m[0, 0] * u + m[0, 1] * v + m[0, 2]) / w
    y = (m[1, 0] * u + m[1, 1] * v + m[1, 2]) / w
    return WorldPoint(x, y)


def invert(h: Homography) -> Homography:
    """World-to-pixel inverse; anchor provenance is kept with roles swapped."""
    try:
        inv = np.linalg.inv(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"homography is not invertible: {exc}") from exc
    if abs(inv[2, 2]) <= 1e-12 * np.linalg.norm(inv):
        raise SingularSystem("inverse homography cannot be normalized to T33 = 1")
    inv = inv / inv[2, 2]
    anchors = None
    if h.anchors is not None:
        anchors = AnchorSet(
            pixel=tuple(PixelPoint(w.x, w.y) for w in h.anchors.world),
            world=tuple(WorldPoint(p.u, p.v) for p in h.anchors.pixel),
        )
    return Homography(matrix=inv, anchors=anchors)


# ---------------------------------------------------------------------------
# File formats

def read_anchors(path) -> AnchorSet:
    """Load an anchors config file: {"pixel": [[u,v]x4], "world": [[x,y]x4]}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputOutputError(f"cannot read anchors file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"anchors file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "pixel" not in data or "world" not in data:
        raise SchemaError("anchors file must be a JSON object with 'pixel' and 'world' arrays")
    try:
        pixel = tuple(PixelPoint(float(u), float(v)) for u, v in data["pixel"])
        world = tuple(WorldPoint(float(x), float(y)) for x, y in data["world"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"anchors file has malformed coordinates: {exc}") from exc
    return AnchorSet(pixel=pixel, world=world)


def write_homography(path, h: Homography) -> None:
    """Store the 9 matrix entries row-major plus the source anchors."""
    payload = {"matrix": [float(x) for x in h.matrix.ravel()]}
    if h.anchors is not None:
        payload["anchors"] = {
            "pixel": [[p.u, p.v] for p in h.anchors.pixel],
            "world": [[w.x, w.y] for w in h.anchors.world],
        }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_homography(path) -> Homography:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputOutputError(f"cannot read homography file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"homography file {path} is not valid JSON: {exc}") from exc
    matrix = np.asarray(data.get("matrix", []), dtype=np.float64)
    if matrix.size != 9:
        raise SchemaError("homography file must hold 9 row-major matrix entries")
    anchors = None
    if data.get("anchors"):
        anchors = AnchorSet(
            pixel=tuple(PixelPoint(float(u), float(v)) for u, v in data["anchors"]["pixel"]),
            world=tuple(WorldPoint(float(x), float(y)) for x, y in data["anchors"]["world"]),
        )
    return Homography(matrix=matrix.reshape(3, 3), anchors=anchors)

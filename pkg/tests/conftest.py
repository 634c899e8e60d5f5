import numpy as np
import pytest

from lofi import _kernels
from lofi.geometry import AnchorSet, Homography, PixelPoint, WorldPoint, invert, solve_homography


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Pay any JIT compilation once, before tests that measure runtime.
    _kernels.warmup()


@pytest.fixture
def unit_square_anchors():
    return AnchorSet(
        pixel=(PixelPoint(0, 0), PixelPoint(1, 0), PixelPoint(1, 1), PixelPoint(0, 1)),
        world=(WorldPoint(0, 0), WorldPoint(1.8, 0), WorldPoint(1.8, 4.8), WorldPoint(0, 4.8)),
    )


@pytest.fixture
def scale_homography():
    return Homography(matrix=np.array([[1.8, 0.0, 0.0], [0.0, 4.8, 0.0], [0.0, 0.0, 1.0]]))


@pytest.fixture
def identity_homography():
    return Homography(matrix=np.eye(3))


def random_anchor_set(rng: np.random.Generator) -> AnchorSet:
    """Rejection-sample a non-degenerate anchor set in realistic ranges.

    Degenerate means a collinear triple or a quad so thin the projective
    system is effectively rank-deficient; both are resampled.
    """
    from lofi.errors import CollinearAnchors, SingularSystem

    while True:
        px = rng.uniform([0.0, 0.0], [640.0, 480.0], size=(4, 2))
        wd = rng.uniform([0.0, 0.0], [5.0, 5.0], size=(4, 2))
        try:
            anchors = AnchorSet(
                pixel=tuple(PixelPoint(*p) for p in px),
                world=tuple(WorldPoint(*w) for w in wd),
            )
            invert(solve_homography(anchors))
        except (CollinearAnchors, SingularSystem):
            continue
        return anchors

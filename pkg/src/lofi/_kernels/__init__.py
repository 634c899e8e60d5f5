"""Backend selection for the hot numeric kernels.

The LOFI_KERNELS environment variable picks the implementation:

  auto   use numba if importable, else pure numpy (default)
  numba  require the jitted backend, fail loudly if numba is missing
  numpy  force the pure-numpy fallback

Both backends expose the same five functions with identical contracts;
see numpy_backend for the reference documentation.
"""

import os

from . import numpy_backend

_choice = os.environ.get("LOFI_KERNELS", "auto").strip().lower()

if _choice in ("auto", "", "numba"):
    try:
        from . import numba_backend as _active
    except ImportError:
        if _choice == "numba":
            raise
        _active = numpy_backend
elif _choice == "numpy":
    _active = numpy_backend
else:
    raise ValueError(
        f"LOFI_KERNELS must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

unwrap_phase = _active.unwrap_phase
fill_gaps = _active.fill_gaps
nearest_indices = _active.nearest_indices
count_lost_batch = _active.count_lost_batch
pairwise_sq_dists = _active.pairwise_sq_dists


def backend_name() -> str:
    return _active.name


def warmup() -> None:
    """Pre-compile jitted kernels so later calls are not billed JIT time."""
    if hasattr(_active, "warmup"):
        _active.warmup()

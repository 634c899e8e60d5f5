"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend: unwrap_phase, fill_gaps,
nearest_indices and count_lost_batch perform the same elementwise
operations in the same order as their jitted twins, so the two backends
produce bit-identical results. pairwise_sq_dists may differ in summation
order (numpy uses pairwise/BLAS accumulation) and agrees to ~1e-12.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

name = "numpy"


def unwrap_phase(phase):
    """Remove 2*pi jumps along axis 0 of an (n, s) phase array."""
    phase = np.asarray(phase, dtype=np.float64)
    if phase.shape[0] < 2:
        return phase.copy()
    d = phase[1:] - phase[:-1]
    wrapped = d - TWO_PI * np.floor((d + np.pi) / TWO_PI)
    # Accumulate from row 0 inside one cumsum so the addition order matches
    # the jitted backend exactly (bit-identical outputs).
    return np.cumsum(np.vstack([phase[:1], wrapped]), axis=0)


def fill_gaps(ts, rssi, amp, phase, lost):
    """Insert linearly interpolated packets into every gap.

    lost[i] packets are placed uniformly on the open interval
    (ts[i], ts[i+1]); values interpolate between rows i and i+1.

    Returns (ts2, rssi2, amp2, phase2, src) where src[j] is the original
    row index for carried-over rows and -1 for inserted rows.
    """
    n = ts.shape[0]
    k = np.asarray(lost, dtype=np.int64)
    total_ins = int(k.sum())
    m = n + total_ins

    prefix = np.zeros(n, dtype=np.int64)
    np.cumsum(k, out=prefix[1:])
    orig_pos = np.arange(n, dtype=np.int64) + prefix

    ts2 = np.empty(m, dtype=np.float64)
    rssi2 = np.empty(m, dtype=np.float64)
    amp2 = np.empty((m, amp.shape[1]), dtype=np.float64)
    phase2 = np.empty((m, amp.shape[1]), dtype=np.float64)
    src = np.full(m, -1, dtype=np.int64)

    src[orig_pos] = np.arange(n, dtype=np.int64)
    ts2[orig_pos] = ts
    rssi2[orig_pos] = rssi
    amp2[orig_pos] = amp
    phase2[orig_pos] = phase

    if total_ins:
        gi = np.repeat(np.arange(n - 1, dtype=np.int64), k)
        j = np.arange(total_ins, dtype=np.int64) - np.repeat(prefix[:-1], k) + 1
        w = j.astype(np.float64) / (k[gi] + 1).astype(np.float64)
        ins = np.flatnonzero(src < 0)
        ts2[ins] = ts[gi] + (ts[gi + 1] - ts[gi]) * w
        rssi2[ins] = rssi[gi] + (rssi[gi + 1] - rssi[gi]) * w
        amp2[ins] = amp[gi] + (amp[gi + 1] - amp[gi]) * w[:, None]
        phase2[ins] = phase[gi] + (phase[gi + 1] - phase[gi]) * w[:, None]

    return ts2, rssi2, amp2, phase2, src


def nearest_indices(query_ts, ref_ts):
    """Index of the nearest value in sorted ref_ts for each query, ties to the earlier entry."""
    query_ts = np.asarray(query_ts, dtype=np.float64)
    ref_ts = np.asarray(ref_ts, dtype=np.float64)
    pos = np.searchsorted(ref_ts, query_ts)
    left = np.clip(pos - 1, 0, ref_ts.shape[0] - 1)
    right = np.clip(pos, 0, ref_ts.shape[0] - 1)
    take_right = (ref_ts[right] - query_ts) < (query_ts - ref_ts[left])
    return np.where(take_right, right, left).astype(np.int64)


def count_lost_batch(ts, f2):
    """Lost-packet count for every consecutive timestamp pair at nominal rate f2."""
    ts = np.asarray(ts, dtype=np.float64)
    x = (ts[1:] - ts[:-1]) * f2 - 1.0
    k = np.floor(x + 0.5)
    return np.maximum(k, 0.0).astype(np.int64)


def pairwise_sq_dists(query, train):
    """(nq, nt) squared Frobenius distances between flattened feature rows."""
    q = np.asarray(query, dtype=np.float64)
    t = np.asarray(train, dtype=np.float64)
    out = np.empty((q.shape[0], t.shape[0]), dtype=np.float64)
    for i in range(q.shape[0]):
        d = t - q[i]
        out[i] = np.einsum("nd,nd->n", d, d)
    return out

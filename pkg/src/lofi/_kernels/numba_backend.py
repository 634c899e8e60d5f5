"""Numba-jitted implementations of the hot kernels.

Each function mirrors the numpy backend operation for operation; see
numpy_backend for the contracts. All kernels expect contiguous float64
input arrays.
"""

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi

name = "numba"


@njit(cache=True)
def unwrap_phase(phase):
    n, s = phase.shape
    out = np.empty((n, s), dtype=np.float64)
    for j in range(s):
        out[0, j] = phase[0, j]
    for i in range(1, n):
        for j in range(s):
            d = phase[i, j] - phase[i - 1, j]
            wrapped = d - TWO_PI * np.floor((d + np.pi) / TWO_PI)
            out[i, j] = out[i - 1, j] + wrapped
    return out


@njit(cache=True)
def fill_gaps(ts, rssi, amp, phase, lost):
    n = ts.shape[0]
    s = amp.shape[1]
    total_ins = 0
    for i in range(n - 1):
        total_ins += lost[i]
    m = n + total_ins

    ts2 = np.empty(m, dtype=np.float64)
    rssi2 = np.empty(m, dtype=np.float64)
    amp2 = np.empty((m, s), dtype=np.float64)
    phase2 = np.empty((m, s), dtype=np.float64)
    src = np.full(m, -1, dtype=np.int64)

    pos = 0
    for i in range(n):
        ts2[pos] = ts[i]
        rssi2[pos] = rssi[i]
        for j in range(s):
            amp2[pos, j] = amp[i, j]
            phase2[pos, j] = phase[i, j]
        src[pos] = i
        pos += 1
        if i < n - 1:
            k = lost[i]
            for q in range(1, k + 1):
                w = q / (k + 1.0)
                ts2[pos] = ts[i] + (ts[i + 1] - ts[i]) * w
                rssi2[pos] = rssi[i] + (rssi[i + 1] - rssi[i]) * w
                for j in range(s):
                    amp2[pos, j] = amp[i, j] + (amp[i + 1, j] - amp[i, j]) * w
                    phase2[pos, j] = phase[i, j] + (phase[i + 1, j] - phase[i, j]) * w
                pos += 1

    return ts2, rssi2, amp2, phase2, src


@njit(cache=True)
def nearest_indices(query_ts, ref_ts):
    n = query_ts.shape[0]
    m = ref_ts.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        t = query_ts[i]
        pos = np.searchsorted(ref_ts, t)
        left = pos - 1
        if left < 0:
            left = 0
        elif left > m - 1:
            left = m - 1
        right = pos
        if right > m - 1:
            right = m - 1
        if (ref_ts[right] - t) < (t - ref_ts[left]):
            out[i] = right
        else:
            out[i] = left
    return out


@njit(cache=True)
def count_lost_batch(ts, f2):
    n = ts.shape[0]
    out = np.empty(n - 1, dtype=np.int64)
    for i in range(n - 1):
        x = (ts[i + 1] - ts[i]) * f2 - 1.0
        k = np.floor(x + 0.5)
        if k < 0.0:
            k = 0.0
        out[i] = np.int64(k)
    return out


@njit(cache=True)
def pairwise_sq_dists(query, train):
    nq = query.shape[0]
    nt = train.shape[0]
    d = query.shape[1]
    out = np.empty((nq, nt), dtype=np.float64)
    for i in range(nq):
        for j in range(nt):
            acc = 0.0
            for c in range(d):
                diff = train[j, c] - query[i, c]
                acc += diff * diff
            out[i, j] = acc
    return out


def warmup():
    """Force compilation of all kernels on tiny inputs."""
    ts = np.array([0.0, 0.1, 0.3])
    rssi = np.array([-40.0, -41.0, -42.0])
    mat = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    unwrap_phase(mat)
    fill_gaps(ts, rssi, mat, mat, np.array([0, 1], dtype=np.int64))
    nearest_indices(ts, ts)
    count_lost_batch(ts, 10.0)
    pairwise_sq_dists(mat, mat)

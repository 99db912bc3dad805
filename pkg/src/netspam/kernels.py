"""Hot loops over the bucket index.

Two interchangeable backends: numba-compiled loops and a pure-numpy path.
``NETSPAM_BACKEND=numpy`` forces the fallback; the default is numba when it
imports. Both consume the same arrays:

levels  (n, L) int64   quantised level index per review and feature
order   (L, n) int64   rows grouped by level (ascending level, then row)
offsets (L, s+1) int64 bucket ``k`` of feature ``l`` is
                       ``order[l, offsets[l, k]:offsets[l, k + 1]]``
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

BACKENDS = ("numba", "numpy")


def available_backends() -> tuple[str, ...]:
    return BACKENDS if numba is not None else ("numpy",)


def get_backend() -> str:
    name = os.environ.get("NETSPAM_BACKEND", "").strip().lower()
    if not name:
        return "numba" if numba is not None else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"NETSPAM_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("NETSPAM_BACKEND=numba but numba is not installed")
    return name


def _resolve(backend):
    return get_backend() if backend is None else backend


# -- numpy -----------------------------------------------------------------


def _score_numpy(levels, order, offsets, w, s, y, cap):
    n, L = levels.shape
    pr = np.empty(n)
    for u in range(n):
        vs = []
        fs = []
        for l in range(L):
            k = levels[u, l]
            if k == 0:
                continue
            members = order[l, offsets[l, k]:offsets[l, k + 1]]
            members = members[members != u]
            vs.append(members)
            fs.append(np.full(members.size, 1.0 - (k / s) * w[l]))
        if not vs:
            pr[u] = y[u]
            continue
        v = np.concatenate(vs)
        if v.size == 0:
            pr[u] = y[u]
            continue
        f = np.concatenate(fs)
        uniq, inv = np.unique(v, return_inverse=True)
        prod = np.ones(uniq.size)
        np.multiply.at(prod, inv, f)
        if 0 < cap < prod.size:
            prod = prod[:cap]
        # left-to-right sum in ascending row order, matching the compiled loop
        pr[u] = np.cumsum(1.0 - prod)[-1] / prod.size
    return pr


def _neighbor_counts_numpy(levels, order, offsets):
    n, L = levels.shape
    out = np.zeros(n, dtype=np.int64)
    for u in range(n):
        vs = [
            order[l, offsets[l, levels[u, l]]:offsets[l, levels[u, l] + 1]]
            for l in range(L)
            if levels[u, l] > 0
        ]
        if vs:
            v = np.unique(np.concatenate(vs))
            out[u] = v.size - (1 if np.any(v == u) else 0)
    return out


# -- numba -----------------------------------------------------------------

if numba is not None:

    # lowest-set-bit index lookup: (bit * C) >> 58 is distinct for all 64 bits
    _DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
    _DEBRUIJN_TABLE = np.zeros(64, dtype=np.int64)
    for _i in range(64):
        _DEBRUIJN_TABLE[(((1 << _i) * 0x03F79D71B4CB0A89) & (2**64 - 1)) >> 58] = _i

    @numba.njit(cache=True)
    def _score_numba(levels, order, offsets, w, s, y, cap):
        n, L = levels.shape
        pr = np.empty(n)
        prod = np.ones(n)
        seen = np.zeros(n, dtype=np.bool_)
        # bitmap of seen rows: walking its set bits yields neighbours in
        # ascending row order in O(n / 64 + e), with no per-review sort
        nwords = (n + 63) // 64
        bits = np.zeros(nwords, dtype=np.uint64)
        table = _DEBRUIJN_TABLE
        one = np.uint64(1)
        for u in range(n):
            cnt = 0
            for l in range(L):
                k = levels[u, l]
                if k == 0:
                    continue
                f = 1.0 - (k / s) * w[l]
                for idx in range(offsets[l, k], offsets[l, k + 1]):
                    v = order[l, idx]
                    if v == u:
                        continue
                    if seen[v]:
                        prod[v] *= f
                    else:
                        seen[v] = True
                        prod[v] = f
                        bits[v >> 6] |= one << np.uint64(v & 63)
                        cnt += 1
            if cnt == 0:
                pr[u] = y[u]
                continue
            m = cnt
            if 0 < cap < cnt:
                m = cap
            acc = 0.0
            taken = 0
            for wi in range(nwords):
                word = bits[wi]
                if word == 0:
                    continue
                bits[wi] = 0
                while word != 0:
                    low = word & (~word + one)
                    v = wi * 64 + table[(low * _DEBRUIJN) >> np.uint64(58)]
                    word ^= low
                    if taken < m:
                        acc += 1.0 - prod[v]
                        taken += 1
                    seen[v] = False
                    prod[v] = 1.0
            pr[u] = acc / m
        return pr

    @numba.njit(cache=True)
    def _neighbor_counts_numba(levels, order, offsets):
        n, L = levels.shape
        out = np.zeros(n, dtype=np.int64)
        seen = np.zeros(n, dtype=np.bool_)
        touched = np.empty(n, dtype=np.int64)
        for u in range(n):
            cnt = 0
            for l in range(L):
                k = levels[u, l]
                if k == 0:
                    continue
                for idx in range(offsets[l, k], offsets[l, k + 1]):
                    v = order[l, idx]
                    if v != u and not seen[v]:
                        seen[v] = True
                        touched[cnt] = v
                        cnt += 1
            out[u] = cnt
            for i in range(cnt):
                seen[touched[i]] = False
        return out


def _arrays(levels, order, offsets):
    return (
        np.ascontiguousarray(levels, dtype=np.int64),
        np.ascontiguousarray(order, dtype=np.int64),
        np.ascontiguousarray(offsets, dtype=np.int64),
    )


def score_reviews(levels, order, offsets, weights, s, prior, cap=0, backend=None):
    """Mean pairwise spam probability over each review's neighbours.

    Reviews without neighbours keep their prior. ``cap > 0`` limits the
    average to the first ``cap`` neighbours in row order.
    """
    levels, order, offsets = _arrays(levels, order, offsets)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    y = np.ascontiguousarray(prior, dtype=np.float64)
    if _resolve(backend) == "numba":
        return _score_numba(levels, order, offsets, w, float(s), y, int(cap))
    return _score_numpy(levels, order, offsets, w, float(s), y, int(cap))


def neighbor_counts(levels, order, offsets, backend=None):
    levels, order, offsets = _arrays(levels, order, offsets)
    if _resolve(backend) == "numba":
        return _neighbor_counts_numba(levels, order, offsets)
    return _neighbor_counts_numpy(levels, order, offsets)

"""JIT kernels.  Masks are uint64, so classes with more than 64 hypotheses use the numpy path."""
import numpy as np
from numba import njit, types
from numba.typed import Dict

from . import _numpy

MAX_HYPOTHESES = 64

_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True)
def _popcount(x):
    c = 0
    while x != _ZERO:
        x &= x - _ONE
        c += 1
    return c


@njit(cache=True)
def _bit_length(c):
    r = 0
    while c:
        c >>= 1
        r += 1
    return r


@njit(cache=True)
def _ldim(mask, ones, memo):
    if mask == _ZERO:
        return -1
    if mask in memo:
        return memo[mask]
    c = _popcount(mask)
    if c == 1:
        return 0
    ub = _bit_length(c) - 1
    best = 0
    for x in range(ones.shape[0]):
        a = mask & ones[x]
        b = mask ^ a
        if a == _ZERO or b == _ZERO:
            continue
        ca = _popcount(a)
        cb = _popcount(b)
        if ca > cb:
            t = a
            a = b
            b = t
            ca = cb
        if _bit_length(ca) <= best:
            continue
        v = _ldim(a, ones, memo)
        if v + 1 > best:
            w = _ldim(b, ones, memo)
            if w < v:
                v = w
            if v + 1 > best:
                best = v + 1
                if best >= ub:
                    break
    memo[mask] = best
    return best


@njit(cache=True)
def _soa_labels(mask, ones, memo):
    out = np.empty(ones.shape[0], dtype=np.uint8)
    for x in range(ones.shape[0]):
        a = mask & ones[x]
        out[x] = 1 if _ldim(a, ones, memo) >= _ldim(mask ^ a, ones, memo) else 0
    return out


class LdimTable:
    backend = "numba"

    def __new__(cls, ones, k):
        if k > MAX_HYPOTHESES:
            return _numpy.LdimTable(ones, k)
        return super().__new__(cls)

    def __init__(self, ones, k):
        self.ones = np.array([int(o) for o in ones], dtype=np.uint64)
        self.k = k
        self.memo = Dict.empty(key_type=types.uint64, value_type=types.int64)

    def ldim(self, mask):
        return int(_ldim(np.uint64(mask), self.ones, self.memo))

    def soa_labels(self, mask):
        return _soa_labels(np.uint64(mask), self.ones, self.memo)


@njit(cache=True)
def first_mismatch(h, xs, ys, start):
    for i in range(start, xs.shape[0]):
        if h[xs[i]] != ys[i]:
            return i
    return xs.shape[0]


@njit(cache=True)
def _row_keys(sub):
    k, p = sub.shape
    keys = np.empty(k, dtype=np.int64)
    for j in range(k):
        v = 0
        for i in range(p):
            v = (v << 1) | sub[j, i]
        keys[j] = v
    return keys


def pattern_count(sub):
    if sub.shape[0] == 0:
        return 0
    if sub.shape[1] == 0:
        return 1
    if sub.shape[1] > 62:
        return _numpy.pattern_count(sub)
    return int(np.unique(_row_keys(np.ascontiguousarray(sub, dtype=np.int64))).shape[0])


@njit(cache=True)
def _masses(matrix, counts):
    k, m = matrix.shape
    out = np.zeros(k, dtype=np.int64)
    for j in range(k):
        s = 0
        for x in range(m):
            if matrix[j, x]:
                s += counts[x]
        out[j] = s
    return out


def masses(matrix, counts):
    return _masses(matrix, np.asarray(counts, dtype=np.int64))


@njit(cache=True)
def retain_batch(N, n, uniforms):
    T = uniforms.shape[0]
    out = np.zeros((T, N), dtype=np.bool_)
    for t in range(T):
        left = n
        for i in range(N):
            if uniforms[t, i] * (N - i) < left:
                out[t, i] = True
                left -= 1
    return out

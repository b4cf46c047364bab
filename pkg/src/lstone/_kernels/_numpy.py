"""Reference kernels: plain Python integers and numpy, no JIT."""
import numpy as np


class LdimTable:
    """Memoized Littlestone dimension of sub-classes addressed by hypothesis bitmasks."""

    backend = "numpy"

    def __init__(self, ones, k):
        self.ones = [int(o) for o in ones]
        self.k = k
        self.memo = {}

    def ldim(self, mask):
        return _ldim(int(mask), self.ones, self.memo)

    def soa_labels(self, mask):
        mask = int(mask)
        out = np.empty(len(self.ones), dtype=np.uint8)
        for x, o in enumerate(self.ones):
            a = mask & o
            out[x] = 1 if _ldim(a, self.ones, self.memo) >= _ldim(mask ^ a, self.ones, self.memo) else 0
        return out


def _ldim(mask, ones, memo):
    if not mask:
        return -1
    hit = memo.get(mask)
    if hit is not None:
        return hit
    c = mask.bit_count()
    if c == 1:
        return 0
    ub = c.bit_length() - 1
    best = 0
    seen = set()
    for o in ones:
        a = mask & o
        b = mask ^ a
        if not a or not b or a in seen:
            continue
        seen.add(a)
        seen.add(b)
        ca, cb = a.bit_count(), b.bit_count()
        if ca > cb:
            a, b = b, a
            ca = cb
        # 1 + ldim(smaller side) is at most 1 + floor(log2 |smaller side|)
        if ca.bit_length() <= best:
            continue
        v = _ldim(a, ones, memo)
        if v + 1 > best:
            v = min(v, _ldim(b, ones, memo))
            if v + 1 > best:
                best = v + 1
                if best >= ub:
                    break
    memo[mask] = best
    return best


def first_mismatch(h, xs, ys, start):
    """Index of the first ``i >= start`` with ``h[xs[i]] != ys[i]``, or ``len(xs)``."""
    bad = np.flatnonzero(h[xs[start:]] != ys[start:])
    return int(start + bad[0]) if bad.size else len(xs)


def pattern_count(sub):
    if sub.shape[0] == 0:
        return 0
    if sub.shape[1] == 0:
        return 1
    return int(np.unique(sub, axis=0).shape[0])


def masses(matrix, counts):
    """Per-hypothesis sums ``sum_x h(x) * counts[x]``."""
    return matrix.astype(np.int64) @ np.asarray(counts, dtype=np.int64)


def retain_batch(N, n, uniforms):
    """Sequential uniform subsequence decisions for every row of ``uniforms``.

    At step i with r picks left, keep with probability r / (N - i).
    """
    T = uniforms.shape[0]
    out = np.zeros((T, N), dtype=np.bool_)
    left = np.full(T, n, dtype=np.int64)
    for i in range(N):
        keep = uniforms[:, i] * (N - i) < left
        out[:, i] = keep
        left -= keep
    return out

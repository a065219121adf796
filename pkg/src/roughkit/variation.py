"""Exact r-variation of nonnegative two-parameter fields (r >= 1).

``V^r chi_I = sup_pi (sum_k chi(pi_k, pi_{k+1})^r)^(1/r)`` over all finite
increasing index sequences ``pi`` inside ``I``.  The supremum is attained by
dynamic programming: ``best(j) = max(0, max_{i<j} best(i) + chi(i,j)^r)`` is
the largest power sum of a chain ending at ``j``.  Chains may start and end
anywhere in ``I``: ``chi`` need not be superadditive in the r-th power, so
extending a chain to the endpoints can lose mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import GridPath, Partition, TwoParamField
from .errors import ParameterError

BRUTEFORCE_MAX_POINTS = 14
FIELD_MAX_POINTS = 512
# relative slack under which two chain sums count as tied
TIE_RTOL = 1e-13


@dataclass(frozen=True)
class VariationResult:
    value: float
    optimal_partition: Partition
    r: float

    def __float__(self) -> float:
        return self.value


def as_scalar_field(obj) -> TwoParamField:
    """Accept a scalar field, a vector/tensor field (norms taken) or a path (distances)."""
    if isinstance(obj, GridPath):
        return obj.distance_field()
    if isinstance(obj, TwoParamField):
        return obj if obj.is_scalar else obj.norms()
    raise ParameterError(f"cannot interpret {type(obj).__name__} as a nonnegative field")


def _check_r(r: float) -> None:
    if not np.isfinite(r) or r < 1:
        raise ParameterError(f"variation exponent r must be >= 1 (got {r})")


def _interval(n: int, interval) -> tuple:
    if interval is None:
        return 0, n - 1
    a, b = (int(x) for x in interval)
    if not 0 <= a <= b < n:
        raise ParameterError(f"interval {interval} outside grid of {n} points")
    return a, b


def _powered(chi: TwoParamField, r: float, a: int, b: int) -> np.ndarray:
    d = chi.dense()[a : b + 1, a : b + 1]
    if np.any(d < 0):
        raise ParameterError("variation needs a nonnegative field")
    return np.triu(d, 1) ** r


@njit(cache=True)
def _chain_dp(cr, rtol):
    m = cr.shape[0]
    best = np.zeros(m)  # exact maxima
    tb = np.zeros(m)  # tie-broken sums used for the witness
    cnt = np.ones(m, dtype=np.int64)
    parent = -np.ones(m, dtype=np.int64)
    for j in range(1, m):
        bmax = 0.0
        b = 0.0
        c = 1
        p = -1
        for i in range(j):
            v = best[i] + cr[i, j]
            if v > bmax:
                bmax = v
            w = tb[i] + cr[i, j]
            ci = cnt[i] + 1
            thr = rtol * max(abs(b), abs(w))
            if w > b + thr or (w >= b - thr and ci < c):
                b = w
                c = ci
                p = i
        best[j] = bmax
        tb[j] = b
        cnt[j] = c
        parent[j] = p
    return best, tb, cnt, parent


@njit(cache=True)
def _field_dp(cr):
    n = cr.shape[0]
    out = np.zeros((n, n))
    B = np.zeros(n)
    for i in range(n):
        B[i] = 0.0
        run = 0.0
        for j in range(i + 1, n):
            bj = 0.0
            for k in range(i, j):
                v = B[k] + cr[k, j]
                if v > bj:
                    bj = v
            B[j] = bj
            if bj > run:
                run = bj
            out[i, j] = run
    return out


def var_exact(chi, r: float, interval=None) -> VariationResult:
    """Exact r-variation over ``interval = (a, b)`` (grid indices, default whole grid)."""
    _check_r(r)
    chi = as_scalar_field(chi)
    a, b = _interval(chi.n, interval)
    if a == b:
        return VariationResult(0.0, Partition([a]), float(r))
    cr = _powered(chi, r, a, b)
    best, tb, cnt, parent = _chain_dp(cr, TIE_RTOL)
    top = float(best.max())
    if top <= 0.0:
        return VariationResult(0.0, Partition([a, b]), float(r))
    # witness: best tie-broken endpoint, ties toward fewer points
    scale = float(tb.max())
    cand = np.flatnonzero(tb >= scale * (1 - TIE_RTOL))
    end = int(cand[np.argmin(cnt[cand])])
    chain = [end]
    while parent[chain[-1]] >= 0:
        chain.append(int(parent[chain[-1]]))
    idx = [a + k for k in reversed(chain)]
    return VariationResult(top ** (1.0 / r), Partition(idx), float(r))


def partition_sum(chi, r: float, partition) -> float:
    """``(sum chi(pi_k, pi_{k+1})^r)^(1/r)`` for a given partition."""
    chi = as_scalar_field(chi)
    idx = list(partition)
    d = chi.dense()
    s = sum(float(d[i, j]) ** r for i, j in zip(idx, idx[1:]))
    return s ** (1.0 / r)


def var_value(chi, r: float, interval=None) -> float:
    return var_exact(chi, r, interval).value


def var_field(f, r: float, max_points: int = FIELD_MAX_POINTS) -> TwoParamField:
    """Field ``(i, j) -> V^r chi_[t_i, t_j]`` over all subintervals (O(n^3))."""
    _check_r(r)
    chi = as_scalar_field(f)
    if chi.n > max_points:
        raise ParameterError(f"var_field is capped at {max_points} points (got {chi.n}); coarsen the grid first")
    cr = _powered(chi, r, 0, chi.n - 1)
    return TwoParamField(chi.grid, _field_dp(cr) ** (1.0 / r))


def var_bruteforce(chi, r: float, interval=None) -> float:
    """Enumerate every subsequence of the interval (at most 14 points)."""
    _check_r(r)
    chi = as_scalar_field(chi)
    a, b = _interval(chi.n, interval)
    m = b - a + 1
    if m > BRUTEFORCE_MAX_POINTS:
        raise ParameterError(f"brute force refuses {m} points (limit {BRUTEFORCE_MAX_POINTS})")
    if m < 2:
        return 0.0
    cr = np.triu(chi.dense()[a : b + 1, a : b + 1], 1) ** r
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    pos = np.where(bits, np.arange(m), -1)
    # previous selected index strictly before column k
    prev = np.maximum.accumulate(pos, axis=1)
    prev = np.concatenate([np.full((masks.size, 1), -1), prev[:, :-1]], axis=1)
    take = bits & (prev >= 0)
    cols = np.broadcast_to(np.arange(m), prev.shape)
    contrib = np.where(take, cr[np.clip(prev, 0, None), cols], 0.0)
    return float(contrib.sum(axis=1).max()) ** (1.0 / r)


def dyadic_block_sums(chi, r: float, levels: int | None = None) -> np.ndarray:
    """``l_l = (sum_m chi(cell_{l,m})^r)^(1/r)`` for dyadic levels ``l = 0..levels``."""
    _check_r(r)
    chi = as_scalar_field(chi)
    top = chi.grid.dyadic_level()
    if levels is None:
        levels = top
    if not 0 <= levels <= top:
        raise ParameterError(f"levels must lie in [0, {top}] for this grid")
    d = chi.dense()
    out = np.empty(levels + 1)
    for lev in range(levels + 1):
        stride = 1 << (top - lev)
        left = np.arange(0, chi.n - 1, stride)
        out[lev] = float(np.sum(d[left, left + stride] ** r)) ** (1.0 / r)
    return out


def dyadic_bound(chi, r: float, levels: int | None = None) -> float:
    """``2^((r-1)/r) * sum_l l_l``; an upper bound for the r-variation of a subadditive field.

    On a grid of ``2^L`` cells every grid interval is a finite union of dyadic
    cells of level at most ``L``, so truncating at ``levels = L`` (the default)
    keeps the bound valid.
    """
    blocks = dyadic_block_sums(chi, r, levels)
    return float(2.0 ** ((r - 1.0) / r) * blocks.sum())

"""Riemann sums of germs, the sewing map along dyadic refinements, and sewing bounds.

The target norm is Euclidean (Frobenius for matrices).  Any norm ``|.|``
satisfies ``|x + y|^p <= |x|^p + |y|^p`` for ``p <= 1``, so the same norm
serves every ``p`` in ``(0, 1]`` of the p-metric bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import Control, Partition, TwoParamField
from .errors import DivergenceError, ParameterError

# Euler-Maclaurin: sum_{k>=K} k^-t = K^{1-t}/(t-1) + K^-t/2 + sum_j B_2j/(2j)! (t)_{2j-1} K^{-t-2j+1} + ...
_ZETA_CUT = 64
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)


def zeta(theta: float) -> float:
    """``sum_{k>=1} k^-theta`` for ``theta > 1`` (absolute error well below 1e-12)."""
    theta = float(theta)
    if not theta > 1.0 or not math.isfinite(theta):
        raise DivergenceError(f"zeta diverges for theta <= 1 (got {theta})")
    K = _ZETA_CUT
    k = np.arange(1, K, dtype=float)
    head = float(np.sum(k[::-1] ** -theta))
    tail = K ** (1.0 - theta) / (theta - 1.0) + 0.5 * K**-theta
    rising = theta  # (theta)(theta+1)...(theta+2j-2)
    fact = 2.0
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / fact * rising * K ** (-theta - 2 * j + 1)
        rising *= (theta + 2 * j - 1) * (theta + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail


def _as_partition(pi, n: int) -> list:
    idx = list(pi.indices) if isinstance(pi, Partition) else [int(i) for i in pi]
    if len(idx) < 2 or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 0 or idx[-1] >= n:
        raise ParameterError("partition must be a strictly increasing list of at least two grid indices")
    return idx


def riemann_sum(A: TwoParamField, pi, interval=None):
    """``sum_j A(pi_j, pi_{j+1})``; when ``interval`` is given the partition must span it."""
    idx = _as_partition(pi, A.n)
    if interval is not None and (idx[0], idx[-1]) != tuple(int(x) for x in interval):
        raise ParameterError(f"partition {idx[0]}..{idx[-1]} does not span interval {tuple(interval)}")
    return sum(np.asarray(A[i, j], dtype=float) for i, j in zip(idx, idx[1:]))


def _flat(A: TwoParamField) -> np.ndarray:
    d = A.dense()
    return np.ascontiguousarray(d.reshape(A.n, A.n, -1))


@njit(cache=True)
def _triple_dp(D, r, a, b):
    # best[j, k]: largest sum over chains a = pi_1 < ... < pi_m = j < k
    m = b - a + 1
    best = np.full((m, m), -1.0)
    for k in range(1, m):
        best[0, k] = 0.0
    w = D.shape[2]
    for j in range(1, m):
        for k in range(j + 1, m):
            top = -1.0
            for i in range(j):
                prev = best[i, j]
                if prev < 0.0:
                    continue
                acc = 0.0
                for c in range(w):
                    e = D[a + i, a + k, c] - D[a + i, a + j, c] - D[a + j, a + k, c]
                    acc += e * e
                v = prev + acc ** (0.5 * r)
                if v > top:
                    top = v
            best[j, k] = top
    out = 0.0
    for j in range(m - 1):
        if best[j, m - 1] > out:
            out = best[j, m - 1]
    return out


def delta_variation(A: TwoParamField, r: float, interval=None) -> float:
    """``sup_pi (sum_j |dA(pi_j, pi_{j+1}, pi_{j+2})|^r)^(1/r)`` over partitions pinned to ``interval``.

    Any ``r > 0`` is allowed.  Consecutive-triple dynamic programme, O(m^3).
    """
    if not r > 0:
        raise ParameterError(f"r must be positive (got {r})")
    a, b = (0, A.n - 1) if interval is None else (int(interval[0]), int(interval[1]))
    if not 0 <= a <= b < A.n:
        raise ParameterError(f"interval {interval} outside grid")
    if b - a < 2:
        return 0.0
    return float(_triple_dp(_flat(A), float(r), a, b)) ** (1.0 / r)


def delta_variation_bruteforce(A: TwoParamField, r: float, interval=None, max_points: int = 14) -> float:
    """Exhaustive oracle for :func:`delta_variation` on short intervals."""
    a, b = (0, A.n - 1) if interval is None else (int(interval[0]), int(interval[1]))
    inner = list(range(a + 1, b))
    if len(inner) + 2 > max_points:
        raise ParameterError(f"brute force refuses {len(inner) + 2} points")
    D = _flat(A)
    best = 0.0
    for mask in range(1 << len(inner)):
        pts = [a] + [p for bit, p in enumerate(inner) if mask >> bit & 1] + [b]
        s = 0.0
        for i, j, k in zip(pts, pts[1:], pts[2:]):
            s += float(np.linalg.norm(D[i, k] - D[i, j] - D[j, k])) ** r
        best = max(best, s)
    return best ** (1.0 / r)


def sewing_certificate(A: TwoParamField, p: float, r: float, interval=None) -> float:
    """``zeta(p/r)^(1/p) V^r(dA)``: bounds ``|I^pi A - A|`` on ``interval`` for every partition."""
    _check_pr(p, r)
    return zeta(p / r) ** (1.0 / p) * delta_variation(A, r, interval)


def _check_pr(p: float, r: float) -> None:
    if not 0 < p <= 1:
        raise ParameterError(f"p must lie in (0, 1] (got {p})")
    if not 0 < r < p:
        raise ParameterError(f"sewing needs 0 < r < p (got r={r}, p={p})")


def _level_sums(D: np.ndarray, stride: int) -> np.ndarray:
    """Riemann sums for every pair over ``{s, t} U (stride Z cap (s, t))``."""
    n = D.shape[0]
    marks = np.arange(0, n, stride)
    chain = np.zeros((marks.size,) + D.shape[2:])
    if marks.size > 1:
        chain[1:] = np.cumsum(D[marks[:-1], marks[1:]], axis=0)
    idx = np.arange(n)
    # first mark strictly after s, last mark strictly before t
    after = (idx // stride) + 1
    before = (idx - 1) // stride
    out = np.zeros_like(D)
    for s in range(n - 1):
        t = idx[s + 1 :]
        ka = after[s]
        kb = before[s + 1 :]
        has = kb >= ka
        row = D[s, s + 1 :].copy()
        if np.any(has):
            th = t[has]
            ma, mb = ka * stride, kb[has] * stride
            row[has] = D[s, ma] + (chain[kb[has]] - chain[ka]) + D[mb, th]
        out[s, s + 1 :] = row
    return out


@dataclass
class SewingReport:
    sewn: TwoParamField
    refinement_levels_used: int
    final_delta: float
    bound_certificate: float
    converged: bool = True
    deltas: list = field(default_factory=list)

    def to_dict(self) -> dict:
        from .io import field_to_dict

        return {
            "sewn": field_to_dict(self.sewn),
            "refinement_levels_used": self.refinement_levels_used,
            "final_delta": self.final_delta,
            "bound_certificate": self.bound_certificate,
            "converged": self.converged,
            "deltas": list(self.deltas),
        }


def sew(A: TwoParamField, p: float = 1.0, r: float = 0.5, tol: float = 1e-8, certificate: bool = True) -> SewingReport:
    """Sew a germ along nested dyadic refinements of the grid.

    Level ``l`` uses the grid points whose index is a multiple of
    ``2^(top - l)`` together with the pair endpoints, where ``2^top`` is the
    first power of two not below the cell count; the last level is the full
    grid.  Refinement stops once two successive levels agree to ``tol`` in
    norm on every pair.  If that never happens the full-grid sum is returned
    (it is the grid-exact sewing) and ``converged`` is False.
    """
    _check_pr(p, r)
    D = _flat(A)
    n = A.n
    top = max(0, math.ceil(math.log2(n - 1))) if n > 1 else 0
    prev = _level_sums(D, 1 << top)
    deltas = []
    level = 0
    converged = False
    while level < top:
        level += 1
        cur = _level_sums(D, 1 << (top - level))
        deltas.append(float(np.linalg.norm(cur - prev, axis=-1).max()))
        prev = cur
        if deltas[-1] < tol:
            converged = True
            break
    if top == 0:
        converged = True
    final = deltas[-1] if deltas else 0.0
    if level == top and not converged:
        converged = final < tol
    sewn = TwoParamField(A.grid, prev.reshape((n, n) + A.value_shape))
    cert = sewing_certificate(A, p, r) if certificate else float("nan")
    return SewingReport(sewn, level, final, cert, converged, deltas)


@dataclass(frozen=True)
class ThetaTerm:
    omega1: Control
    omega2: Control
    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class ThetaDecomposition:
    """``|dA(s,u,t)| <= sum_n omega1_n(s,u)^alpha1_n omega2_n(u,t)^alpha2_n`` with ``alpha1 + alpha2 >= theta``."""

    terms: tuple
    theta: float

    def __post_init__(self):
        if not self.theta > 1:
            raise ParameterError(f"theta must exceed 1 (got {self.theta})")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.alpha1 < 0 or t.alpha2 < 0 or t.alpha1 + t.alpha2 < self.theta * (1 - 1e-12):
                raise ParameterError(f"exponents ({t.alpha1}, {t.alpha2}) must be nonnegative and sum to >= theta")

    def rhs(self, i: int, u: int, j: int) -> float:
        return sum(t.omega1(i, u) ** t.alpha1 * t.omega2(u, j) ** t.alpha2 for t in self.terms)

    def check(self, A: TwoParamField, rtol: float = 1e-9) -> float:
        """Largest observed ``|dA| - rhs`` over all grid triples (<= 0 means valid)."""
        D = _flat(A)
        n = A.n
        worst = -math.inf
        for i in range(n):
            for u in range(i, n):
                j = np.arange(u, n)
                e = np.linalg.norm(D[i, j] - D[i, u] - D[u, j], axis=-1)
                rhs = np.zeros(j.size)
                for t in self.terms:
                    w2 = t.omega2.field.dense()[u, j]
                    rhs += t.omega1(i, u) ** t.alpha1 * w2**t.alpha2
                worst = max(worst, float(np.max(e - rhs * (1 + rtol))))
        return worst


def control_bound(decomp: ThetaDecomposition, interval=None) -> float:
    """``zeta(theta) (sum_n omega1_n(s, t-)^(a1/theta) omega2_n(s+, t)^(a2/theta))^theta``.

    The one-sided values use the grid point next to the open endpoint.
    """
    if not decomp.terms:
        return 0.0
    n = decomp.terms[0].omega1.field.n
    a, b = (0, n - 1) if interval is None else (int(interval[0]), int(interval[1]))
    if b - a < 1:
        return 0.0
    th = decomp.theta
    s = sum(t.omega1(a, b - 1) ** (t.alpha1 / th) * t.omega2(a + 1, b) ** (t.alpha2 / th) for t in decomp.terms)
    return zeta(th) * s**th

"""Graded metric groups ``X1 x X2`` with product ``(a, r)*(b, s) = (a+b, r+s+B(a, b))``.

When the bilinear pairing satisfies ``||B|| <= 2`` for the chosen norms, the
homogeneous functional ``max(||a||, ||r||^(1/2))`` is subadditive and its
symmetrisation gives a left-invariant metric.  Three instances are provided:

* ``G1``: the level-2 rough-path group, increments ``(dX, XX)``;
* ``G2``: differences of two rough paths, increments ``(dX, dX~, dDX, DXX)``;
* ``G3``: differences of controlled paths, increments
  ``((dY~', dDY', dX, dDX), DR)``.

Elements store ``a`` and ``r`` as flat vectors; pairings know how to split and
weight them.  Every operation broadcasts over leading batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, GridPath, TwoParamField
from .errors import ConsistencyError, ParameterError

SCALE_FLOOR = 1e-300


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


@dataclass(frozen=True, eq=False)
class Pairing:
    """Bilinear map ``B: X1 x X1 -> X2`` together with weighted norms.

    ``blocks`` lists the X1 components as ``(size, divisor, matrix_shape)``
    where ``matrix_shape`` is ``None`` for vectors; the X1 norm is the max over
    blocks of ``|component| / divisor``.  The X2 norm is ``weight * |r|``.
    """

    name: str
    blocks: tuple
    x2_size: int
    x2_weight: float
    bilinear: object = field(repr=False)
    x2_shape: tuple = ()
    # closed-form operator norm bound of B for the chosen weights
    bound: float = 2.0

    @property
    def x1_size(self) -> int:
        return sum(b[0] for b in self.blocks)

    def split(self, a: np.ndarray) -> list:
        out, k = [], 0
        for size, _, shape in self.blocks:
            comp = a[..., k : k + size]
            out.append(comp if shape is None else comp.reshape(comp.shape[:-1] + shape))
            k += size
        return out

    def x1_norm(self, a: np.ndarray) -> np.ndarray:
        vals, k = [], 0
        for size, div, _ in self.blocks:
            vals.append(_norm(a[..., k : k + size]) / div)
            k += size
        return np.max(np.stack(vals, axis=0), axis=0)

    def x2_norm(self, r: np.ndarray) -> np.ndarray:
        return self.x2_weight * _norm(r)

    def B(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.bilinear(self, a, b)

    def operator_norm_sample(self, samples: int = 2000, seed: int = 0) -> float:
        """Largest observed ``||B(a, b)|| / (||a|| ||b||)`` on random pairs."""
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((samples, self.x1_size))
        b = rng.standard_normal((samples, self.x1_size))
        return float(np.max(self.x2_norm(self.B(a, b)) / (self.x1_norm(a) * self.x1_norm(b))))


class GroupElement:
    """``(a, r)`` in the group defined by ``pairing``; arrays may carry batch axes."""

    __slots__ = ("a", "r", "pairing")

    def __init__(self, a, r, pairing: Pairing):
        a = np.asarray(a, dtype=float)
        r = np.asarray(r, dtype=float)
        if a.shape[-1] != pairing.x1_size or r.shape[-1] != pairing.x2_size:
            raise ParameterError(f"element sizes {a.shape[-1]}, {r.shape[-1]} do not fit pairing {pairing.name}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(r))):
            raise ParameterError("group element entries must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "pairing", pairing)

    def __setattr__(self, key, value):
        raise AttributeError("GroupElement is immutable")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return gmul(self, other)

    def __repr__(self) -> str:
        return f"GroupElement({self.pairing.name}, a={self.a!r}, r={self.r!r})"


def identity(pairing: Pairing) -> GroupElement:
    return GroupElement(np.zeros(pairing.x1_size), np.zeros(pairing.x2_size), pairing)


def _same(w: GroupElement, v: GroupElement) -> None:
    if w.pairing is not v.pairing:
        raise TypeError(f"cannot combine elements of {w.pairing.name} and {v.pairing.name}")


def gmul(w: GroupElement, v: GroupElement) -> GroupElement:
    _same(w, v)
    return GroupElement(w.a + v.a, w.r + v.r + w.pairing.B(w.a, v.a), w.pairing)


def ginv(w: GroupElement) -> GroupElement:
    return GroupElement(-w.a, -w.r + w.pairing.B(w.a, w.a), w.pairing)


def gnorm(w: GroupElement, mode: str = "plain"):
    """Homogeneous norm ``max(||a||, ||r||^(1/2))`` or its symmetrisation."""
    plain = np.maximum(w.pairing.x1_norm(w.a), np.sqrt(w.pairing.x2_norm(w.r)))
    if mode == "plain":
        return plain
    if mode == "sym":
        return np.maximum(plain, gnorm(ginv(w), "plain"))
    raise ParameterError(f"unknown norm mode {mode!r}")


def gdist(w: GroupElement, v: GroupElement, convention: str = "left"):
    """Metric induced by the symmetrised norm.

    ``convention="left"`` evaluates ``||w^-1 * v||_sym``, which is invariant
    under left translation and makes ``d(g_s, g_t) = ||g_{s,t}||_sym`` for group
    increments ``g_{s,t} = g_s^-1 * g_t``.  ``convention="right"`` evaluates
    ``||w * v^-1||_sym``, invariant under right translation.
    """
    if convention == "left":
        return gnorm(gmul(ginv(w), v), "sym")
    if convention == "right":
        return gnorm(gmul(w, ginv(v)), "sym")
    raise ParameterError(f"unknown convention {convention!r}")


# ---------------------------------------------------------------------------
# instances


def _outer(x, y):
    o = x[..., :, None] * y[..., None, :]
    return o.reshape(o.shape[:-2] + (-1,))


def _b_g1(P, a, b):
    return _outer(a, b)


def _b_g2(P, a, b):
    d = P.blocks[0][0]
    xt, xb = a[..., d : 2 * d], a[..., 2 * d :]
    y, yb = b[..., :d], b[..., 2 * d :]
    return _outer(xb, y) + _outer(xt, yb)


def _b_g3(P, a, b):
    A, Bm, _, _ = P.split(a)
    _, _, c2, d2 = P.split(b)
    return np.einsum("...ij,...j->...i", Bm, c2) + np.einsum("...ij,...j->...i", A, d2)


def _floor(x: float) -> float:
    if not x >= 0:
        raise ParameterError("scale constants must be positive")
    return max(float(x), SCALE_FLOOR)


def G1(d: int) -> Pairing:
    """Rough-path group over R^d with norms ``|x|`` and ``2|XX|``."""
    return Pairing("G1", ((d, 1.0, None),), d * d, 2.0, _b_g1, (d, d))


def G2(d: int, N: float = 1.0, N_delta: float = 1.0) -> Pairing:
    """Group for the difference of two rough paths over R^d."""
    N, Nd = _floor(N), _floor(N_delta)
    return Pairing("G2", ((d, N, None), (d, N, None), (d, Nd, None)), d * d, 1.0 / (N * Nd), _b_g2, (d, d))


@dataclass(frozen=True)
class ScaleConstants:
    """Norm divisors; ``N_r = N_a N_d + N_b N_c`` is derived."""

    N: float = 1.0
    N_delta: float = 1.0
    N_a: float = 1.0
    N_b: float = 1.0
    N_c: float = 1.0
    N_d: float = 1.0

    def __post_init__(self):
        for k in ("N", "N_delta", "N_a", "N_b", "N_c", "N_d"):
            object.__setattr__(self, k, _floor(getattr(self, k)))

    @property
    def N_r(self) -> float:
        return self.N_a * self.N_d + self.N_b * self.N_c


def G3(d_out: int, d_in: int, scales: ScaleConstants = ScaleConstants()) -> Pairing:
    """Group for differences of controlled paths ``Y in R^d_out`` over ``X in R^d_in``."""
    m = d_out * d_in
    s = scales
    blocks = ((m, s.N_a, (d_out, d_in)), (m, s.N_b, (d_out, d_in)), (d_in, s.N_c, None), (d_in, s.N_d, None))
    # |b c~| + |a d~| <= (N_b N_c + N_a N_d) ||.|| ||.|| = N_r ||.|| ||.||
    return Pairing("G3", blocks, d_out, 1.0 / s.N_r, _b_g3, (d_out,), 1.0)


# ---------------------------------------------------------------------------
# increment paths


@dataclass(frozen=True)
class GroupIncrements:
    """Group-valued increments ``g_{s,t} = (a(s,t), r(s,t))`` on a grid.

    ``a`` is additive (built from paths), ``r`` is the second-level field.
    ``path`` holds ``g_t = g_{0,t}``, ``distance`` the field ``d(g_s, g_t)``
    and ``residual`` the worst ``|g_{s,u} * g_{u,t} - g_{s,t}|`` found.
    """

    pairing: Pairing
    a_path: GridPath
    r_field: TwoParamField
    distance: TwoParamField
    residual: float

    def element(self, i: int, j: int) -> GroupElement:
        a = self.a_path.values[j] - self.a_path.values[i]
        return GroupElement(a.ravel(), np.ravel(self.r_field[i, j]), self.pairing)

    @property
    def path(self) -> list:
        return [self.element(0, j) for j in range(self.a_path.n)]


def _increment_residual(pairing: Pairing, a_vals: np.ndarray, r_field: TwoParamField, exhaustive_max: int, samples: int, seed: int) -> float:
    n = a_vals.shape[0]
    R = r_field.dense().reshape(n, n, -1)
    scale = max(1.0, float(np.abs(R).max()), float(np.abs(a_vals).max()) ** 2)
    worst = 0.0
    if n <= exhaustive_max:
        for u in range(n):
            left = a_vals[u] - a_vals[: u + 1]  # a(s,u), s <= u
            right = a_vals[u:] - a_vals[u]  # a(u,t), t >= u
            Bst = pairing.B(left[:, None, :], right[None, :, :])
            res = R[: u + 1, u:] - R[: u + 1, u][:, None, :] - R[u, u:][None, :, :] - Bst
            worst = max(worst, float(np.abs(res).max()))
    else:
        rng = np.random.default_rng(seed)
        s, u, t = np.sort(rng.integers(0, n, size=(samples, 3)), axis=1).T
        res = R[s, t] - R[s, u] - R[u, t] - pairing.B(a_vals[u] - a_vals[s], a_vals[t] - a_vals[u])
        worst = float(np.abs(res).max())
    return worst / scale


def _assemble(pairing, grid, a_vals, r_field, tol, exhaustive_max, samples, seed) -> GroupIncrements:
    res = _increment_residual(pairing, a_vals, r_field, exhaustive_max, samples, seed)
    if res > tol:
        raise ConsistencyError(f"{pairing.name} increment property fails: relative residual {res:.3e}")
    n = grid.n
    R = r_field.dense().reshape(n, n, -1)
    dist = np.zeros((n, n))
    for i in range(n):
        a = a_vals[i:] - a_vals[i]
        dist[i, i:] = gnorm(GroupElement(a, R[i, i:], pairing), "sym")
    return GroupIncrements(pairing, GridPath(grid, a_vals), r_field, TwoParamField(grid, dist), res)


def increment_path(kind: str, *data, scales: ScaleConstants = ScaleConstants(), tol: float = DEFAULT_TOL,
                   exhaustive_max: int = 96, samples: int = 20000, seed: int = 0) -> GroupIncrements:
    """Build the group-increment representation and audit the product rule.

    * ``increment_path("G1", P)`` for a rough path ``P``;
    * ``increment_path("G2", P, P_tilde)``;
    * ``increment_path("G3", Y, Y_tilde)`` for controlled paths over ``P`` and ``P_tilde``.
    """
    if kind == "G1":
        (P,) = data
        X = P.X.values
        pairing = G1(X.shape[1])
        r = TwoParamField(P.grid, P.XX.dense().reshape(P.n, P.n, -1))
        return _assemble(pairing, P.grid, X, r, tol, exhaustive_max, samples, seed)
    if kind == "G2":
        P, Pt = data
        X, Xt = P.X.values, Pt.X.values
        pairing = G2(X.shape[1], scales.N, scales.N_delta)
        a = np.concatenate([X, Xt, X - Xt], axis=1)
        r = TwoParamField(P.grid, (P.XX.dense() - Pt.XX.dense()).reshape(P.n, P.n, -1))
        return _assemble(pairing, P.grid, a, r, tol, exhaustive_max, samples, seed)
    if kind == "G3":
        Y, Yt = data
        n = Y.n
        dy, dx = Y.Yp.values.shape[1:]
        pairing = G3(dy, dx, scales)
        a = np.concatenate(
            [
                Yt.Yp.values.reshape(n, -1),
                (Y.Yp.values - Yt.Yp.values).reshape(n, -1),
                Y.X.X.values,
                Y.X.X.values - Yt.X.X.values,
            ],
            axis=1,
        )
        r = Y.remainder() - Yt.remainder()
        return _assemble(pairing, Y.grid, a, r, tol, exhaustive_max, samples, seed)
    raise ParameterError(f"unknown group kind {kind!r}")


def random_element(pairing: Pairing, rng: np.random.Generator, size=None, scale: float = 1.0) -> GroupElement:
    shape = () if size is None else (size,)
    return GroupElement(scale * rng.standard_normal(shape + (pairing.x1_size,)),
                        scale * rng.standard_normal(shape + (pairing.x2_size,)), pairing)


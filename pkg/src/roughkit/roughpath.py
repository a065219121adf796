"""Level-2 rough paths, canonical lifts, Chen audits and controlled paths."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .besov import BesovParams, besov_norm, besov_norm_path
from .core import DEFAULT_TOL, GridPath, TimeGrid, TwoParamField
from .errors import ConsistencyError, ParameterError
from .variation import var_field

LIFT_RULES = ("left_point", "linear")
EXACT_CHEN_MAX = 512


class RoughPath:
    """``(X, XX)`` with ``XX`` a field of ``d x d`` tensors obeying Chen's identity."""

    def __init__(self, X: GridPath, XX: TwoParamField, check: bool = True, tol: float = DEFAULT_TOL):
        if X.values.ndim != 2:
            raise ParameterError("rough path values must be vectors")
        d = X.values.shape[1]
        if XX.value_shape != (d, d):
            raise ParameterError(f"second level must hold {d}x{d} tensors, got {XX.value_shape}")
        if XX.grid != X.grid:
            raise ParameterError("X and XX live on different grids")
        self.X = X
        self.XX = XX
        if check:
            rep = chen_defect_report(self)
            scale = max(1.0, float(np.abs(X.values - X.values[0]).max()) ** 2)
            if rep["value"] > tol * scale:
                raise ConsistencyError(f"Chen defect {rep['value']:.3e} exceeds tolerance ({rep['method']})")

    @property
    def grid(self) -> TimeGrid:
        return self.X.grid

    @property
    def n(self) -> int:
        return self.X.n

    @property
    def dim(self) -> int:
        return self.X.values.shape[1]

    def __repr__(self) -> str:
        return f"RoughPath(n={self.n}, dim={self.dim})"

    def scaled(self, lam: float) -> "RoughPath":
        """Dilation ``(lam X, lam^2 XX)``."""
        return RoughPath(self.X.scaled(lam), self.XX.scaled(lam * lam), check=False)

    def sub(self, a: int, b: int) -> "RoughPath":
        return RoughPath(self.X.sub(a, b), self.XX.sub(a, b), check=False)

    def increments(self) -> TwoParamField:
        return self.X.increments()


def _lift_row_factory(vals: np.ndarray, rule: str):
    inc = np.diff(vals, axis=0)
    cell = 0.5 * np.einsum("ki,kj->kij", inc, inc) if rule == "linear" else None
    n, d = vals.shape

    def row(i):
        out = np.zeros((n, d, d))
        if i < n - 1:
            terms = np.einsum("ki,kj->kij", vals[i:-1] - vals[i], inc[i:])
            if cell is not None:
                terms += cell[i:]
            # XX(i, j+1) = XX(i, j) + X(i, j) (x) dX_j (+ cell term)
            np.cumsum(terms, axis=0, out=out[i + 1 :])
        return out

    return row


def canonical_lift(X: GridPath, rule: str = "left_point", dense: bool | None = None) -> RoughPath:
    """Iterated-sum lift of a grid path.

    ``left_point`` gives ``XX(t_i, t_j) = sum_{i<=k<j} X(t_i, t_k) (x) dX_k``;
    ``linear`` adds ``dX_k (x) dX_k / 2`` per cell (the lift of the piecewise
    linear interpolant).  Both satisfy Chen's identity exactly in exact
    arithmetic.  Large lifts are kept row backed unless ``dense=True``.
    """
    if rule not in LIFT_RULES:
        raise ParameterError(f"unknown lift rule {rule!r}; choose from {LIFT_RULES}")
    if X.values.ndim != 2:
        raise ParameterError("lift needs vector-valued paths")
    d = X.values.shape[1]
    XX = TwoParamField.from_rows(X.grid, (d, d), _lift_row_factory(np.asarray(X.values), rule), dense=dense)
    return RoughPath(X, XX, check=False)


def pure_area(grid: TimeGrid, area) -> RoughPath:
    """``X = 0`` and ``XX(s, t) = area * (t - s)`` for an antisymmetric matrix ``area``."""
    a = np.asarray(area, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("area must be a square matrix")
    if np.max(np.abs(a + a.T)) > 1e-12 * max(1.0, np.abs(a).max()):
        raise ParameterError("area must be antisymmetric")
    d = a.shape[0]
    t = grid.times
    dt = np.triu(t[None, :] - t[:, None])
    XX = TwoParamField(grid, dt[:, :, None, None] * a[None, None])
    return RoughPath(GridPath(grid, np.zeros((grid.n, d))), XX, check=False)


@njit(cache=True)
def _chen_exact(XX, X):
    n = X.shape[0]
    d = X.shape[1]
    worst = 0.0
    for s in range(n):
        for u in range(s, n):
            for t in range(u, n):
                acc = 0.0
                for i in range(d):
                    xsu = X[u, i] - X[s, i]
                    for j in range(d):
                        e = XX[s, t, i, j] - XX[s, u, i, j] - XX[u, t, i, j] - xsu * (X[t, j] - X[u, j])
                        acc += e * e
                if acc > worst:
                    worst = acc
    return np.sqrt(worst)


def chen_defect_report(P: RoughPath, exact: bool | None = None) -> dict:
    """Chen defect ``max |XX(s,t) - XX(s,u) - XX(u,t) - X(s,u) (x) X(u,t)|`` over triples.

    Up to ``EXACT_CHEN_MAX`` points every triple is visited.  Beyond that the
    reported value is a certified upper bound: with ``E(s,u,t)`` the defect and
    ``M = max_{s,t} |E(0,s,t)|`` one has ``E(s,u,t) = D(s,t) - D(s,u) - D(u,t)``
    for ``D(s,t) = -E(0,s,t)``, so ``M <= max |E| <= 3 M``.  This needs one
    pass over the rows.
    """
    n = P.n
    if exact is None:
        exact = n <= EXACT_CHEN_MAX
    X = np.ascontiguousarray(P.X.values)
    if exact:
        val = float(_chen_exact(np.ascontiguousarray(P.XX.dense()), X))
        return {"value": val, "lower": val, "method": "exhaustive"}
    row0 = P.XX.row(0)
    M = 0.0
    for s in range(n):
        rs = P.XX.row(s)
        x0s = X[s] - X[0]
        xst = X[s:] - X[s]
        E = row0[s:] - row0[s] - rs[s:] - x0s[None, :, None] * xst[:, None, :]
        M = max(M, float(np.sqrt((E**2).sum(axis=(1, 2))).max()))
    return {"value": 3.0 * M, "lower": M, "method": "certified_bound"}


def chen_defect(P: RoughPath, exact: bool | None = None) -> float:
    return chen_defect_report(P, exact)["value"]


def roughpath_besov_norm(P: RoughPath, params, evaluator: str = "dyadic") -> float:
    """``||X||_{alpha,p,q} + ||XX||_{2 alpha, p/2, q/2}^(1/2)``."""
    prm = params if isinstance(params, BesovParams) else BesovParams(*params)
    first = besov_norm_path(P.X, prm, evaluator=evaluator)
    second = besov_norm(P.XX.norms(), prm.scaled(2), evaluator=evaluator)
    return first + np.sqrt(second)


class ControlledPath:
    """``(Y, Y')`` controlled by a rough path; ``Y'`` holds ``d_out x d_in`` matrices."""

    def __init__(self, Y: GridPath, Yp: GridPath, X: RoughPath):
        if Y.grid != X.grid or Yp.grid != X.grid:
            raise ParameterError("Y, Y' and X must share a grid")
        if Y.values.ndim != 2:
            raise ParameterError("Y must be vector valued")
        d_out = Y.values.shape[1]
        if Yp.values.shape[1:] != (d_out, X.dim):
            raise TypeError(f"Y' must hold {d_out}x{X.dim} matrices, got {Yp.values.shape[1:]}")
        self.Y = Y
        self.Yp = Yp
        self.X = X

    @property
    def grid(self) -> TimeGrid:
        return self.X.grid

    @property
    def n(self) -> int:
        return self.X.n

    def __repr__(self) -> str:
        return f"ControlledPath(n={self.n}, d_out={self.Y.values.shape[1]}, d_in={self.X.dim})"

    @cached_property
    def _remainder(self) -> TwoParamField:
        Y = self.Y.values
        Yp = self.Yp.values
        Xv = self.X.X.values
        n = self.n
        out = np.zeros((n, n, Y.shape[1]))
        for s in range(n):
            out[s, s:] = (Y[s:] - Y[s]) - (Xv[s:] - Xv[s]) @ Yp[s].T
        return TwoParamField(self.grid, out)

    def remainder(self) -> TwoParamField:
        """``R(s, t) = Y(s, t) - Y'(s) X(s, t)``."""
        return self._remainder


def remainder(Y: ControlledPath) -> TwoParamField:
    return Y.remainder()


@dataclass(frozen=True)
class ControlledDifference:
    """Differences of two controlled paths over two rough paths (``D = first - second``)."""

    dY: GridPath
    dYp: GridPath
    dR: TwoParamField
    dX: GridPath
    dXX: TwoParamField


def differences(Y: ControlledPath, Yt: ControlledPath) -> ControlledDifference:
    if Y.grid != Yt.grid:
        raise ParameterError("controlled paths live on different grids")
    if Y.Yp.values.shape != Yt.Yp.values.shape:
        raise TypeError("controlled paths have different dimensions")
    return ControlledDifference(
        Y.Y - Yt.Y,
        Y.Yp - Yt.Yp,
        Y.remainder() - Yt.remainder(),
        Y.X.X - Yt.X.X,
        Y.X.XX - Yt.X.XX,
    )


def _all_intervals(a: TwoParamField, b: TwoParamField, rtol: float) -> dict:
    A, B = a.dense(), b.dense()
    iu = np.triu_indices(a.n, 1)
    lhs, rhs = A[iu], B[iu]
    slack = lhs - rhs * (1 + rtol) - 1e-14
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    return {"violations": int(np.sum(slack > 0)), "max_ratio": float(ratio.max()), "intervals": int(lhs.size)}


def implicit_bound_check(Y: ControlledPath, r: float, rtol: float = 1e-9) -> dict:
    """Check ``V^r Y_I <= ||Y'||_sup V^r X_I + V^{r/2} R_I`` on every grid interval."""
    vy = var_field(Y.Y, r)
    vx = var_field(Y.X.X, r)
    vr = var_field(Y.remainder(), r / 2)
    rhs = vx.scaled(Y.Yp.sup_norm()) + vr
    return _all_intervals(vy, rhs, rtol)


def stability_bound_check(Y: ControlledPath, Yt: ControlledPath, r: float, rtol: float = 1e-9) -> dict:
    """Check ``V^r DY <= ||DY'|| V^r X + ||Y~'|| V^r DX + V^{r/2} DR`` on every interval."""
    D = differences(Y, Yt)
    lhs = var_field(D.dY, r)
    rhs = (var_field(Y.X.X, r).scaled(D.dYp.sup_norm()) + var_field(D.dX, r).scaled(Yt.Yp.sup_norm())
           + var_field(D.dR, r / 2))
    return _all_intervals(lhs, rhs, rtol)

"""Rough differential equations ``dY = phi(Y) dX`` driven by level-2 rough paths.

Integrands are controlled paths whose values are linear maps ``R^n -> R^m``,
stored flattened as vectors of length ``m * n`` (row-major, index
``i * n + j``) with Gubinelli derivatives of shape ``(m * n, n)``.  The
rough integral on a grid is the sum of the germ
``Xi(s, t) = Y_s X(s, t) + Y'_s XX(s, t)`` over grid cells, so the fixed point
of the Picard map is the Davie scheme; the module's job is to run the
iteration inside the solution space and certify every bound along the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridPath, TwoParamField, superadditivity_violation
from .errors import DiagnosticError, GridTooCoarseError, HorizonTooLongError, ParameterError
from .functions import SmoothFunction21
from .roughpath import ControlledPath, RoughPath
from .sewing import zeta
from .variation import var_field, var_value

CHECK_MODES = ("all", "final", "none")
# successive distances below this are round-off and carry no contraction evidence
CONTRACTION_NOISE = 1e-10
RTOL = 1e-9


@dataclass(frozen=True)
class RdeConfig:
    r: float = 2.2
    alpha: float = 1.0
    c: float = 9.0
    kappa: float = 0.5
    tol: float = 1e-11
    max_iter: int = 200
    max_window: int = 512
    check: str = "all"
    windows: bool = True

    def __post_init__(self):
        if not 2 <= self.r < 3:
            raise ParameterError(f"rough equations need r in [2, 3) (got {self.r})")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1] (got {self.alpha})")
        if not self.r < 2 + self.alpha:
            raise ParameterError(f"need r < 2 + alpha (got r={self.r}, alpha={self.alpha})")
        if not self.c > 2:
            raise ParameterError(f"solution-space constant c must exceed 2 (got {self.c})")
        if not 0 < self.kappa < 1:
            raise ParameterError("contraction target kappa must lie in (0, 1)")
        if self.check not in CHECK_MODES:
            raise ParameterError(f"check must be one of {CHECK_MODES}")
        if self.max_window < 3:
            raise ParameterError("max_window must be at least 3")

    @property
    def theta(self) -> float:
        return (2 + self.alpha) / self.r

    @property
    def csew(self) -> float:
        """``2^{2 theta - 2} zeta(theta)``: the constant of the variation form of the integral bound."""
        return 2.0 ** (2 * self.theta - 2) * zeta(self.theta)

    @property
    def csew_integral(self) -> float:
        """``2^{theta - 1} zeta(theta)``: the pointwise integral bound."""
        return 2.0 ** (self.theta - 1) * zeta(self.theta)

    @property
    def c_stability(self) -> float:
        """``zeta(3/r) 4^{3/r - 1}`` of the stability estimates with ``V^r`` derivatives."""
        t = 3.0 / self.r
        return zeta(t) * 4.0 ** (t - 1)


@dataclass(frozen=True)
class RdeBounds:
    """Declared bounds of ``phi`` at Hoelder exponent ``alpha``."""

    Phi0: float
    Phi01: float
    Phi1: float
    Phi11: float
    Phi2: float
    Phi21: float
    PhiDD: float
    Phi_alpha: float
    Phi1_alpha: float

    @classmethod
    def of(cls, phi: SmoothFunction21, alpha: float) -> "RdeBounds":
        h = phi.holder_bounds(alpha)
        return cls(phi.Phi0, phi.Phi01, phi.Phi1, phi.Phi11, phi.Phi2, phi.Phi21, phi.PhiDD,
                   h["Phi_alpha"], h["Phi1_alpha"])


def _smooth(phi) -> SmoothFunction21:
    if not isinstance(phi, SmoothFunction21):
        raise ParameterError(f"rough equations need a SmoothFunction21, got {type(phi).__name__}")
    if phi.d_out != phi.d:
        raise ParameterError("phi must map R^d to d x n matrices")
    return phi


# ---------------------------------------------------------------------------
# constants


def omega_value(b: RdeBounds, vX: float, vXX: float) -> float:
    return b.Phi0 * vX + b.Phi0 * b.Phi1 * vXX


def bound_A(b: RdeBounds, cfg: RdeConfig, omega: float) -> float:
    """``A = max(1, Phi01) c omega``."""
    return max(1.0, b.Phi01) * cfg.c * omega


def contraction_constants(b: RdeBounds, cfg: RdeConfig, A: float) -> dict:
    C = 2.0 * (b.Phi1 + A * b.Phi11)
    inv = 1.0 / C if C > 0 else math.inf
    C1 = b.Phi1 + b.Phi11 * A + (b.Phi11 * A + b.Phi2 * b.Phi0 + b.Phi21 * b.Phi0 * A) * inv
    C2 = b.Phi1 + (b.Phi11 * A + b.Phi2 * A + 0.5 * b.Phi21 * A * A) * inv
    C3 = C1 + cfg.c_stability * (C1 + C2)
    return {"A": A, "C": C, "C1": C1, "C2": C2, "C3": C3}


def smallness_radius(b: RdeBounds, cfg: RdeConfig, A: float) -> float:
    """``eps = kappa / (max(1, C) (1/2 + C3))``.

    The new distance is bounded by ``max(1/2, eps C3, C eps (1/2 + C3))`` times
    the old one, so this ``eps`` guarantees contraction factor ``max(1/2, kappa)``.
    """
    k = contraction_constants(b, cfg, A)
    return cfg.kappa / (max(1.0, k["C"]) * (0.5 + k["C3"]))


def window_conditions(b: RdeBounds, cfg: RdeConfig, vX: float, vXX: float) -> dict:
    """Every smallness requirement of a window with ``V^r X = vX`` and ``V^{r/2} XX = vXX``."""
    a = cfg.alpha
    K = cfg.csew
    om = omega_value(b, vX, vXX)
    A = bound_A(b, cfg, om)
    eps = smallness_radius(b, cfg, A)
    c = cfg.c
    omega_lhs = K * (b.Phi1 / b.Phi0 * (c - 1) * om
                     + b.Phi1_alpha / (b.Phi0 * (1 + a)) * c ** (1 + a) * om ** (1 + a)
                     + (b.Phi1 * b.Phi_alpha + b.Phi1_alpha * b.Phi0) / (b.Phi0 * b.Phi1) * c**a * om**a)
    out = {
        "omega": om,
        "A": A,
        "eps": eps,
        "small_X": vX < eps,
        "small_XX": vXX < eps,
        "assumption_omega": omega_lhs <= c - 2,
        "apriori_1": K * b.Phi1_alpha * b.Phi0**a * vX**a * vX < 1.0 / (8 * 3**a),
        "apriori_2": K * b.Phi1_alpha * b.PhiDD**a * vXX**a * vX < 1.0 / (8 * (8 - 4 * a) ** a),
        "apriori_3": K * (b.Phi1 * b.Phi_alpha + b.Phi1_alpha * b.Phi0) * vXX**a <= (4 * a) ** -a * b.PhiDD ** (1 - a),
        "apriori_4": K * b.Phi1 * vX <= 0.25,
    }
    out["ok"] = all(v for k, v in out.items() if isinstance(v, bool))
    return out


@dataclass(frozen=True)
class OmegaField:
    """``omega_I = Phi0 V^r X_I + Phi0 Phi1 V^{r/2} XX_I``; ``omega^r`` is a control (Minkowski)."""

    field: TwoParamField
    r: float
    control_violation: float

    @property
    def is_control(self) -> bool:
        return self.control_violation <= 1e-9 * max(1.0, float(self.field.dense().max()) ** self.r)

    @classmethod
    def of(cls, P: RoughPath, b: RdeBounds, r: float) -> "OmegaField":
        vx = var_field(P.X, r, max_points=P.n)
        vxx = var_field(P.XX.norms(), r / 2, max_points=P.n)
        w = vx.scaled(b.Phi0) + vxx.scaled(b.Phi0 * b.Phi1)
        viol, _ = superadditivity_violation(w.power(r))
        return cls(w, r, viol)


# ---------------------------------------------------------------------------
# composition and integration


def controlled_compose(phi, Y: ControlledPath) -> ControlledPath:
    """``(phi(Y), Dphi(Y) Y')`` with values flattened to vectors."""
    yv = Y.Y.values
    N, d = yv.shape
    D = np.asarray(phi.dphi(yv), dtype=float)
    if D.shape[-1] != d:
        raise TypeError(f"phi expects inputs of dimension {D.shape[-1]}, path has {d}")
    v = np.asarray(phi.phi(yv), dtype=float).reshape(N, -1)
    D = D.reshape(N, -1, d)
    der = np.einsum("kpd,kdn->kpn", D, Y.Yp.values)
    return ControlledPath(GridPath(Y.grid, v), GridPath(Y.grid, der), Y.X)


def _split(Y: ControlledPath):
    n = Y.X.dim
    N, mn = Y.Y.values.shape
    if mn % n:
        raise TypeError(f"integrand values of length {mn} are not maps R^{n} -> R^m")
    m = mn // n
    return m, n, Y.Y.values.reshape(N, m, n), Y.Yp.values.reshape(N, m, n, n)


def xi_germ(Y: ControlledPath, P: RoughPath | None = None) -> TwoParamField:
    """``Xi(s, t) = Y_s X(s, t) + Y'_s XX(s, t)``."""
    P = P or Y.X
    m, n, Yr, Ypr = _split(Y)
    xv = P.X.values
    N = P.n

    def row(s):
        out = np.zeros((N, m))
        XX = P.XX.row(s)[s:]
        out[s:] = (xv[s:] - xv[s]) @ Yr[s].T + np.einsum("ijl,klj->ki", Ypr[s], XX)
        return out

    return TwoParamField.from_rows(P.grid, (m,), row)


def delta_xi_predicted(Y: ControlledPath, s: int, u: int, t: int) -> np.ndarray:
    """``-R(s, u) X(u, t) - Y'(s, u) XX(u, t)``, which equals ``delta Xi(s, u, t)`` exactly."""
    m, n, Yr, Ypr = _split(Y)
    R = Y.remainder()[s, u].reshape(m, n)
    X = Y.X.X.values
    dYp = Ypr[u] - Ypr[s]
    return -R @ (X[t] - X[u]) - np.einsum("ijl,lj->i", dYp, Y.X.XX[u, t])


def rough_path_as_controlled(P: RoughPath) -> ControlledPath:
    """``(X - X_0, id)``: integrating it against ``P`` gives ``XX(0, .)`` back."""
    n = P.dim
    return ControlledPath(P.X.shifted(-P.X.values[0]), GridPath(P.grid, np.broadcast_to(np.eye(n), (P.n, n, n))), P)


def identity_integrand(P: RoughPath) -> ControlledPath:
    """The constant map ``id: R^n -> R^n`` with zero derivative; its integral is ``X - X_0``."""
    n = P.dim
    return ControlledPath(GridPath(P.grid, np.broadcast_to(np.eye(n).ravel(), (P.n, n * n))),
                          GridPath(P.grid, np.zeros((P.n, n * n, n))), P)


def tensor_integrand(Y: ControlledPath) -> ControlledPath:
    """``v -> Y (x) v`` as a map ``R^n -> R^{m n}``, derivative ``Y' (x) .``."""
    n = Y.X.dim
    yv, ypv = Y.Y.values, Y.Yp.values
    N, m = yv.shape
    eye = np.eye(n)
    val = np.einsum("ki,jc->kijc", yv, eye).reshape(N, m * n * n)
    der = np.einsum("kil,jc->kijcl", ypv, eye).reshape(N, m * n * n, n)
    return ControlledPath(GridPath(Y.grid, val), GridPath(Y.grid, der), Y.X)


@dataclass
class RoughIntegral:
    Z: ControlledPath
    error: TwoParamField | None = None
    bound: TwoParamField | None = None

    def violations(self, rtol: float = RTOL) -> int:
        e, b = self.error.dense(), self.bound.dense()
        return int(np.sum(e > b * (1 + rtol) + 1e-14))


def _trim(vy: np.ndarray, vx: np.ndarray) -> np.ndarray:
    n = vy.shape[0]
    out = np.zeros((n, n))
    out[:-1, 1:] = vy[:-1, :-1] * vx[1:, 1:]
    return np.triu(out, 1)


def rough_integral(Y: ControlledPath, cfg: RdeConfig | None = None, bound: bool = False, start=None) -> RoughIntegral:
    """``Z = int Y dX`` with ``Z' = Y`` (reshaped to ``m x n``); ``Z_0 = start`` (default 0).

    With ``bound`` the local error ``|Z(s,t) - Xi(s,t)|`` and
    ``2^{theta-1} zeta(theta) (V^{r/(1+a)} R_[s,t) V^r X_(s,t] + V^{r/a} Y'_[s,t) V^{r/2} XX_(s,t])``
    are tabulated on every interval.
    """
    cfg = cfg or RdeConfig()
    P = Y.X
    m, n, Yr, Ypr = _split(Y)
    dX = np.diff(P.X.values, axis=0)
    cells = P.XX.diagonal(1)
    g = np.einsum("kij,kj->ki", Yr[:-1], dX) + np.einsum("kijl,klj->ki", Ypr[:-1], cells)
    z0 = np.zeros(m) if start is None else np.asarray(start, dtype=float).reshape(m)
    Zv = np.empty((P.n, m))
    Zv[0] = z0
    Zv[1:] = z0 + np.cumsum(g, axis=0)
    Z = ControlledPath(GridPath(P.grid, Zv), GridPath(P.grid, Yr), P)
    out = RoughIntegral(Z)
    if bound:
        a, r = cfg.alpha, cfg.r
        xi = xi_germ(Y, P).dense()
        N = P.n
        err = np.zeros((N, N))
        for s in range(N):
            err[s, s:] = np.linalg.norm(Zv[s:] - Zv[s] - xi[s, s:], axis=1)
        vR = var_field(Y.remainder(), r / (1 + a), max_points=N).dense()
        vYp = var_field(Y.Yp, r / a, max_points=N).dense()
        vX = var_field(P.X, r, max_points=N).dense()
        vXX = var_field(P.XX.norms(), r / 2, max_points=N).dense()
        out.error = TwoParamField(P.grid, err)
        out.bound = TwoParamField(P.grid, cfg.csew_integral * (_trim(vR, vX) + _trim(vYp, vXX)))
    return out


def _report(lhs: np.ndarray, rhs: np.ndarray, rtol: float = RTOL) -> dict:
    iu = np.triu_indices(lhs.shape[0], 1)
    a, b = lhs[iu], rhs[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(b > 0, a / b, np.where(a > 1e-13, math.inf, 0.0))
    return {
        "violations": int(np.sum(a > b * (1 + rtol) + 1e-13)),
        "max_ratio": float(q.max()) if q.size else 0.0,
        "intervals": int(a.size),
    }


def _merge(acc: dict, rep: dict) -> dict:
    if not acc:
        return dict(rep)
    return {
        "violations": acc["violations"] + rep["violations"],
        "max_ratio": max(acc["max_ratio"], rep["max_ratio"]),
        "intervals": acc["intervals"] + rep["intervals"],
    }


def _interval_sup(v: np.ndarray) -> np.ndarray:
    n = v.size
    out = np.zeros((n, n))
    for s in range(n):
        out[s, s:] = np.maximum.accumulate(v[s:])
    return out


def _norms(path: GridPath) -> np.ndarray:
    return np.linalg.norm(path.values.reshape(path.n, -1), axis=1)


def composition_check(phi, Y: ControlledPath, r: float, alpha: float) -> dict:
    """Both single-path composition bounds on every interval.

    ``V^{r/a}(phi(Y)') <= Phi1 V^{r/a} Y' + Phi1a V^r Y^a |Y'|_sup`` and
    ``V^{r/(1+a)} R^{phi(Y)} <= Phi1 V^{r/(1+a)} R^Y + Phi1a/(1+a) V^r Y^(1+a)``.
    """
    if isinstance(phi, SmoothFunction21):
        b = RdeBounds.of(phi, alpha)
    elif getattr(phi, "alpha", None) == alpha:
        b = phi
    else:
        raise ParameterError(f"phi carries Hoelder bounds for alpha={getattr(phi, 'alpha', None)}, not {alpha}")
    N = Y.n
    F = controlled_compose(phi, Y)
    vy = var_field(Y.Y, r, max_points=N).dense()
    sup_yp = _interval_sup(_norms(Y.Yp))
    prime = _report(var_field(F.Yp, r / alpha, max_points=N).dense(),
                    b.Phi1 * var_field(Y.Yp, r / alpha, max_points=N).dense() + b.Phi1_alpha * vy**alpha * sup_yp)
    rem = _report(var_field(F.remainder(), r / (1 + alpha), max_points=N).dense(),
                  b.Phi1 * var_field(Y.remainder(), r / (1 + alpha), max_points=N).dense()
                  + b.Phi1_alpha / (1 + alpha) * vy ** (1 + alpha))
    return {"phi_prime": prime, "remainder": rem}


def composition_stability_check(phi, Y: ControlledPath, Yt: ControlledPath, r: float) -> dict:
    """The three difference bounds of the composition (Lipschitz constants of ``phi``, ``Dphi``, ``D^2 phi``)."""
    phi = _smooth(phi)
    N = Y.n
    F, Ft = controlled_compose(phi, Y), controlled_compose(phi, Yt)
    dY = Y.Y - Yt.Y
    sup_dy = _interval_sup(_norms(dY))
    sup_dyp = _interval_sup(_norms(Y.Yp - Yt.Yp))
    sup_ytp = _interval_sup(_norms(Yt.Yp))
    V = lambda f, p: var_field(f, p, max_points=N).dense()
    vy, vyt, vdy = V(Y.Y, r), V(Yt.Y, r), V(dY, r)
    P1, P11, P2, P21 = phi.Phi1, phi.Phi11, phi.Phi2, phi.Phi21
    d_phi = _report(V(F.Y - Ft.Y, r), P1 * vdy + P11 * sup_dy * vyt)
    d_prime = _report(V(F.Yp - Ft.Yp, r),
                      P1 * V(Y.Yp - Yt.Yp, r) + P11 * vy * sup_dyp + P11 * sup_dy * V(Yt.Yp, r)
                      + P2 * vdy * sup_ytp + P21 * sup_dy * vyt * sup_ytp)
    d_rem = _report(V(F.remainder() - Ft.remainder(), r / 2),
                    P1 * V(Y.remainder() - Yt.remainder(), r / 2) + P11 * sup_dy * V(Yt.remainder(), r / 2)
                    + 0.5 * P2 * (vy + vyt) * vdy + 0.5 * P21 * sup_dy * vyt**2)
    return {"delta_phi": d_phi, "delta_phi_prime": d_prime, "delta_remainder": d_rem}


def integral_stability_check(Y: ControlledPath, Yt: ControlledPath, cfg: RdeConfig | None = None) -> dict:
    """Remainder stability of the rough integral for two integrands over two rough paths."""
    cfg = cfg or RdeConfig()
    r = cfg.r
    N = Y.n
    Z, Zt = rough_integral(Y, cfg).Z, rough_integral(Yt, cfg).Z
    V = lambda f, p: var_field(f, p, max_points=N).dense()
    P, Pt = Y.X, Yt.X
    dXX = P.XX - Pt.XX
    vXX, vdXX = V(P.XX.norms(), r / 2), V(dXX.norms(), r / 2)
    rhs = (_interval_sup(_norms(Y.Yp - Yt.Yp)) * vXX + _interval_sup(_norms(Yt.Yp)) * vdXX
           + cfg.c_stability * (V(Y.Yp - Yt.Yp, r) * vXX + V(Y.remainder() - Yt.remainder(), r / 2) * V(P.X, r)
                                + V(Yt.Yp, r) * vdXX + V(Yt.remainder(), r / 2) * V(P.X - Pt.X, r)))
    lhs = V(Z.remainder() - Zt.remainder(), r / 2)
    return _report(lhs, rhs)


# ---------------------------------------------------------------------------
# solver


@dataclass
class RdeWindowLog:
    start: int
    end: int
    conditions: dict
    constants: dict
    iterations: int = 0
    distances: list = field(default_factory=list)
    contraction_factors: list = field(default_factory=list)
    solution_space: dict = field(default_factory=dict)
    apriori: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def max_contraction(self) -> float:
        return max(self.contraction_factors, default=0.0)

    def to_dict(self) -> dict:
        def clean(d):
            return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in d.items()}

        return {
            "start": self.start,
            "end": self.end,
            "conditions": clean(self.conditions),
            "constants": dict(self.constants),
            "iterations": self.iterations,
            "distances": list(self.distances),
            "contraction_factors": list(self.contraction_factors),
            "max_contraction": self.max_contraction,
            "solution_space": {k: dict(v) for k, v in self.solution_space.items()},
            "apriori": {k: dict(v) for k, v in self.apriori.items()},
            "converged": self.converged,
        }


@dataclass
class RdeSolution:
    path: ControlledPath
    windows: list
    config: RdeConfig

    @property
    def max_contraction(self) -> float:
        return max((w.max_contraction for w in self.windows), default=0.0)

    def violations(self) -> int:
        tot = 0
        for w in self.windows:
            for rep in list(w.solution_space.values()) + list(w.apriori.values()):
                tot += rep.get("violations", 0)
        return tot

    def to_dict(self) -> dict:
        return {"max_contraction": self.max_contraction, "windows": [w.to_dict() for w in self.windows]}


class _WindowScanner:
    """Evaluates window conditions for ``[a, e]`` from fields tabulated on ``[a, a + W - 1]``."""

    def __init__(self, P: RoughPath, b: RdeBounds, cfg: RdeConfig, a: int, last: int):
        self.a = a
        self.b, self.cfg = b, cfg
        self.chiX = P.X.sub(a, last).distance_field()
        self.chiXX = P.XX.sub(a, last).norms()

    def conditions(self, e: int) -> dict:
        iv = (0, e - self.a)
        vX = var_value(self.chiX, self.cfg.r, iv)
        vXX = var_value(self.chiXX, self.cfg.r / 2, iv)
        out = window_conditions(self.b, self.cfg, vX, vXX)
        out["VrX"], out["VrXX"] = vX, vXX
        return out

    def ok(self, e: int) -> bool:
        return self.conditions(e)["ok"]


def _last_admissible(sc: _WindowScanner, lo: int, hi: int) -> int:
    """Largest ``e`` in ``[lo, hi]`` with ``sc.ok(e)``, given ``sc.ok(lo)`` and monotonicity."""
    if sc.ok(hi):
        return hi
    step = 1
    while lo + step < hi and sc.ok(lo + step):
        lo += step
        step *= 2
    hi = min(hi, lo + step)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sc.ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def rde_windows(P: RoughPath, b: RdeBounds, cfg: RdeConfig) -> list:
    """Greedy maximal windows on which every smallness requirement holds."""
    n = P.n
    if not cfg.windows:
        sc = _WindowScanner(P, b, cfg, 0, n - 1)
        if sc.ok(n - 1):
            return [(0, n - 1)]
        adm = 0 if not sc.ok(1) else _last_admissible(sc, 1, n - 1)
        raise HorizonTooLongError(f"the horizon violates the window conditions; admissible up to index {adm}", adm)
    out = []
    a = 0
    while a < n - 1:
        last = min(n - 1, a + cfg.max_window - 1)
        sc = _WindowScanner(P, b, cfg, a, last)
        if not sc.ok(a + 1):
            raise GridTooCoarseError(f"cell [{a}, {a + 1}] alone violates the window conditions: {sc.conditions(a + 1)}")
        e = _last_admissible(sc, a + 1, last)
        out.append((a, e))
        a = e
    return out


def _step(phi, Y: ControlledPath, y_start: np.ndarray, cfg: RdeConfig) -> ControlledPath:
    """``(y_start + int phi(Y) dX, phi(Y))``."""
    F = controlled_compose(phi, Y)
    Z = rough_integral(F, cfg, start=y_start).Z
    return Z


def _distance(Y: ControlledPath, Z: ControlledPath, r: float, C: float) -> float:
    return max(var_value(Y.remainder() - Z.remainder(), r / 2),
               var_value(Y.Yp - Z.Yp, r),
               C * var_value(Y.Y - Z.Y, r))


def _space_reports(Y: ControlledPath, b: RdeBounds, cfg: RdeConfig, w: np.ndarray, vX: np.ndarray,
                   vXX: np.ndarray) -> tuple:
    r, a, c = cfg.r, cfg.alpha, cfg.c
    N = Y.n
    vy = var_field(Y.Y, r, max_points=N).dense()
    vr = var_field(Y.remainder(), r / 2, max_points=N).dense()
    vyp = var_field(Y.Yp, r / a, max_points=N).dense()
    sup = float(_norms(Y.Yp).max())
    space = {
        "Y": _report(vy, c * w),
        "R": _report(vr, (c - 1) * w),
        "Yprime": _report(vyp, c**a * b.Phi_alpha * w**a),
        "Yprime_sup": {"violations": int(sup > b.Phi0 * (1 + RTOL)), "max_ratio": sup / b.Phi0, "intervals": 1},
    }
    apriori = {
        "variation": _report(0.25 * vy, b.Phi0 * vX + 2 * b.PhiDD * vXX),
        "remainder": _report(0.75 * vr, 1.5 * b.Phi0 * vX + 3 * (2 - a) * b.PhiDD * vXX),
    }
    return space, apriori


def rde_solve(phi, P: RoughPath, y0, cfg: RdeConfig | None = None) -> RdeSolution:
    """Picard iteration of the rough Step map, window by window.

    Each window starts from the seed ``(y_a, 0)``; its image under the Step
    map is iterate 1, and distances and contraction factors are taken between
    iterates from there on.  Iterates are
    checked for solution-space membership and the a priori bounds on every
    window interval (``check="all"``; ``"final"`` checks the limit only).
    """
    cfg = cfg or RdeConfig()
    phi = _smooth(phi)
    if P.dim != phi.n:
        raise ParameterError(f"phi expects a {phi.n}-dimensional driver, rough path has {P.dim}")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).reshape(-1)
    if y.size != phi.d:
        raise ParameterError(f"initial value must have {phi.d} components (got {y.size})")
    b = RdeBounds.of(phi, cfg.alpha)
    wins = rde_windows(P, b, cfg)
    N, d, n = P.n, phi.d, phi.n
    Y = np.empty((N, d))
    Yp = np.empty((N, d, n))
    Y[0] = y
    logs = []
    for a, e in wins:
        Pw = P.sub(a, e)
        Pw = RoughPath(Pw.X, Pw.XX.materialized(), check=False)
        m = Pw.n
        sc = _WindowScanner(Pw, b, cfg, 0, m - 1).conditions(m - 1)
        consts = contraction_constants(b, cfg, sc["A"])
        log = RdeWindowLog(a, e, sc, consts)
        if cfg.check != "none":
            vX = var_field(Pw.X, cfg.r, max_points=m).dense()
            vXX = var_field(Pw.XX.norms(), cfg.r / 2, max_points=m).dense()
            w = b.Phi0 * vX + b.Phi0 * b.Phi1 * vXX
        seed = ControlledPath(GridPath(Pw.grid, np.broadcast_to(Y[a], (m, d))),
                              GridPath(Pw.grid, np.zeros((m, d, n))), Pw)
        # Step(seed) = (y_a + phi(y_a) X(a, .), phi(y_a)) already lies in the solution space
        # with the right start pair, so distances are metric from here on
        cur = _step(phi, seed, Y[a], cfg)
        log.iterations = 1
        if cfg.check == "all":
            log.solution_space, log.apriori = _space_reports(cur, b, cfg, w, vX, vXX)
        prev = None
        while True:
            nxt = _step(phi, cur, Y[a], cfg)
            log.iterations += 1
            dist = _distance(nxt, cur, cfg.r, consts["C"])
            log.distances.append(dist)
            if prev is not None and prev > CONTRACTION_NOISE:
                log.contraction_factors.append(dist / prev)
            if cfg.check == "all":
                sp, ap = _space_reports(nxt, b, cfg, w, vX, vXX)
                log.solution_space = {k: _merge(log.solution_space.get(k, {}), v) for k, v in sp.items()}
                log.apriori = {k: _merge(log.apriori.get(k, {}), v) for k, v in ap.items()}
            prev = dist
            cur = nxt
            scale = max(1.0, log.distances[0])
            if dist <= cfg.tol * scale:
                break
            if log.iterations >= cfg.max_iter:
                log.converged = False
                break
        if cfg.check == "final":
            log.solution_space, log.apriori = _space_reports(cur, b, cfg, w, vX, vXX)
        Y[a : e + 1] = cur.Y.values
        Yp[a : e + 1] = cur.Yp.values
        logs.append(log)
        if cfg.check != "none":
            bad = {k: v for k, v in {**log.solution_space, **log.apriori}.items() if v["violations"]}
            if bad:
                raise DiagnosticError(f"window [{a}, {e}]: bound violations {bad}")
        if log.max_contraction >= 1.0:
            raise DiagnosticError(f"window [{a}, {e}]: no contraction observed (factor {log.max_contraction:.3f})")
        if not log.converged:
            raise DiagnosticError(f"window [{a}, {e}]: no convergence in {cfg.max_iter} iterations")
    # the last iterate's derivative is phi of the previous iterate; at the fixed point both agree
    path = ControlledPath(GridPath(P.grid, Y), GridPath(P.grid, Yp), P)
    return RdeSolution(path, logs, cfg)


# ---------------------------------------------------------------------------
# Lipschitz dependence on the data


@dataclass
class RdeLipschitzReport:
    gamma: float
    variation: dict
    remainder: dict
    Y: ControlledPath
    Yt: ControlledPath

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "variation": dict(self.variation), "remainder": dict(self.remainder)}


def lipschitz_shapes(P: RoughPath, Pt: RoughPath, gamma: float, r: float) -> tuple:
    """Right-hand sides (without constants) of both Lipschitz estimates on every interval."""
    N = P.n
    V = lambda f, p: var_field(f, p, max_points=N).dense()
    vX, vXt = V(P.X, r), V(Pt.X, r)
    vXX, vXXt = V(P.XX.norms(), r / 2), V(Pt.XX.norms(), r / 2)
    vdX, vdXX = V(P.X - Pt.X, r), V((P.XX - Pt.XX).norms(), r / 2)
    rhs1 = (vX + vXX + vXXt) * gamma + vdX + vdXX
    rhs2 = (vX**2 + vX * vXt + vXX + vXXt) * gamma + (vX + vXt + vXX + vXXt) * vdX + vdXX
    return rhs1, rhs2


def rde_lipschitz_bounds(phi, P: RoughPath, Pt: RoughPath, y0, yt0, cfg: RdeConfig | None = None) -> RdeLipschitzReport:
    """Solve both equations and record ``max_I LHS/RHS`` for both Lipschitz estimates.

    ``gamma = |dy0| + V^r dX_[0,T] + V^{r/2} dXX_[0,T]``.  The constants of the
    estimates are not explicit, so the report holds ratios; both drivers must
    satisfy the window conditions on the whole horizon.
    """
    cfg = cfg or RdeConfig()
    if P.grid != Pt.grid:
        raise ParameterError("rough paths live on different grids")
    one = RdeConfig(cfg.r, cfg.alpha, cfg.c, cfg.kappa, cfg.tol, cfg.max_iter, P.n, cfg.check, windows=False)
    try:
        S = rde_solve(phi, P, y0, one)
        St = rde_solve(phi, Pt, yt0, one)
    except HorizonTooLongError as exc:
        raise ParameterError(f"drivers must satisfy the smallness conditions on the whole horizon: {exc}") from exc
    Y, Yt = S.path, St.path
    r = cfg.r
    dy0 = float(np.linalg.norm(np.atleast_1d(np.asarray(y0, float)) - np.atleast_1d(np.asarray(yt0, float))))
    gamma = dy0 + var_value(P.X - Pt.X, r) + var_value((P.XX - Pt.XX).norms(), r / 2)
    rhs1, rhs2 = lipschitz_shapes(P, Pt, gamma, r)
    N = P.n
    lhs1 = var_field(Y.Y - Yt.Y, r, max_points=N).dense()
    lhs2 = var_field(Y.remainder() - Yt.remainder(), r / 2, max_points=N).dense()
    return RdeLipschitzReport(gamma, _ratio_only(lhs1, rhs1), _ratio_only(lhs2, rhs2), Y, Yt)


def _ratio_only(lhs: np.ndarray, rhs: np.ndarray) -> dict:
    rep = _report(lhs, rhs)
    del rep["violations"]
    rep["finite"] = bool(math.isfinite(rep["max_ratio"]))
    return rep

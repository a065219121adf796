"""Young integration and Young differential equations ``dY = phi(Y) dX`` on grids.

On a grid the sewing of the germ ``Y_s X(s, t)`` over the full partition is
the left Riemann sum, so the Picard map is the Euler scheme's fixed-point map
and every sewing bound applies to it verbatim.  What this module adds are the
quantitative pieces: smallness radii, greedy windows, the contraction metric,
solution-space membership and the explicit Lipschitz constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridPath, TwoParamField
from .errors import DiagnosticError, GridTooCoarseError, ParameterError
from .functions import HolderFunction, SmoothFunction21
from .sewing import zeta
from .variation import FIELD_MAX_POINTS, var_field, var_value

# Picard distances below this are round-off; their ratios are not contraction evidence
CONTRACTION_NOISE = 1e-9
CONTRACTION_TARGET = 0.5


def act(Y: np.ndarray, dX: np.ndarray) -> np.ndarray:
    """Apply integrand values to driver increments, batched over the leading axis.

    ``Y`` of shape ``(N, m, n)`` acts as matrices on ``dX`` of shape ``(N, n)``;
    ``(N, k)`` against a scalar driver ``(N, 1)`` multiplies; ``(N, n)``
    against ``(N, n)`` pairs as a covector and yields ``(N, 1)``.
    """
    if Y.ndim == 3:
        if Y.shape[2] != dX.shape[1]:
            raise ParameterError(f"integrand {Y.shape[1:]} cannot act on driver of dimension {dX.shape[1]}")
        return np.einsum("kmn,kn->km", Y, dX)
    if dX.shape[1] == 1:
        return Y * dX
    if Y.shape[1] == dX.shape[1]:
        return np.einsum("kn,kn->k", Y, dX)[:, None]
    raise ParameterError(f"integrand of shape {Y.shape[1:]} incompatible with driver of dimension {dX.shape[1]}")


def _theta(r1: float, r2: float) -> float:
    th = 1.0 / r1 + 1.0 / r2
    if not th > 1:
        raise ParameterError(f"Young integration needs 1/r1 + 1/r2 > 1 (got {th:.6g})")
    return th


def trimmed_product(vy: TwoParamField, vx: TwoParamField) -> np.ndarray:
    """``P[s, t] = vy[s, t-1] * vx[s+1, t]`` for ``s < t``: the half-open trims of two variation fields."""
    a, b = vy.dense(), vx.dense()
    n = vy.n
    out = np.zeros((n, n))
    out[:-1, 1:] = a[:-1, :-1] * b[1:, 1:]
    return np.triu(out, 1)


@dataclass
class YoungIntegral:
    """``Z(s, t)`` together with the local error and, on small grids, its bound."""

    Z: GridPath
    increments: TwoParamField
    error: TwoParamField | None = None
    bound: TwoParamField | None = None
    theta: float = float("nan")

    def violations(self, rtol: float = 1e-9) -> int:
        if self.bound is None:
            raise ParameterError("no bound was computed for this integral")
        e, b = self.error.dense(), self.bound.dense()
        return int(np.sum(e > b * (1 + rtol) + 1e-14))


def young_integral(Y, X: GridPath, r1: float, r2: float, bound: bool | None = None) -> YoungIntegral:
    """Sewing of ``Y_s X(s, t)``; ``Y`` is a path or a callable applied to ``X`` values.

    With ``bound`` (default: grids of at most ``FIELD_MAX_POINTS`` points) the
    local error ``|Z(s,t) - Y_s X(s,t)|`` and ``zeta(theta) V^{r1}Y_[s,t) V^{r2}X_(s,t]``
    are tabulated on every interval, the half-open variations being the
    closed ones with the open endpoint trimmed by a grid point.
    """
    th = _theta(r1, r2)
    if callable(Y) and not isinstance(Y, GridPath):
        Y = GridPath(X.grid, Y(X.values))
    if Y.grid != X.grid:
        raise ParameterError("integrand and driver live on different grids")
    yv, xv = Y.values, X.values
    g = act(yv[:-1], np.diff(xv, axis=0))
    C = np.concatenate([np.zeros((1,) + g.shape[1:]), np.cumsum(g, axis=0)])
    Z = GridPath(X.grid, C)
    inc = Z.increments()
    out = YoungIntegral(Z, inc, theta=th)
    if bound is None:
        bound = X.n <= FIELD_MAX_POINTS
    if bound:
        n = X.n
        err = np.zeros((n, n))
        for s in range(n - 1):
            germ = act(np.broadcast_to(yv[s], (n - s,) + yv.shape[1:]), xv[s:] - xv[s])
            err[s, s:] = np.linalg.norm((C[s:] - C[s] - germ).reshape(n - s, -1), axis=1)
        out.error = TwoParamField(X.grid, err)
        P = trimmed_product(var_field(Y, r1), var_field(X, r2))
        out.bound = TwoParamField(X.grid, zeta(th) * P)
    return out


# ---------------------------------------------------------------------------
# configuration and smallness


def as_holder(phi, alpha: float) -> HolderFunction:
    """View ``phi`` as ``C^{1,alpha}`` with bounds derived from its declared ones."""
    if isinstance(phi, SmoothFunction21):
        return phi.holder(alpha)
    if not isinstance(phi, HolderFunction):
        raise ParameterError(f"expected a HolderFunction or SmoothFunction21, got {type(phi).__name__}")
    if abs(phi.alpha - alpha) < 1e-15:
        return phi
    if phi.alpha < alpha:
        raise ParameterError(f"phi is only {phi.alpha}-Hoelder, cannot use alpha = {alpha}")
    lam = alpha / phi.alpha
    # [f]_alpha <= [f]_a^(alpha/a) (2 sup f)^(1 - alpha/a)
    return HolderFunction(phi.phi, phi.dphi, phi.Phi0, phi.Phi_alpha**lam * (2 * phi.Phi0) ** (1 - lam),
                          phi.Phi1, phi.Phi1_alpha**lam * (2 * phi.Phi1) ** (1 - lam), alpha,
                          phi.d, phi.n, phi.d_out, phi.name, check=False)


@dataclass(frozen=True)
class YoungConfig:
    r: float = 1.5
    alpha: float = 1.0
    eps: float | None = None
    tol: float = 1e-10
    max_iter: int = 200
    strengthened: bool = True
    contraction_slack: float = 0.05
    max_window: int = FIELD_MAX_POINTS
    check: bool = True

    def __post_init__(self):
        if not 1 <= self.r < 2:
            raise ParameterError(f"Young equations need r in [1, 2) (got {self.r})")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1] (got {self.alpha})")
        if not self.r < 1 + self.alpha:
            raise ParameterError(f"need r < 1 + alpha (got r={self.r}, alpha={self.alpha})")
        if self.eps is not None and not self.eps > 0:
            raise ParameterError("eps must be positive")
        if self.max_window < 2:
            raise ParameterError("max_window must be at least 2")

    @property
    def theta(self) -> float:
        return (1 + self.alpha) / self.r

    @property
    def csew(self) -> float:
        return 2.0 ** (self.theta - 1) * zeta(self.theta)


def smallness_roots(phi, r: float, alpha: float, strengthened: bool = True) -> dict:
    """The three closed-form roots of the smallness conditions (one per inequality).

    Strengthened (default), with ``K = 2^{theta-1} zeta(theta)``:
    ``2^alpha K Phi_alpha eps^alpha <= Phi0^{1-alpha}``, ``K Phi1 eps <= 1/8`` and
    ``K 2^alpha Phi0^alpha Phi1_alpha / (1+alpha) eps^{1+alpha} <= 1/8``.
    The basic set drops the factor ``2^{theta-1}`` from ``K``.
    """
    h = as_holder(phi, alpha)
    if not h.Phi0 > 0 or not h.Phi1 > 0:
        raise ParameterError("smallness needs Phi0 > 0 and Phi1 > 0")
    th = (1 + alpha) / r
    if not th > 1:
        raise ParameterError(f"theta = (1 + alpha)/r must exceed 1 (got {th})")
    K = zeta(th) * (2.0 ** (th - 1) if strengthened else 1.0)
    a = alpha
    apriori = math.inf if h.Phi_alpha == 0 else (h.Phi0 ** (1 - a) / (2**a * K * h.Phi_alpha)) ** (1 / a)
    lip = 1.0 / (8 * K * h.Phi1)
    hold = math.inf if h.Phi1_alpha == 0 else (1.0 / (8 * K * 2**a * h.Phi0**a * h.Phi1_alpha / (1 + a))) ** (1 / (1 + a))
    return {"apriori": apriori, "lipschitz": lip, "holder": hold}


def smallness_epsilon(phi, r: float = 1.5, alpha: float = 1.0, strengthened: bool = True) -> float:
    """Largest ``eps`` meeting all three smallness inequalities."""
    return min(smallness_roots(phi, r, alpha, strengthened).values())


def _resolve_eps(h: HolderFunction, cfg: YoungConfig) -> float:
    cap = smallness_epsilon(h, cfg.r, cfg.alpha, cfg.strengthened)
    if cfg.eps is None:
        return cap
    if cfg.eps > cap * (1 + 1e-12):
        raise ParameterError(f"eps = {cfg.eps} violates the smallness conditions (largest admissible {cap:.6g})")
    return cfg.eps


# ---------------------------------------------------------------------------
# windows, metric and the Picard loop


def greedy_windows(X: GridPath, r: float, eps: float, max_window: int = FIELD_MAX_POINTS) -> list:
    """Left-to-right maximal windows ``[a, b]`` with ``V^r X_[a,b] < eps`` (at most ``max_window`` points)."""
    n = X.n
    d = X.distance_field()
    cells = d.diagonal(1)
    bad = np.flatnonzero(cells >= eps)
    if bad.size:
        k = int(bad[0])
        raise GridTooCoarseError(f"cell {k} alone has |X| = {cells[k]:.4g} >= eps = {eps:.4g}; refine the grid")

    def ok(a, b):
        return var_value(d, r, (a, b)) < eps

    out = []
    a = 0
    while a < n - 1:
        hi = min(n - 1, a + max_window - 1)
        lo = a + 1
        if not ok(a, hi):
            # gallop to bracket the last admissible end, then bisect
            step = 1
            while lo + step < hi and ok(a, lo + step):
                lo += step
                step *= 2
            hi = min(hi, lo + step)
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if ok(a, mid):
                    lo = mid
                else:
                    hi = mid
            hi = lo
        out.append((a, hi))
        a = hi
    return out


def picard_distance(dY: GridPath, vx: TwoParamField, r: float) -> float:
    """``max_I V^r dY_I / V^r X_I`` over grid intervals, with ``0/0 = 0``."""
    vd = var_field(dY, r).dense()
    v = vx.dense()
    iu = np.triu_indices(v.shape[0], 1)
    num, den = vd[iu], v[iu]
    if np.any((den == 0) & (num > 0)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(den > 0, num / den, 0.0)
    return float(q.max()) if q.size else 0.0


def _phi_values(h: HolderFunction, Y: np.ndarray) -> np.ndarray:
    return np.asarray(h.phi(Y), dtype=float)


def picard_step(h: HolderFunction, Y: np.ndarray, dX: np.ndarray, y_start: np.ndarray) -> np.ndarray:
    """``y_start + sum_{k < t} phi(Y_k) dX_k`` on one window."""
    g = act(_phi_values(h, Y[:-1]), dX)
    out = np.empty_like(Y)
    out[0] = y_start
    out[1:] = y_start + np.cumsum(g, axis=0)
    return out


def _ratio_report(lhs: np.ndarray, rhs: np.ndarray, rtol: float = 1e-9) -> dict:
    iu = np.triu_indices(lhs.shape[0], 1)
    a, b = lhs[iu], rhs[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(b > 0, a / b, np.where(a > 1e-14, math.inf, 0.0))
    return {
        "violations": int(np.sum(a > b * (1 + rtol) + 1e-14)),
        "max_ratio": float(q.max()) if q.size else 0.0,
        "intervals": int(a.size),
    }


@dataclass
class WindowLog:
    start: int
    end: int
    iterations: int
    distances: list = field(default_factory=list)
    contraction_factors: list = field(default_factory=list)
    solution_space: dict = field(default_factory=dict)
    apriori: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def max_contraction(self) -> float:
        return max(self.contraction_factors, default=0.0)

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "iterations": self.iterations,
            "distances": list(self.distances),
            "contraction_factors": list(self.contraction_factors),
            "max_contraction": self.max_contraction,
            "solution_space": dict(self.solution_space),
            "apriori": dict(self.apriori),
            "converged": self.converged,
        }


@dataclass
class YoungSolution:
    path: GridPath
    windows: list
    eps: float
    config: YoungConfig

    @property
    def max_contraction(self) -> float:
        return max((w.max_contraction for w in self.windows), default=0.0)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "max_contraction": self.max_contraction, "windows": [w.to_dict() for w in self.windows]}


def _driver(X: GridPath, h: HolderFunction) -> np.ndarray:
    xv = X.values.reshape(X.n, -1)
    if xv.shape[1] != h.n:
        raise ParameterError(f"phi expects a {h.n}-dimensional driver, got {xv.shape[1]}")
    return xv


def _initial(y0, d: int) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y0, dtype=float)).reshape(-1)
    if y.size != d:
        raise ParameterError(f"initial value must have {d} components (got {y.size})")
    return y


def young_solve(phi, X: GridPath, y0, cfg: YoungConfig | None = None) -> YoungSolution:
    """Solve ``dY = phi(Y) dX`` window by window with Picard iteration from constant seeds.

    Each window satisfies ``V^r X < eps``.  Every iterate is checked for
    membership in the solution space ``V^r Y_I <= 2 Phi0 V^r X_I`` (all window
    intervals); the observed contraction factor of successive distances must
    stay below ``1/2 + contraction_slack``.
    """
    cfg = cfg or YoungConfig()
    h = as_holder(phi, cfg.alpha)
    if h.d_out != h.d:
        raise ParameterError("phi must map R^d to d x n matrices")
    eps = _resolve_eps(h, cfg)
    xv = _driver(X, h)
    y = _initial(y0, h.d)
    Xp = GridPath(X.grid, xv)
    windows = greedy_windows(Xp, cfg.r, eps, cfg.max_window)
    Y = np.empty((X.n, h.d))
    Y[0] = y
    logs = []
    for a, b in windows:
        seg = Xp.sub(a, b)
        dX = np.diff(seg.values, axis=0)
        vx = var_field(seg, cfg.r)
        cur = np.broadcast_to(Y[a], (b - a + 1, h.d)).copy()
        log = WindowLog(a, b, 0)
        prev_d = None
        while True:
            nxt = picard_step(h, cur, dX, Y[a])
            log.iterations += 1
            dist = picard_distance(GridPath(seg.grid, nxt - cur), vx, cfg.r)
            log.distances.append(dist)
            if cfg.check:
                vy = var_field(GridPath(seg.grid, nxt), cfg.r).dense()
                rep = _ratio_report(vy, 2 * h.Phi0 * vx.dense())
                log.apriori = rep
                worst = log.solution_space
                if not worst or rep["max_ratio"] > worst["max_ratio"]:
                    log.solution_space = {**rep, "violations": rep["violations"] + worst.get("violations", 0)}
                else:
                    worst["violations"] += rep["violations"]
            if prev_d is not None and prev_d > CONTRACTION_NOISE:
                log.contraction_factors.append(dist / prev_d)
            cur = nxt
            prev_d = dist
            if dist <= cfg.tol:
                break
            if log.iterations >= cfg.max_iter:
                log.converged = False
                break
        Y[a : b + 1] = cur
        logs.append(log)
        if cfg.check:
            if log.solution_space.get("violations", 0):
                raise DiagnosticError(f"window [{a}, {b}]: iterate left the solution space {log.solution_space}")
            if log.max_contraction > CONTRACTION_TARGET + cfg.contraction_slack:
                raise DiagnosticError(f"window [{a}, {b}]: contraction factor {log.max_contraction:.3f} exceeds "
                                      f"{CONTRACTION_TARGET + cfg.contraction_slack}")
            if not log.converged:
                raise DiagnosticError(f"window [{a}, {b}]: Picard iteration did not reach tol in {cfg.max_iter} steps")
    return YoungSolution(GridPath(X.grid, Y), logs, eps, cfg)


def apriori_check(Y: GridPath, X: GridPath, r: float, Phi0: float) -> dict:
    """``V^r Y_I <= 2 Phi0 V^r X_I`` on every grid interval (grids up to ``FIELD_MAX_POINTS``)."""
    return _ratio_report(var_field(Y, r).dense(), 2 * Phi0 * var_field(X, r).dense())


# ---------------------------------------------------------------------------
# Lipschitz stability


@dataclass
class YoungLipschitzReport:
    gamma: float
    terms: dict
    eps: float
    check: dict
    Y: GridPath
    Yt: GridPath

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "terms": dict(self.terms), "eps": self.eps, "check": dict(self.check)}


def gamma_explicit(cfg: YoungConfig, eps: float, Phi0: float, Phi1: float, Phi1_alpha: float,
                   dX_var: float, dy0: float, dphi_holder: float, dphi_sup: float) -> tuple:
    """Twice the right side of the self-improving bound on the smallest admissible ``gamma``.

    With ``g' = 2 Phi0`` and ``S`` the sum of the data terms, the proof shows
    ``gamma <= gamma/2 + S``, hence ``gamma = 2 S`` is admissible.
    """
    a = cfg.alpha
    C = cfg.csew
    gp = 2 * Phi0
    ea = eps**a
    terms = {
        "sewing_driver": C * Phi1 * gp * dX_var,
        "sewing_holder": C * 2 ** (a + 1) * Phi1_alpha / (1 + a) * Phi0**a * ea * (dy0 + gp * dX_var),
        "sewing_dphi": C * 2**a * Phi0**a * ea * dphi_holder,
        "germ_driver": Phi1 * gp * dX_var,
        "germ_initial": Phi1 * dy0,
        "germ_dphi": dphi_sup,
    }
    return 2.0 * sum(terms.values()), terms


def _probe_difference(h: HolderFunction, ht: HolderFunction, alpha: float, samples: int = 2000, seed: int = 1) -> dict:
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((samples, h.d)) * rng.choice([0.1, 1.0, 5.0], (samples, 1))
    z = y + rng.standard_normal(y.shape) * 10.0 ** rng.uniform(-3, 0, (samples, 1))
    D = lambda u: np.asarray(h.phi(u)) - np.asarray(ht.phi(u))
    dy, dz = D(y), D(z)
    dist = np.linalg.norm(y - z, axis=1)
    sup = float(np.linalg.norm(dy.reshape(samples, -1), axis=1).max())
    hol = float((np.linalg.norm((dy - dz).reshape(samples, -1), axis=1) / dist**alpha).max())
    return {"sup": sup, "holder": hol}


def young_lipschitz_gamma(phi, phit, X: GridPath, Xt: GridPath, y0, yt0, cfg: YoungConfig | None = None,
                          dphi_sup: float | None = None, dphi_holder: float | None = None) -> YoungLipschitzReport:
    """Solve both equations, build ``gamma`` and check ``V^r dY_I <= gamma V^r X_I + 2 Phi0 V^r dX_I``.

    ``dphi_sup`` and ``dphi_holder`` are declared bounds on ``phi - phit``
    (zero when ``phit is phi``); they are probed and rejected when the samples
    exceed them by more than 1%.  Both drivers must satisfy ``V^r < eps`` on
    the whole grid, which must hold at most ``FIELD_MAX_POINTS`` points.
    """
    cfg = cfg or YoungConfig()
    h = as_holder(phi, cfg.alpha)
    ht = as_holder(phit, cfg.alpha)
    if ht.out_shape != h.out_shape or ht.d != h.d:
        raise ParameterError("phi and phit have different shapes")
    if phit is phi:
        dphi_sup = 0.0 if dphi_sup is None else dphi_sup
        dphi_holder = 0.0 if dphi_holder is None else dphi_holder
    if dphi_sup is None or dphi_holder is None:
        raise ParameterError("declare dphi_sup and dphi_holder for distinct coefficients")
    if phit is not phi:
        seen = _probe_difference(h, ht, cfg.alpha)
        if seen["sup"] > dphi_sup * 1.01 + 1e-12 or seen["holder"] > dphi_holder * 1.01 + 1e-8:
            raise ParameterError(f"declared bounds on phi - phit are exceeded on probes: {seen}")
    if X.n > FIELD_MAX_POINTS:
        raise ParameterError(f"interval checks are capped at {FIELD_MAX_POINTS} grid points")
    joint = HolderFunction(h.phi, h.dphi, max(h.Phi0, ht.Phi0), max(h.Phi_alpha, ht.Phi_alpha), h.Phi1,
                           h.Phi1_alpha, cfg.alpha, h.d, h.n, h.d_out, h.name, check=False)
    eps = _resolve_eps(joint, cfg)
    xv, xtv = _driver(X, h), _driver(Xt, h)
    Xp, Xtp = GridPath(X.grid, xv), GridPath(Xt.grid, xtv)
    vX, vXt = var_value(Xp, cfg.r), var_value(Xtp, cfg.r)
    if not (vX < eps and vXt < eps):
        raise ParameterError(f"drivers must satisfy V^r < eps = {eps:.4g} (got {vX:.4g}, {vXt:.4g})")
    run = YoungConfig(cfg.r, cfg.alpha, eps, cfg.tol, cfg.max_iter, cfg.strengthened, cfg.contraction_slack,
                      X.n, cfg.check)
    Y = young_solve(joint, Xp, y0, run).path
    tj = HolderFunction(ht.phi, ht.dphi, joint.Phi0, joint.Phi_alpha, max(h.Phi1, ht.Phi1),
                        max(h.Phi1_alpha, ht.Phi1_alpha), cfg.alpha, h.d, h.n, h.d_out, ht.name, check=False)
    Yt = young_solve(tj, Xtp, yt0, YoungConfig(cfg.r, cfg.alpha, min(eps, smallness_epsilon(tj, cfg.r, cfg.alpha)),
                                               cfg.tol, cfg.max_iter, cfg.strengthened, cfg.contraction_slack,
                                               X.n, cfg.check)).path
    dXp = Xp - Xtp
    dy0 = float(np.linalg.norm(_initial(y0, h.d) - _initial(yt0, h.d)))
    gamma, terms = gamma_explicit(cfg, eps, joint.Phi0, h.Phi1, h.Phi1_alpha, var_value(dXp, cfg.r), dy0,
                                  dphi_holder, dphi_sup)
    lhs = var_field(Y - Yt, cfg.r).dense()
    rhs = gamma * var_field(Xp, cfg.r).dense() + 2 * joint.Phi0 * var_field(dXp, cfg.r).dense()
    return YoungLipschitzReport(gamma, terms, eps, _ratio_report(lhs, rhs), Y, Yt)


# ---------------------------------------------------------------------------
# pointwise and interval lemmas (check quantities)


def taylor4_bound(phi, phit, Ys, Yt, Zs, Zt, dphi_holder: float, alpha: float) -> tuple:
    """Both sides of the four-point estimate for ``|(phi(Y_t) - phi(Y_s)) - (phit(Z_t) - phit(Z_s))|``.

    ``Phi1`` and ``Phi1_alpha`` of ``phi`` stand in for ``|Dphi|_sup`` and
    ``|Dphi|_{C^alpha}``.  Inputs are batched ``(N, d)``.
    """
    h = as_holder(phi, alpha)
    ht = as_holder(phit, alpha)
    val = lambda f, u: np.asarray(f.phi(u)).reshape(len(u), -1)
    lhs = np.linalg.norm((val(h, Yt) - val(h, Ys)) - (val(ht, Zt) - val(ht, Zs)), axis=1)
    dy_st = np.linalg.norm((Yt - Zt) - (Ys - Zs), axis=1)
    ny = np.linalg.norm(Yt - Ys, axis=1)
    nz = np.linalg.norm(Zt - Zs, axis=1)
    rhs = h.Phi1 * dy_st + h.Phi1_alpha / (1 + alpha) * (ny**alpha + nz**alpha) * np.linalg.norm(Ys - Zs, axis=1)
    rhs = rhs + dphi_holder * nz**alpha
    return lhs, rhs


def _interval_sup(v: np.ndarray) -> np.ndarray:
    """``S[s, t] = max_{s <= k <= t} v_k``."""
    n = v.size
    out = np.zeros((n, n))
    for s in range(n):
        out[s, s:] = np.maximum.accumulate(v[s:])
    return out


def composition_stability_check(phi, phit, Y: GridPath, Yt: GridPath, r: float, alpha: float,
                                 dphi_holder: float) -> dict:
    """``V^{r/a}(phi(Y) - phit(Yt)) <= Phi1 V^{r/a} dY + Phi1a/(1+a)(V^rY^a + V^rYt^a)|dY|_sup + [dphi]_a V^rYt^a``."""
    h = as_holder(phi, alpha)
    ht = as_holder(phit, alpha)
    ra = r / alpha
    F = GridPath(Y.grid, np.asarray(h.phi(Y.values)) - np.asarray(ht.phi(Yt.values)))
    lhs = var_field(F, ra).dense()
    dY = Y - Yt
    sup = _interval_sup(np.linalg.norm(dY.values.reshape(Y.n, -1), axis=1))
    vy, vyt = var_field(Y, r).dense(), var_field(Yt, r).dense()
    rhs = h.Phi1 * var_field(dY, ra).dense() + h.Phi1_alpha / (1 + alpha) * (vy**alpha + vyt**alpha) * sup
    rhs = rhs + dphi_holder * vyt**alpha
    return _ratio_report(lhs, rhs)


def integration_stability_check(Y: GridPath, Yt: GridPath, X: GridPath, Xt: GridPath, r: float, alpha: float) -> dict:
    """Difference of two Young integrals minus the difference of germs, against ``K (V dY V X + V Yt V dX)``."""
    ra = r / alpha
    th = (1 + alpha) / r
    K = 2.0 ** (th - 1) * zeta(th)
    I1 = young_integral(Y, X, ra, r, bound=False).Z.values
    I2 = young_integral(Yt, Xt, ra, r, bound=False).Z.values
    yv, ytv, xv, xtv = Y.values, Yt.values, X.values, Xt.values
    n = X.n
    lhs = np.zeros((n, n))
    for s in range(n - 1):
        m = n - s
        g1 = act(np.broadcast_to(yv[s], (m,) + yv.shape[1:]), xv[s:] - xv[s])
        g2 = act(np.broadcast_to(ytv[s], (m,) + ytv.shape[1:]), xtv[s:] - xtv[s])
        e = (I1[s:] - I1[s]) - (I2[s:] - I2[s]) - (g1 - g2)
        lhs[s, s:] = np.linalg.norm(e.reshape(m, -1), axis=1)
    rhs = K * (trimmed_product(var_field(Y - Yt, ra), var_field(X, r))
               + trimmed_product(var_field(Yt, ra), var_field(X - Xt, r)))
    return _ratio_report(lhs, rhs)

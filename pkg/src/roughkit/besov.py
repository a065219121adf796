"""Two-parameter Besov norms on uniform grids.

For a nonnegative field ``chi`` the translate norm at offset ``h = k*mesh`` is

    D(h) = (int_0^{T-h} chi(s, s+h)^p ds)^(1/p)

evaluated as a left-endpoint Riemann sum (or the sup over ``s`` for
``p = inf``).  ``Omega(t) = sup_{h <= t} D(h)`` is a step function of ``t``,
constant on ``[k*mesh, (k+1)*mesh)`` and zero below one mesh width.  The norm

    ||chi|| = (int_0^T (Omega(t) / t^alpha)^q dt / t)^(1/q)

is computed either by the dyadic sum ``sum_n (2^{n alpha} Omega(2^-n T))^q``
(default) or by integrating the step function exactly cell by cell
("quadrature").  The starred variant replaces ``Omega`` by ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import GridPath, TwoParamField
from .errors import ParameterError
from .variation import as_scalar_field

INF = math.inf
EVALUATORS = ("dyadic", "quadrature")


@dataclass(frozen=True)
class BesovParams:
    alpha: float
    p: float
    q: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive (got {self.alpha})")
        if not self.p > 0:
            raise ParameterError(f"p must be positive (got {self.p})")
        if not self.q > 0:
            raise ParameterError(f"q must be positive (got {self.q})")

    def scaled(self, k: float) -> "BesovParams":
        """Parameters ``(k*alpha, p/k, q/k)`` used for level-k objects."""
        return BesovParams(k * self.alpha, self.p / k, self.q / k)


def _params(params) -> BesovParams:
    if isinstance(params, BesovParams):
        return params
    return BesovParams(*params)


def _mesh(chi: TwoParamField) -> float:
    if not chi.grid.is_uniform():
        raise ParameterError("Besov norms need a uniform grid")
    return chi.grid.horizon / chi.grid.cells


def translate_norms(chi, p: float, inner: str = "left") -> np.ndarray:
    """``D[k]`` for offsets ``k = 0..n-1`` (``D[0] = 0``)."""
    chi = as_scalar_field(chi)
    mesh = _mesh(chi)
    n = chi.n
    d = chi.dense()
    out = np.zeros(n)
    for k in range(1, n):
        diag = np.diagonal(d, k)  # chi(i, i+k), i = 0..n-1-k
        if p == INF:
            out[k] = diag.max()
        elif inner == "left":
            out[k] = (np.sum(diag[:-1] ** p) * mesh) ** (1.0 / p) if diag.size > 1 else 0.0
        elif inner == "trapezoid":
            w = diag**p
            out[k] = (mesh * (w.sum() - 0.5 * (w[0] + w[-1]))) ** (1.0 / p) if w.size > 1 else 0.0
        else:
            raise ParameterError(f"unknown inner rule {inner!r}")
    return out


def omega_array(chi, p: float, star: bool = False, inner: str = "left") -> np.ndarray:
    """``Omega`` (running sup of ``D``) at every grid offset; ``D`` itself when ``star``."""
    D = translate_norms(chi, p, inner)
    return D if star else np.maximum.accumulate(D)


def _offset(t: float, mesh: float) -> int:
    return int(math.floor(t / mesh * (1 + 1e-12) + 1e-9))


def omega_p(chi, p: float, t: float, inner: str = "left") -> float:
    """``Omega_p(t)``: sup over grid offsets ``h <= t`` of the translate norm."""
    chi = as_scalar_field(chi)
    if not t > 0:
        raise ParameterError("omega_p needs t > 0")
    mesh = _mesh(chi)
    if t > chi.grid.horizon * (1 + 1e-12):
        raise ParameterError("omega_p needs t <= T")
    k = min(_offset(t, mesh), chi.n - 1)
    if k == 0:
        return 0.0
    return float(np.max(translate_norms(chi, p, inner)[: k + 1]))


def _outer_dyadic(om: np.ndarray, mesh: float, T: float, alpha: float, q: float) -> tuple:
    cells = om.size - 1
    N = int(math.floor(math.log2(cells)))
    terms = np.array([2.0 ** (j * alpha) * om[min(_offset(T * 2.0**-j, mesh), cells)] for j in range(N + 1)])
    if q == INF:
        return float(terms.max()), N
    return float(np.sum(terms**q) ** (1.0 / q)), N


def _outer_quadrature(om: np.ndarray, mesh: float, alpha: float, q: float) -> float:
    cells = om.size - 1
    k = np.arange(1, cells + 1, dtype=float)
    if q == INF:
        return float(np.max(om[1:] / (k * mesh) ** alpha))
    e = alpha * q
    # exact integral of t^(-e-1) over [k mesh, (k+1) mesh), k = 1..cells-1
    kk = k[:-1]
    w = mesh**-e * (kk**-e - (kk + 1) ** -e) / e
    return float(np.sum(om[1:cells] ** q * w) ** (1.0 / q))


def besov_from_omega(om: np.ndarray, mesh: float, alpha: float, q: float, evaluator: str = "dyadic") -> float:
    """Outer ``t``-integral of a step function ``om`` given at grid offsets."""
    T = mesh * (om.size - 1)
    if evaluator == "dyadic":
        return _outer_dyadic(om, mesh, T, alpha, q)[0]
    if evaluator == "quadrature":
        return _outer_quadrature(om, mesh, alpha, q)
    raise ParameterError(f"unknown evaluator {evaluator!r}; choose from {EVALUATORS}")


def besov_norm(chi, params, mode: str = "standard", evaluator: str = "dyadic", inner: str = "left") -> float:
    """``||chi||_{B^alpha_{p,q}}`` (``mode='star'`` for the variant without the sup over h)."""
    prm = _params(params)
    if mode not in ("standard", "star"):
        raise ParameterError(f"unknown mode {mode!r}")
    chi = as_scalar_field(chi)
    mesh = _mesh(chi)
    om = omega_array(chi, prm.p, star=(mode == "star"), inner=inner)
    return besov_from_omega(om, mesh, prm.alpha, prm.q, evaluator)


def besov_report(chi, params, mode: str = "standard", evaluator: str = "dyadic") -> dict:
    prm = _params(params)
    chi = as_scalar_field(chi)
    mesh = _mesh(chi)
    om = omega_array(chi, prm.p, star=(mode == "star"))
    value = besov_from_omega(om, mesh, prm.alpha, prm.q, evaluator)
    levels = int(math.floor(math.log2(chi.grid.cells))) + 1 if evaluator == "dyadic" else chi.grid.cells - 1
    return {"norm": value, "evaluator": evaluator, "levels": levels, "mode": mode}


def besov_norm_path(f: GridPath, params, mode: str = "standard", evaluator: str = "dyadic") -> float:
    """Besov norm of the distance field ``|f(t) - f(s)|``."""
    return besov_norm(f.distance_field(), params, mode, evaluator)


@njit(cache=True)
def _three_param_sums(A, p, mesh, pinf):
    n = A.shape[0]
    D = A.shape[2]
    G = np.zeros(n)
    for v in range(2, n):
        smax = n - 1 - v if pinf else n - 2 - v
        gv = 0.0
        for u in range(1, v):
            acc = 0.0
            for s in range(smax + 1):
                nrm2 = 0.0
                for c in range(D):
                    d = A[s, s + v, c] - A[s, s + u, c] - A[s + u, s + v, c]
                    nrm2 += d * d
                x = math.sqrt(nrm2)
                if pinf:
                    if x > acc:
                        acc = x
                else:
                    acc += x**p
            if not pinf:
                acc *= mesh
            if acc > gv:
                gv = acc
        G[v] = gv
    return G


def omega_bar_array(A: TwoParamField, p: float) -> np.ndarray:
    """``bar Omega(k mesh) = sup_{u <= v <= k} (sum_s |delta A(s, s+u, s+v)|^p mesh)^(1/p)``."""
    mesh = _mesh(A)
    n = A.n
    flat = np.ascontiguousarray(A.dense().reshape(n, n, -1))
    pinf = p == INF
    G = _three_param_sums(flat, 1.0 if pinf else float(p), mesh, pinf)
    vals = G if pinf else G ** (1.0 / p)
    return np.maximum.accumulate(vals)


def omega_bar(A: TwoParamField, p: float, t: float) -> float:
    if not t > 0:
        raise ParameterError("omega_bar needs t > 0")
    mesh = _mesh(A)
    k = min(_offset(t, mesh), A.n - 1)
    return float(omega_bar_array(A, p)[k])


def besov_norm_3param(A: TwoParamField, params, evaluator: str = "dyadic") -> float:
    """Three-parameter norm of ``delta A`` with the same outer ``q``-average."""
    prm = _params(params)
    om = omega_bar_array(A, prm.p)
    return besov_from_omega(om, _mesh(A), prm.alpha, prm.q, evaluator)


# ---------------------------------------------------------------------------
# constants


def sum_approximation_constants(alpha: float, q: float, T: float) -> tuple:
    """``(c, C)`` with ``c * S_1 <= ||chi|| <= C * S_0`` for monotone ``Omega``.

    ``S_m = (sum_{n >= m} (2^{n alpha} Omega(2^-n T))^q)^(1/q)``.  Both follow
    from comparing ``Omega`` on each dyadic shell with its endpoint values:
    ``c^q = T^{-alpha q} (1 - 2^{-alpha q}) / (alpha q)`` and
    ``C^q = T^{-alpha q} (2^{alpha q} - 1) / (alpha q)``.
    """
    if q == INF:
        return 2.0**-alpha * T**-alpha, 2.0**alpha * T**-alpha
    e = alpha * q
    c = (T**-e * (1 - 2.0**-e) / e) ** (1.0 / q)
    C = (T**-e * (2.0**e - 1) / e) ** (1.0 / q)
    return c, C


def _in_closed(x, lo, hi):
    return lo <= x <= hi


def embedding_constants(lemma_id: str, *, unsafe_extrapolate: bool = False, **kw) -> float:
    """Explicit right-hand-side constants of the Besov embeddings.

    ``lemma_id``:

    * ``"equivalence"`` (alpha, rho, p, q): ``(2^{alpha rho~} - 1)^{-1/rho~}``
      with ``rho~ = min(1, rho, p, q)``; bounds the standard norm by the starred
      one for rho-subadditive fields.
    * ``"equivalence_dyadic"`` (alpha, rho, p, q): ``(1 - 2^{-alpha rho~})^{-1/rho~}``, the
      grid-exact version of the same bound on dyadic grids (offsets can only be
      halved down to one cell, which costs the extra factor ``2^{alpha}``).
    * ``"p_alpha"`` (alpha, alpha_tilde, p, p_tilde[, q]):
      ``3^{1-alpha} (2^{alpha~ + 1/p + 1} sum_j 2^{-j alpha} + 2^{alpha~})`` for starred
      norms of subadditive monotone fields; needs alpha <= alpha~,
      alpha - 1/p = alpha~ - 1/p~ and p, p~, q in [1, inf].
    * ``"alpha_q"`` (alpha, alpha_tilde, q, q_tilde, T): norm-level constant of the
      Hoelder step, ``(T^E / E)^{(q~ - q)/(q q~)}`` with ``E = (alpha~ - alpha) q q~ / (q~ - q)``.
    * ``"p"`` (p, p_tilde, T): ``T^{1/p - 1/p~}`` for p <= p~.
    """
    if lemma_id in ("equivalence", "equivalence_dyadic"):
        alpha, rho, p, q = kw["alpha"], kw["rho"], kw["p"], kw["q"]
        if not 0 < alpha:
            raise ParameterError(f"{lemma_id}: alpha must be positive")
        if not rho > 0:
            raise ParameterError(f"{lemma_id}: rho must be positive")
        rt = min(1.0, rho, p, q)
        if lemma_id == "equivalence_dyadic":
            return float((1.0 - 2.0 ** (-alpha * rt)) ** (-1.0 / rt))
        return float((2.0 ** (alpha * rt) - 1.0) ** (-1.0 / rt))

    if lemma_id == "p_alpha":
        a, at, p, pt = kw["alpha"], kw["alpha_tilde"], kw["p"], kw["p_tilde"]
        q = kw.get("q", 1.0)
        if not (_in_closed(a, 0, 1) and _in_closed(at, 0, 1)):
            raise ParameterError("p_alpha: alpha and alpha_tilde must lie in [0, 1]")
        if a > at:
            raise ParameterError("p_alpha: requires alpha <= alpha_tilde")
        if a <= 0:
            raise ParameterError("p_alpha: alpha must be positive for the geometric sum to converge")
        if abs((a - 1.0 / p) - (at - 1.0 / pt)) > 1e-12:
            raise ParameterError("p_alpha: requires alpha - 1/p == alpha_tilde - 1/p_tilde")
        if not all(_in_closed(x, 1, INF) for x in (p, pt, q)):
            if not unsafe_extrapolate:
                raise ParameterError("p_alpha: p, p_tilde, q must lie in [1, inf] (use unsafe_extrapolate for the conjectural range)")
        geo = 1.0 / (1.0 - 2.0**-a)
        return float(3.0 ** (1 - a) * (2.0 ** (at + 1.0 / p + 1) * geo + 2.0**at))

    if lemma_id == "alpha_q":
        a, at, q, qt, T = kw["alpha"], kw["alpha_tilde"], kw["q"], kw["q_tilde"], kw["T"]
        if not a < at:
            raise ParameterError("alpha_q: requires alpha < alpha_tilde")
        if not q <= qt:
            raise ParameterError("alpha_q: requires q <= q_tilde")
        if q == qt:
            return float(T ** (at - a))
        if qt == INF:
            E = (at - a) * q
            return float((T**E / E) ** (1.0 / q))
        E = (at - a) * q * qt / (qt - q)
        return float((T**E / E) ** ((qt - q) / (q * qt)))

    if lemma_id == "p":
        p, pt, T = kw["p"], kw["p_tilde"], kw["T"]
        if not p <= pt:
            raise ParameterError("p: requires p <= p_tilde")
        return float(T ** (1.0 / p - (0.0 if pt == INF else 1.0 / pt)))

    raise ParameterError(f"unknown lemma id {lemma_id!r}")

"""Path corpora and a numerical audit of the Besov-scale inequalities.

Each catalog entry turns a sampled input into one ``(lhs, rhs)`` pair.  Claims
with an explicit constant are asserted sample by sample.  Claims that only
hold up to an unspecified constant are audited by ratio stability: the largest
``lhs / rhs`` over seeds must stay within a factor of two when the grid is
refined.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .besov import BesovParams, besov_norm, besov_norm_path
from .core import GridPath, TimeGrid, TwoParamField
from .errors import ParameterError
from .functions import builtin
from .rde import RdeConfig, controlled_compose, rde_solve, rough_path_as_controlled, rough_integral, xi_germ
from .roughpath import ControlledPath, RoughPath, canonical_lift
from .variation import var_field
from .young import YoungConfig, young_integral, young_solve

KINDS = ("gaussian_walk", "fbm_cholesky", "polynomial", "trig", "zigzag")
FBM_MAX_POINTS = 1025
STABILITY_FACTOR = 2.0
RTOL = 1e-9


# ---------------------------------------------------------------------------
# corpus


@dataclass(frozen=True)
class PathGenerator:
    """A deterministic recipe for a grid path with ``n`` points on ``[0, horizon]``."""

    kind: str
    seed: int = 0
    dim: int = 1
    n: int = 257
    H: float = 0.5
    scale: float = 1.0
    horizon: float = 1.0
    degree: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown path kind {self.kind!r}; choose from {KINDS}")
        if self.n < 2 or self.dim < 1:
            raise ParameterError("need at least two points and one dimension")
        if self.kind == "fbm_cholesky":
            if not 0 < self.H < 1:
                raise ParameterError(f"fbm needs H in (0, 1) (got {self.H})")
            if self.n > FBM_MAX_POINTS:
                raise ParameterError(f"fbm by Cholesky is capped at {FBM_MAX_POINTS} points")


def fbm_covariance(times: np.ndarray, H: float) -> np.ndarray:
    s, t = times[:, None], times[None, :]
    return 0.5 * (s ** (2 * H) + t ** (2 * H) - np.abs(t - s) ** (2 * H))


def _fbm_factor(times: np.ndarray, H: float) -> np.ndarray:
    C = fbm_covariance(times, H)
    if not np.allclose(C, C.T, rtol=0, atol=1e-14):
        raise ParameterError("fbm covariance is not symmetric")
    low = float(np.linalg.eigvalsh(C)[0])
    if low < -1e-10 * float(np.abs(C).max()):
        raise ParameterError(f"fbm covariance is not positive semidefinite (eigenvalue {low:.3e})")
    try:
        return linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        # numerically singular (H close to 1): symmetric square root instead
        w, V = np.linalg.eigh(C)
        return V * np.sqrt(np.clip(w, 0.0, None))


def gen_path(g: PathGenerator) -> GridPath:
    grid = TimeGrid.uniform(g.n - 1, g.horizon)
    t = grid.times
    rng = np.random.default_rng(g.seed)
    if g.kind == "gaussian_walk":
        z = rng.standard_normal((g.n - 1, g.dim))
        v = np.vstack([np.zeros(g.dim), np.cumsum(z * math.sqrt(grid.mesh()), axis=0)])
    elif g.kind == "fbm_cholesky":
        z = rng.standard_normal((g.n - 1, g.dim))
        L = _fbm_factor(t[1:], g.H)
        v = np.vstack([np.zeros(g.dim), L @ z])
    elif g.kind == "polynomial":
        c = rng.standard_normal((g.degree + 1, g.dim))
        u = t / g.horizon
        v = np.stack([u**k for k in range(g.degree + 1)], axis=1) @ c
    elif g.kind == "trig":
        amp = rng.standard_normal((3, g.dim))
        freq = rng.uniform(0.5, 4.0, (3, g.dim))
        phase = rng.uniform(0, 2 * math.pi, (3, g.dim))
        u = t[:, None, None] / g.horizon
        v = np.sum(amp * np.sin(2 * math.pi * freq * u + phase), axis=1)
    else:
        v = np.repeat((np.arange(g.n) % 2).astype(float)[:, None], g.dim, axis=1)
    return GridPath(grid, g.scale * v)


# ---------------------------------------------------------------------------
# records


@dataclass
class InequalityRecord:
    claim_id: str
    params: dict
    n: int
    seed: int
    lhs: float
    rhs: float
    constant: float | str
    ratio: float
    passed: bool | None
    skipped: str | None = None

    @classmethod
    def of(cls, claim: "Claim", params: dict, n: int, seed: int, lhs: float, rhs: float) -> "InequalityRecord":
        ratio = _ratio(lhs, rhs)
        if claim.constant is None:
            passed = bool(math.isfinite(ratio))
            const = "empirical"
        else:
            passed = bool(lhs <= claim.constant * rhs * (1 + RTOL) + 1e-300)
            const = claim.constant
        return cls(claim.claim_id, dict(params), n, seed, float(lhs), float(rhs), const, ratio, passed)


def _ratio(lhs: float, rhs: float) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs <= 0 else math.inf


# ---------------------------------------------------------------------------
# norms used by the claims


def _bp(params: dict, k: float = 1.0) -> BesovParams:
    return BesovParams(params["alpha"], params["p"], params["q"]).scaled(k)


def _bn(obj, prm: BesovParams) -> float:
    if isinstance(obj, GridPath):
        return besov_norm_path(obj, prm)
    return besov_norm(obj, prm)


def _V(obj, r: float) -> TwoParamField:
    n = obj.n
    return var_field(obj, r, max_points=n)


def _area(P: RoughPath) -> TwoParamField:
    return P.XX.norms()


# ---------------------------------------------------------------------------
# sample builders


def _walk(n: int, seed: int, dim: int, scale: float = 1.0) -> GridPath:
    return gen_path(PathGenerator("gaussian_walk", seed, dim, n, scale=scale))


def sample_path(n: int, seed: int, params: dict) -> dict:
    return {"f": _walk(n, seed, params.get("dim", 2))}


def sample_rough_pair(n: int, seed: int, params: dict) -> dict:
    """Two correlated left-point lifts with controlled integrands ``phi(X)``, ``phi(X~)``."""
    dim = 2
    X = _walk(n, seed, dim)
    W = _walk(n, seed + 10_000, dim)
    Xt = X + W.scaled(params.get("perturbation", 0.3))
    P, Pt = canonical_lift(X), canonical_lift(Xt)
    phi = builtin("builtin:rotation")
    Y = controlled_compose(phi, rough_path_as_controlled(P))
    Yt = controlled_compose(phi, rough_path_as_controlled(Pt))
    return {"P": P, "Pt": Pt, "Y": Y, "Yt": Yt}


def sample_young_integrand(n: int, seed: int, params: dict) -> dict:
    f = gen_path(PathGenerator("fbm_cholesky", seed, 1, n, H=params.get("H", 0.75)))
    g = gen_path(PathGenerator("fbm_cholesky", seed + 10_000, 1, n, H=params.get("H", 0.75)))
    return {"f": f, "g": g}


def sample_young_ode(n: int, seed: int, params: dict) -> dict:
    X = gen_path(PathGenerator("fbm_cholesky", seed, 1, n, H=params.get("H", 0.75), scale=params.get("scale", 0.1)))
    bump = GridPath(X.grid, params.get("bump", 0.01) * np.sin(math.pi * X.grid.times))
    return {"X": X, "Xt": X + bump, "y0": 0.0, "yt0": params.get("dy0", 0.01)}


def sample_rde_pair(n: int, seed: int, params: dict) -> dict:
    X = _walk(n, seed, 2, params.get("scale", 0.002))
    t = X.grid.times
    bump = GridPath(X.grid, params.get("bump", 5e-4) * np.stack([np.sin(math.pi * t), np.sin(2 * math.pi * t)], 1))
    return {"P": canonical_lift(X), "Pt": canonical_lift(X + bump), "y0": np.array([0.2, 0.1]),
            "yt0": np.array([0.2, 0.1]) + params.get("dy0", 1e-3)}


# ---------------------------------------------------------------------------
# claim evaluators: inputs, params -> (lhs, rhs)


def eval_trivial_direction(s: dict, prm: dict) -> tuple:
    f = s["f"]
    return _bn(f, _bp(prm)), besov_norm(_V(f.distance_field(), prm["r"]), _bp(prm))


def eval_nested_norm(s: dict, prm: dict) -> tuple:
    f = s["f"]
    return besov_norm(_V(f.distance_field(), prm["r"]), _bp(prm)), _bn(f, _bp(prm))


def eval_variation_of_path(s: dict, prm: dict) -> tuple:
    X = s["P"].X
    return _V(X, prm["r"]).sup(), _bn(X, _bp(prm))


def eval_variation_of_area(s: dict, prm: dict) -> tuple:
    P = s["P"]
    return (_V(_area(P), prm["r"] / 2).sup(),
            _bn(P.X, _bp(prm)) ** 2 + besov_norm(_area(P), _bp(prm, 2)))


def eval_variation_of_difference(s: dict, prm: dict) -> tuple:
    dX = s["P"].X - s["Pt"].X
    return _V(dX, prm["r"]).sup(), _bn(dX, _bp(prm))


def eval_variation_of_area_difference(s: dict, prm: dict) -> tuple:
    P, Pt = s["P"], s["Pt"]
    dXX = (P.XX - Pt.XX).norms()
    N = _bn(P.X, _bp(prm)) + _bn(Pt.X, _bp(prm))
    return _V(dXX, prm["r"] / 2).sup(), N * _bn(P.X - Pt.X, _bp(prm)) + besov_norm(dXX, _bp(prm, 2))


def eval_variation_of_derivative(s: dict, prm: dict) -> tuple:
    Yp = s["Y"].Yp
    return _V(Yp, prm["r"]).sup(), _bn(Yp, _bp(prm))


def eval_variation_of_remainder(s: dict, prm: dict) -> tuple:
    Y = s["Y"]
    R = Y.remainder()
    b = _bp(prm)
    return (_V(R, prm["r"] / 2).sup(),
            _bn(Y.Yp, b) ** 2 + _bn(Y.X.X, b) ** 2 + besov_norm(R, _bp(prm, 2)))


def eval_nested_remainder_difference(s: dict, prm: dict) -> tuple:
    Y, Yt = s["Y"], s["Yt"]
    b, b2 = _bp(prm), _bp(prm, 2)
    dR = Y.remainder() - Yt.remainder()
    lhs = besov_norm(_V(dR, prm["r"] / 2), b2)
    rhs = besov_norm(dR, b2) + _bn(Y.Yp - Yt.Yp, b) * _bn(Y.X.X, b) + _bn(Yt.Yp, b) * _bn(Y.X.X - Yt.X.X, b)
    return lhs, rhs


def eval_nested_area(s: dict, prm: dict) -> tuple:
    P = s["P"]
    b2 = _bp(prm, 2)
    return besov_norm(_V(_area(P), prm["r"] / 2), b2), besov_norm(_area(P), b2) + _bn(P.X, _bp(prm)) ** 2


def eval_nested_remainder(s: dict, prm: dict) -> tuple:
    Y = s["Y"]
    b, b2 = _bp(prm), _bp(prm, 2)
    R = Y.remainder()
    return besov_norm(_V(R, prm["r"] / 2), b2), besov_norm(R, b2) + _bn(Y.Yp, b) * _bn(Y.X.X, b)


def _nested_area_difference_rhs(P, Pt, prm) -> float:
    b = _bp(prm)
    dXX = (P.XX - Pt.XX).norms()
    return besov_norm(dXX, _bp(prm, 2)) + _bn(P.X - Pt.X, b) * (_bn(P.X, b) + _bn(Pt.X, b))


def eval_nested_area_difference(s: dict, prm: dict) -> tuple:
    P, Pt = s["P"], s["Pt"]
    dXX = (P.XX - Pt.XX).norms()
    return besov_norm(_V(dXX, prm["r"] / 2), _bp(prm, 2)), _nested_area_difference_rhs(P, Pt, prm)


def eval_nested_area_difference_alpha(s: dict, prm: dict) -> tuple:
    P, Pt = s["P"], s["Pt"]
    dXX = (P.XX - Pt.XX).norms()
    return besov_norm(_V(dXX, prm["r"] / 2), _bp(prm)), _nested_area_difference_rhs(P, Pt, prm)


def _young_params(prm: dict) -> tuple:
    b0 = BesovParams(prm["alpha0"], prm["p0"], prm["q0"])
    b1 = BesovParams(prm["alpha1"], prm["p1"], prm["q1"])
    b = BesovParams(prm["alpha0"] + prm["alpha1"], _harmonic(prm["p0"], prm["p1"]), _harmonic(prm["q0"], prm["q1"]))
    return b0, b1, b


def _harmonic(a: float, b: float) -> float:
    return 1.0 / (1.0 / a + 1.0 / b)


def _young_exponents(prm: dict) -> tuple:
    # 1/alpha_i < r_i <= p_i with 1/r0 + 1/r1 > 1
    r0 = min(prm["p0"], 0.5 * (1 / prm["alpha0"] + min(prm["p0"], 2.0)))
    r1 = min(prm["p1"], 0.5 * (1 / prm["alpha1"] + min(prm["p1"], 2.0)))
    return r0, r1


def eval_young_integral_besov(s: dict, prm: dict) -> tuple:
    f, g = s["f"], s["g"]
    b0, b1, b = _young_params(prm)
    r0, r1 = _young_exponents(prm)
    I = young_integral(f, g, r0, r1, bound=False)
    Z = I.Z.values.reshape(f.n, -1)
    fv, gv = f.values.reshape(f.n, -1), g.values.reshape(g.n, -1)
    n = f.n
    err = np.zeros((n, n))
    for a in range(n):
        xi = fv[a, 0] * (gv[a:] - gv[a])
        err[a, a:] = np.linalg.norm(Z[a:] - Z[a] - xi, axis=1)
    lhs = besov_norm(TwoParamField(f.grid, err), b)
    return lhs, _bn(f, b0) * _bn(g, b1)


def eval_rough_integral_stability_besov(s: dict, prm: dict) -> tuple:
    P, Pt, Y, Yt = s["P"], s["Pt"], s["Y"], s["Yt"]
    b, b2, b3 = _bp(prm), _bp(prm, 2), _bp(prm, 3)
    Z, Zt = rough_integral(Y).Z, rough_integral(Yt).Z
    err = (Z.Y.increments().materialized() - xi_germ(Y)) - (Zt.Y.increments().materialized() - xi_germ(Yt))
    lhs = besov_norm(err, b3)
    nX, nXt, ndX = _bn(P.X, b), _bn(Pt.X, b), _bn(P.X - Pt.X, b)
    ndYp, nYtp = _bn(Y.Yp - Yt.Yp, b), _bn(Yt.Yp, b)
    ndR = besov_norm(Y.remainder() - Yt.remainder(), b2)
    rhs = ((ndR + ndYp * nX + nYtp * ndX) * nX
           + (besov_norm(Yt.remainder(), b2) + nYtp * nXt) * ndX
           + ndYp * (besov_norm(_area(P), b2) + nX**2)
           + nYtp * (besov_norm((P.XX - Pt.XX).norms(), b2) + ndX * (nX + nXt)))
    return lhs, rhs


def young_gamma_tilde(csew: float, beta: float, eps: float, Phi0: float, Phi1: float, Phi1_beta: float,
                      dX_norm: float, dy0: float, dphi_holder: float = 0.0, dphi_sup: float = 0.0) -> float:
    k = csew * 2 ** (beta + 1) * Phi1_beta / (1 + beta) * Phi0**beta * eps**beta
    return (((csew + 1) * Phi1 + k) * Phi0 * dX_norm + (k + Phi1) * dy0
            + csew * 2**beta * Phi0**beta * eps**beta * dphi_holder + dphi_sup)


def eval_young_lipschitz_besov(s: dict, prm: dict) -> tuple:
    phi = builtin("builtin:inv_quad")
    beta = prm["beta"]
    cfg = YoungConfig(r=prm["r"], alpha=beta, check=False, max_window=FBM_MAX_POINTS)
    S = young_solve(phi, s["X"], s["y0"], cfg)
    St = young_solve(phi, s["Xt"], s["yt0"], cfg)
    b = _bp(prm)
    h = phi.holder(beta)
    dX = s["X"] - s["Xt"]
    gam = young_gamma_tilde(cfg.csew, beta, S.eps, h.Phi0, h.Phi1, h.Phi1_alpha, _bn(dX, b),
                            abs(float(s["y0"]) - float(s["yt0"])))
    lhs = _bn(S.path - St.path, b)
    return lhs, gam * _bn(s["X"], b) + 2 * h.Phi0 * _bn(dX, b)


def _rde_pair_solutions(s: dict, prm: dict) -> tuple:
    if "solutions" not in s:
        phi = builtin("builtin:rotation")
        cfg = RdeConfig(r=prm["r"], check="none", windows=False, max_window=s["P"].n)
        s["solutions"] = (rde_solve(phi, s["P"], s["y0"], cfg).path, rde_solve(phi, s["Pt"], s["yt0"], cfg).path)
    return s["solutions"]


def _rough_norm(P: RoughPath, prm: dict) -> float:
    return _bn(P.X, _bp(prm)) + math.sqrt(besov_norm(_area(P), _bp(prm, 2)))


def eval_rde_lipschitz_besov_path(s: dict, prm: dict) -> tuple:
    Y, Yt = _rde_pair_solutions(s, prm)
    P, Pt = s["P"], s["Pt"]
    b = _bp(prm)
    dy0 = float(np.linalg.norm(np.asarray(s["y0"]) - np.asarray(s["yt0"])))
    rhs = ((_rough_norm(P, prm) + _rough_norm(Pt, prm)) * dy0
           + (1 + _bn(P.X, b) + _bn(Pt.X, b)) * _bn(P.X - Pt.X, b)
           + besov_norm((P.XX - Pt.XX).norms(), _bp(prm, 2)))
    return _bn(Y.Y - Yt.Y, b), rhs


def eval_rde_lipschitz_besov_remainder(s: dict, prm: dict) -> tuple:
    Y, Yt = _rde_pair_solutions(s, prm)
    P, Pt = s["P"], s["Pt"]
    b, b2 = _bp(prm), _bp(prm, 2)
    dy0 = float(np.linalg.norm(np.asarray(s["y0"]) - np.asarray(s["yt0"])))
    N, Nt = _rough_norm(P, prm), _rough_norm(Pt, prm)
    nX, nXt = _bn(P.X, b), _bn(Pt.X, b)
    rhs = ((N**2 + Nt**2 + nX * nXt) * dy0 + (N + Nt) * _bn(P.X - Pt.X, b)
           + besov_norm((P.XX - Pt.XX).norms(), b2))
    return besov_norm(Y.remainder() - Yt.remainder(), b2), rhs


# ---------------------------------------------------------------------------
# hypotheses


def _nested_hyp(prm: dict) -> str | None:
    a, p, r = prm["alpha"], prm["p"], prm["r"]
    if not (a > 0 and r >= 1 and 1 / a < r <= p):
        return f"needs 1/alpha < r <= p and r >= 1 (alpha={a}, r={r}, p={p})"
    return None


def _rough_hyp(prm: dict) -> str | None:
    if not 2 <= prm["r"] < 3:
        return f"rough paths need r in [2, 3) (got {prm['r']})"
    return _nested_hyp(prm)


def _area_alpha_hyp(prm: dict) -> str | None:
    why = _rough_hyp(prm)
    if why:
        return why
    if not prm["p"] >= 1 or not prm["q"] >= 0.5:
        return f"needs p >= 1 and q >= 1/2 (p={prm['p']}, q={prm['q']})"
    return None


def _young_integral_hyp(prm: dict) -> str | None:
    a0, a1, p0, p1 = prm["alpha0"], prm["alpha1"], prm["p0"], prm["p1"]
    if not a0 + a1 > 1:
        return f"needs alpha0 + alpha1 > 1 (got {a0 + a1})"
    if not (a0 > 1 / p0 and a1 > 1 / p1):
        return "needs alpha_i > 1/p_i"
    if not (0 < a0 <= 1 and 0 < a1 <= 1):
        return "needs alpha_i in (0, 1]"
    r0, r1 = _young_exponents(prm)
    if not (1 / a0 < r0 <= p0 and 1 / a1 < r1 <= p1 and 1 / r0 + 1 / r1 > 1):
        return "no variation exponents r0, r1 with 1/r0 + 1/r1 > 1 fit these parameters"
    return None


def _rough_integral_hyp(prm: dict) -> str | None:
    a, p = prm["alpha"], prm["p"]
    if not (a > 1 / 3 and p >= 2 and 1 / a <= p):
        return f"needs alpha > 1/3, p >= 2 and 1/alpha <= p (alpha={a}, p={p})"
    return _rough_hyp(prm)


def _young_lipschitz_hyp(prm: dict) -> str | None:
    a, b, p, r = prm["alpha"], prm["beta"], prm["p"], prm["r"]
    if not (a > 0.5 and b > 0 and 1 / a < 1 + b and p >= 1 and 1 / a < p):
        return f"needs alpha > 1/2, 1/alpha < 1 + beta and 1/alpha < p (alpha={a}, beta={b}, p={p})"
    if not (1 <= r < 2 and 1 / a < r <= p and r < 1 + b):
        return f"needs r in [1, 2) with 1/alpha < r <= p and r < 1 + beta (r={r})"
    return None


def _rde_lipschitz_hyp(prm: dict) -> str | None:
    a, p, q = prm["alpha"], prm["p"], prm["q"]
    if not q >= 0.5:
        return f"proven only for q >= 1/2 (got q={q})"
    if not (a > 1 / 3 and p >= 2 and 1 / a < p):
        return f"needs alpha > 1/3, p >= 2 and 1/alpha < p (alpha={a}, p={p})"
    return _rough_hyp(prm)


# ---------------------------------------------------------------------------
# catalog


NESTED = {"alpha": 0.45, "p": 4.0, "q": 4.0, "r": 2.5}
YOUNG_INT = {"alpha0": 0.6, "p0": 4.0, "q0": 4.0, "alpha1": 0.6, "p1": 4.0, "q1": 4.0}
YOUNG_LIP = {"alpha": 0.6, "p": 4.0, "q": 4.0, "r": 1.8, "beta": 1.0}


@dataclass(frozen=True)
class Claim:
    claim_id: str
    group: str
    sampler: object
    evaluate: object
    hypotheses: object
    params: tuple
    constant: float | None = None
    description: str = ""


def _c(claim_id, group, sampler, evaluate, hyp, params, constant=None, description=""):
    return Claim(claim_id, group, sampler, evaluate, hyp, tuple(params), constant, description)


CATALOG = {
    c.claim_id: c
    for c in [
        _c("trivial_direction", "trivial", sample_path, eval_trivial_direction, _nested_hyp, [NESTED], 1.0,
           "||f|| <= ||V^r f|| in the same Besov norm"),
        _c("nested_norm", "nested_norm", sample_path, eval_nested_norm, _nested_hyp, [NESTED, {**NESTED, "q": 2.0}],
           None, "||V^r f|| <~ ||f||"),
        _c("variation_path", "embedding", sample_rough_pair, eval_variation_of_path, _rough_hyp, [NESTED], None,
           "V^r X <~ ||X||"),
        _c("variation_area", "embedding", sample_rough_pair, eval_variation_of_area, _rough_hyp, [NESTED], None,
           "V^{r/2} XX <~ ||X||^2 + ||XX||"),
        _c("variation_path_difference", "embedding", sample_rough_pair, eval_variation_of_difference, _rough_hyp,
           [NESTED], None, "V^r dX <~ ||dX||"),
        _c("variation_area_difference", "embedding", sample_rough_pair, eval_variation_of_area_difference, _rough_hyp,
           [NESTED], None, "V^{r/2} dXX <~ (||X|| + ||X~||) ||dX|| + ||dXX||"),
        _c("variation_derivative", "embedding", sample_rough_pair, eval_variation_of_derivative, _rough_hyp, [NESTED],
           None, "V^r Y' <~ ||Y'||"),
        _c("variation_remainder", "embedding", sample_rough_pair, eval_variation_of_remainder, _rough_hyp, [NESTED],
           None, "V^{r/2} R <~ ||Y'||^2 + ||X||^2 + ||R||"),
        _c("nested_remainder_difference", "nested_rough", sample_rough_pair, eval_nested_remainder_difference,
           _rough_hyp, [NESTED], None, "||V^{r/2} dR|| <~ ||dR|| + ||dY'|| ||X|| + ||Y~'|| ||dX||"),
        _c("nested_area", "nested_rough", sample_rough_pair, eval_nested_area, _rough_hyp, [NESTED], None,
           "||V^{r/2} XX|| <~ ||XX|| + ||X||^2"),
        _c("nested_remainder", "nested_rough", sample_rough_pair, eval_nested_remainder, _rough_hyp, [NESTED], None,
           "||V^{r/2} R|| <~ ||R|| + ||Y'|| ||X||"),
        _c("nested_area_difference", "nested_rough", sample_rough_pair, eval_nested_area_difference, _rough_hyp,
           [NESTED], None, "||V^{r/2} dXX|| <~ ||dXX|| + ||dX|| (||X|| + ||X~||)"),
        _c("nested_area_difference_alpha", "nested_rough", sample_rough_pair, eval_nested_area_difference_alpha,
           _area_alpha_hyp, [NESTED], None, "||V^{r/2} dXX||_{alpha,p,q} <~ (||X|| + ||X~||) ||dX|| + ||dXX||"),
        _c("young_integral_besov", "integration", sample_young_integrand, eval_young_integral_besov,
           _young_integral_hyp, [YOUNG_INT], None, "||I Xi - Xi|| <~ ||f|| ||g||"),
        _c("rough_integral_stability_besov", "integration", sample_rough_pair, eval_rough_integral_stability_besov,
           _rough_integral_hyp, [NESTED], None, "Besov stability of the rough integral"),
        _c("young_lipschitz_besov", "lipschitz", sample_young_ode, eval_young_lipschitz_besov, _young_lipschitz_hyp,
           [YOUNG_LIP], None, "||dY|| <~ gamma~ ||X|| + 2 Phi0 ||dX||"),
        _c("rde_lipschitz_besov_path", "lipschitz", sample_rde_pair, eval_rde_lipschitz_besov_path,
           _rde_lipschitz_hyp, [NESTED], None, "Besov Lipschitz estimate of the RDE solution"),
        _c("rde_lipschitz_besov_remainder", "lipschitz", sample_rde_pair, eval_rde_lipschitz_besov_remainder,
           _rde_lipschitz_hyp, [NESTED], None, "Besov Lipschitz estimate of the RDE remainder"),
    ]
}
GROUPS = sorted({c.group for c in CATALOG.values()})


def catalog_complete() -> list:
    """Claim ids lacking a sampler, evaluator or hypothesis check (empty when complete)."""
    return [k for k, c in CATALOG.items() if not (callable(c.sampler) and callable(c.evaluate) and callable(c.hypotheses))]


def select(catalog="all") -> list:
    if isinstance(catalog, str):
        names = [s.strip() for s in catalog.split(",") if s.strip()]
    else:
        names = list(catalog)
    out = []
    for name in names:
        if name == "all":
            out.extend(CATALOG.values())
        elif name in CATALOG:
            out.append(CATALOG[name])
        elif name in GROUPS:
            out.extend(c for c in CATALOG.values() if c.group == name)
        else:
            raise ParameterError(f"unknown claim or group {name!r}; groups are {GROUPS}")
    seen, uniq = set(), []
    for c in out:
        if c.claim_id not in seen:
            seen.add(c.claim_id)
            uniq.append(c)
    return uniq


# ---------------------------------------------------------------------------
# running


@dataclass
class ClaimSummary:
    claim_id: str
    params: dict
    max_ratio_by_size: dict
    explicit: bool
    passed: bool
    stable: bool | None
    skipped: str | None = None


@dataclass
class SuiteReport:
    records: list = field(default_factory=list)
    summaries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.summaries if s.skipped is None)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "summaries": [asdict(s) for s in self.summaries],
            "records": [asdict(r) for r in self.records],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, default=_json_default)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["claim_id", "params", "n", "seed", "lhs", "rhs", "ratio", "pass"])
            for r in self.records:
                if r.skipped is None:
                    w.writerow([r.claim_id, json.dumps(r.params, sort_keys=True), r.n, r.seed,
                                f"{r.lhs:.17g}", f"{r.rhs:.17g}", f"{r.ratio:.17g}", r.passed])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def ratio_stable(max_by_size: dict, factor: float = STABILITY_FACTOR) -> bool:
    vals = list(max_by_size.values())
    if not vals or not all(math.isfinite(v) for v in vals):
        return False
    hi, lo = max(vals), min(vals)
    if hi == 0:
        return True
    return lo > 0 and hi / lo <= factor


def evaluate_claim(claim: Claim, sample: dict, params: dict, n: int = 0, seed: int = 0) -> InequalityRecord:
    why = claim.hypotheses(params)
    if why:
        return InequalityRecord(claim.claim_id, dict(params), n, seed, math.nan, math.nan,
                                claim.constant if claim.constant is not None else "empirical", math.nan, None, why)
    lhs, rhs = claim.evaluate(sample, params)
    return InequalityRecord.of(claim, params, n, seed, lhs, rhs)


def run_suite(catalog="all", seeds: int = 20, sizes=(256, 512), params: dict | None = None,
              progress=None) -> SuiteReport:
    """Evaluate the selected claims on ``seeds`` samples of every grid size (cell counts).

    ``params`` maps claim ids to lists of parameter dicts that replace the defaults.
    """
    if seeds < 1:
        raise ParameterError("need at least one seed")
    report = SuiteReport()
    for claim in select(catalog):
        for prm in (params or {}).get(claim.claim_id, claim.params):
            why = claim.hypotheses(prm)
            if why:
                report.records.append(evaluate_claim(claim, {}, prm))
                report.summaries.append(ClaimSummary(claim.claim_id, dict(prm), {}, claim.constant is not None,
                                                     True, None, why))
                continue
            by_size = {}
            ok = True
            for cells in sizes:
                worst = 0.0
                for seed in range(seeds):
                    sample = claim.sampler(int(cells) + 1, seed, prm)
                    rec = evaluate_claim(claim, sample, prm, int(cells) + 1, seed)
                    report.records.append(rec)
                    ok &= bool(rec.passed)
                    worst = max(worst, rec.ratio)
                by_size[int(cells)] = worst
                if progress:
                    progress(claim.claim_id, cells, worst)
            explicit = claim.constant is not None
            stable = None if explicit else ratio_stable(by_size)
            passed = ok if explicit else (ok and bool(stable))
            report.summaries.append(ClaimSummary(claim.claim_id, dict(prm), by_size, explicit, passed, stable))
    return report

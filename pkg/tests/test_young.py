import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from roughkit.core import GridPath, TimeGrid
from roughkit.errors import DiagnosticError, GridTooCoarseError, ParameterError
from roughkit.functions import HolderFunction, builtin
from roughkit.sewing import zeta
from roughkit.variation import var_value
from roughkit.young import (
    YoungConfig,
    apriori_check,
    composition_stability_check,
    gamma_explicit,
    greedy_windows,
    integration_stability_check,
    picard_distance,
    smallness_epsilon,
    smallness_roots,
    taylor4_bound,
    young_integral,
    young_lipschitz_gamma,
    young_solve,
)


def _walk(rng, n, dim=1, scale=1.0, horizon=1.0):
    g = TimeGrid.uniform(n, horizon)
    x = np.vstack([np.zeros((1, dim)), np.cumsum(rng.standard_normal((n, dim)), axis=0)])
    return GridPath(g, x * scale)


def _small_walk(rng, n, eps, frac=0.5, dim=1):
    X = _walk(rng, n, dim)
    return X.scaled(frac * eps / var_value(X, 1.5))


# --- integral ------------------------------------------------------------------


def test_integral_t_dt():
    g = TimeGrid.uniform(1024, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    I = young_integral(X, X, 1.5, 1.5, bound=False)
    assert abs(I.Z.values[-1, 0] - 0.5) <= 2e-3


def test_integral_t_dt2():
    g = TimeGrid.uniform(2048, 1.0)
    Y = GridPath.from_function(g, lambda t: t)
    X = GridPath.from_function(g, lambda t: t * t)
    I = young_integral(Y, X, 1.5, 1.5, bound=False)
    assert abs(I.Z.values[-1, 0] - 2.0 / 3.0) <= 5e-3


def test_integral_first_order_convergence():
    errs = []
    for n in (256, 512, 1024, 2048):
        g = TimeGrid.uniform(n, 1.0)
        Y = GridPath.from_function(g, lambda t: t)
        X = GridPath.from_function(g, lambda t: t * t)
        errs.append(abs(young_integral(Y, X, 1.5, 1.5, bound=False).Z.values[-1, 0] - 2 / 3))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(1.8 < q < 2.2 for q in ratios), ratios


def test_integral_callable_integrand():
    g = TimeGrid.uniform(64, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    a = young_integral(lambda x: x**2, X, 1.5, 1.5, bound=False).Z.values
    b = young_integral(GridPath(g, X.values**2), X, 1.5, 1.5, bound=False).Z.values
    assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("r1,r2", [(1.5, 1.5), (1.2, 1.9), (1.9, 1.2)])
def test_integral_bound_on_walks(seed, r1, r2):
    rng = np.random.default_rng(seed)
    Y, X = _walk(rng, 96), _walk(rng, 96)
    I = young_integral(Y, X, r1, r2)
    assert I.bound is not None
    assert I.violations() == 0


def test_integral_vector_driver_matrix_integrand():
    rng = np.random.default_rng(3)
    X = _walk(rng, 64, dim=2)
    Y = GridPath(X.grid, rng.standard_normal((65, 3, 2)))
    I = young_integral(Y, X, 1.5, 1.5)
    assert I.Z.values.shape == (65, 3)
    assert I.violations() == 0


def test_integral_theta_error():
    g = TimeGrid.uniform(8, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    with pytest.raises(ParameterError):
        young_integral(X, X, 2.0, 2.0)


def test_violations_needs_bound():
    g = TimeGrid.uniform(8, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    with pytest.raises(ParameterError):
        young_integral(X, X, 1.5, 1.5, bound=False).violations()


# --- smallness -----------------------------------------------------------------


def _unit_bounds():
    f = lambda y: np.zeros(np.shape(y)[:-1] + (1, 1))
    return HolderFunction(f, lambda y: np.zeros(np.shape(y)[:-1] + (1, 1, 1)), 1.0, 1.0, 1.0, 1.0, check=False)


def test_zeta_four_thirds():
    assert zeta(4 / 3) == pytest.approx(3.6009, abs=1e-4)


def test_smallness_lipschitz_root():
    roots = smallness_roots(_unit_bounds(), 1.5, 1.0)
    assert roots["lipschitz"] == pytest.approx(1 / (8 * 2 ** (1 / 3) * 3.6009), rel=1e-4)
    assert roots["lipschitz"] == pytest.approx(0.02756, abs=1e-5)
    assert smallness_epsilon(_unit_bounds(), 1.5, 1.0) == min(roots.values())


def test_smallness_doubling_phi1_halves_root():
    h = _unit_bounds()
    h2 = HolderFunction(h.phi, h.dphi, 1.0, 1.0, 2.0, 1.0, check=False)
    assert smallness_roots(h2, 1.5, 1.0)["lipschitz"] == pytest.approx(smallness_roots(h, 1.5, 1.0)["lipschitz"] / 2)


def test_smallness_basic_set_is_larger():
    h = _unit_bounds()
    s, b = smallness_roots(h, 1.5, 1.0), smallness_roots(h, 1.5, 1.0, strengthened=False)
    for k in s:
        assert b[k] >= s[k]


def test_smallness_apriori_root_exponent():
    # the apriori root scales like Phi_alpha^{-1/alpha}
    f = _unit_bounds()
    for a in (0.9, 0.6, 0.3):
        base = HolderFunction(f.phi, f.dphi, 1.0, 1.0, 1.0, 1.0, alpha=a, check=False)
        dbl = HolderFunction(f.phi, f.dphi, 1.0, 2.0, 1.0, 1.0, alpha=a, check=False)
        r = 1.0 + a / 2
        q = smallness_roots(base, r, a)["apriori"] / smallness_roots(dbl, r, a)["apriori"]
        assert q == pytest.approx(2 ** (1 / a))


def test_smallness_errors():
    f = _unit_bounds()
    with pytest.raises(ParameterError):
        smallness_roots(HolderFunction(f.phi, f.dphi, 0.0, 1.0, 1.0, 1.0, check=False), 1.5, 1.0)
    with pytest.raises(ParameterError):
        smallness_roots(HolderFunction(f.phi, f.dphi, 1.0, 1.0, 0.0, 1.0, check=False), 1.5, 1.0)
    with pytest.raises(ParameterError):
        smallness_roots(f, 2.0, 1.0)


def test_config_validation():
    with pytest.raises(ParameterError):
        YoungConfig(r=2.0)
    with pytest.raises(ParameterError):
        YoungConfig(r=1.6, alpha=0.5)
    with pytest.raises(ParameterError):
        YoungConfig(eps=-1.0)
    cfg = YoungConfig()
    assert cfg.theta == pytest.approx(4 / 3)
    assert cfg.csew == pytest.approx(2 ** (1 / 3) * zeta(4 / 3))


def test_eps_above_cap_rejected():
    g = TimeGrid.uniform(16, 0.01)
    X = GridPath.from_function(g, lambda t: t)
    with pytest.raises(ParameterError):
        young_solve(builtin("inv_quad"), X, 0.0, YoungConfig(eps=1.0))


# --- windows and metric --------------------------------------------------------


def test_greedy_windows_cover_and_are_maximal(rng):
    X = _walk(rng, 300, scale=0.01)
    eps = 0.05
    W = greedy_windows(X, 1.5, eps, max_window=200)
    assert W[0][0] == 0 and W[-1][1] == X.n - 1
    for (a, b), (c, _) in zip(W, W[1:]):
        assert b == c
    for a, b in W:
        assert var_value(X, 1.5, (a, b)) < eps
        if b < X.n - 1 and b - a + 1 < 200:
            assert var_value(X, 1.5, (a, b + 1)) >= eps


def test_greedy_windows_too_coarse():
    g = TimeGrid.uniform(4, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    with pytest.raises(GridTooCoarseError):
        greedy_windows(X, 1.5, 0.1)


def test_picard_distance_zero_over_zero():
    g = TimeGrid.uniform(8, 1.0)
    Z = GridPath(g, np.zeros((9, 1)))
    from roughkit.variation import var_field

    assert picard_distance(Z, var_field(Z, 1.5), 1.5) == 0.0
    X = GridPath.from_function(g, lambda t: t)
    assert picard_distance(X, var_field(Z, 1.5), 1.5) == math.inf
    assert picard_distance(X.scaled(3.0), var_field(X, 1.5), 1.5) == pytest.approx(3.0)


# --- solver --------------------------------------------------------------------


def test_solve_zero_phi(rng):
    X = _walk(rng, 64, scale=0.001)
    S = young_solve(builtin("zero"), X, 0.7)
    assert np.all(S.path.values == 0.7)


def test_solve_constant_driver():
    g = TimeGrid.uniform(64, 1.0)
    X = GridPath(g, np.full((65, 1), 2.5))
    S = young_solve(builtin("inv_quad"), X, -0.3)
    assert np.all(S.path.values == -0.3)


def test_solve_inv_quad_implicit_oracle():
    g = TimeGrid.uniform(4096, 4 / 3)
    X = GridPath.from_function(g, lambda t: t)
    S = young_solve(builtin("inv_quad"), X, 0.0)
    assert abs(S.path.values[-1, 0] - 1.0) <= 1e-4
    oracle = np.array([brentq(lambda y, t=t: y + y**3 / 3 - t, -1.0, 2.0) for t in g.times[::64]])
    assert np.abs(S.path.values[::64, 0] - oracle).max() <= 1e-4
    assert S.max_contraction <= 0.55
    assert all(w.converged and w.solution_space["violations"] == 0 for w in S.windows)


def test_solve_first_order_convergence_to_ode():
    # dy = phi(y) cos t dt, so y + y^3/3 = sin t
    errs = []
    for n in (512, 1024, 2048):
        g = TimeGrid.uniform(n, 1.0)
        X = GridPath.from_function(g, np.sin)
        Y = young_solve(builtin("inv_quad"), X, 0.0).path.values[:, 0]
        oracle = np.array([brentq(lambda y, t=t: y + y**3 / 3 - math.sin(t), -1.0, 2.0) for t in g.times])
        errs.append(np.abs(Y - oracle).max())
    assert all(1.7 < a / b < 2.3 for a, b in zip(errs, errs[1:])), errs


@pytest.mark.parametrize("seed", range(4))
def test_solve_walk_apriori_and_contraction(seed):
    rng = np.random.default_rng(seed)
    X = _walk(rng, 400, scale=0.004)
    phi = builtin("atan_family")
    S = young_solve(phi, X, 0.2)
    assert S.max_contraction <= 0.5 + 0.05
    for w in S.windows:
        seg_Y, seg_X = S.path.sub(w.start, w.end), X.sub(w.start, w.end)
        assert apriori_check(seg_Y, seg_X, 1.5, phi.Phi0)["violations"] == 0


def test_solve_global_apriori_small_grid(rng):
    X = _walk(rng, 256, scale=0.003)
    phi = builtin("sin")
    S = young_solve(phi, X, 1.0)
    assert apriori_check(S.path, X, 1.5, phi.Phi0)["violations"] == 0


def test_solve_vector_equation(rng):
    X = _walk(rng, 200, dim=2, scale=0.003)
    S = young_solve(builtin("rotation"), X, [0.1, -0.2])
    assert S.path.values.shape == (201, 2)
    assert S.max_contraction <= 0.55


def test_solve_grid_too_coarse():
    g = TimeGrid.uniform(4, 1.0)
    X = GridPath.from_function(g, lambda t: t)
    with pytest.raises(GridTooCoarseError):
        young_solve(builtin("inv_quad"), X, 0.0)


def test_solve_iteration_cap_is_diagnostic():
    g = TimeGrid.uniform(256, 1.0)
    X = GridPath.from_function(g, lambda t: 0.01 * t)
    with pytest.raises(DiagnosticError):
        young_solve(builtin("inv_quad"), X, 0.0, YoungConfig(max_iter=1, tol=1e-30))


def test_solve_shape_errors():
    g = TimeGrid.uniform(8, 0.001)
    X = GridPath(g, np.zeros((9, 3)))
    with pytest.raises(ParameterError):
        young_solve(builtin("inv_quad"), X, 0.0)
    with pytest.raises(ParameterError):
        young_solve(builtin("rotation"), GridPath(g, np.zeros((9, 2))), [0.0, 0.0, 0.0])


def test_solution_log_dict(rng):
    X = _walk(rng, 64, scale=0.002)
    d = young_solve(builtin("inv_quad"), X, 0.0).to_dict()
    assert set(d) == {"eps", "max_contraction", "windows"}
    assert {"start", "end", "iterations", "distances", "solution_space"} <= set(d["windows"][0])


# --- Lipschitz stability -------------------------------------------------------


def test_lipschitz_identical_data(rng):
    phi = builtin("atan_family").holder(1.0)
    X = _small_walk(rng, 100, smallness_epsilon(phi))
    R = young_lipschitz_gamma(phi, phi, X, X, 0.3, 0.3)
    assert R.gamma == 0.0
    assert all(v == 0.0 for v in R.terms.values())
    assert np.all(R.Y.values == R.Yt.values)
    assert R.check["violations"] == 0


def test_lipschitz_initial_perturbation(rng):
    phi = builtin("atan_family").holder(1.0)
    X = _small_walk(rng, 100, smallness_epsilon(phi))
    R = young_lipschitz_gamma(phi, phi, X, X, 0.0, 0.01)
    assert R.gamma > 0
    assert R.check["violations"] == 0


def test_lipschitz_constant_shift(rng):
    phi = builtin("atan_family").holder(1.0)
    X = _small_walk(rng, 100, smallness_epsilon(phi))
    R = young_lipschitz_gamma(phi, phi.shifted(0.01), X, X, 0.0, 0.0, dphi_sup=0.01, dphi_holder=0.0)
    assert R.terms["germ_dphi"] == pytest.approx(0.01)
    assert R.check["violations"] == 0


def test_lipschitz_driver_perturbation(rng):
    phi = builtin("inv_quad").holder(1.0)
    eps = smallness_epsilon(phi)
    X = _small_walk(rng, 120, eps)
    Xt = X + _small_walk(rng, 120, eps, frac=0.1)
    R = young_lipschitz_gamma(phi, phi, X, Xt, 0.0, 0.0)
    assert R.check["violations"] == 0


def test_lipschitz_gamma_doubles_the_sum():
    cfg = YoungConfig()
    g, terms = gamma_explicit(cfg, 0.01, 1.0, 1.0, 1.0, 0.1, 0.2, 0.3, 0.4)
    assert g == pytest.approx(2 * sum(terms.values()))


def test_lipschitz_errors(rng):
    phi = builtin("atan_family").holder(1.0)
    X = _small_walk(rng, 50, smallness_epsilon(phi))
    with pytest.raises(ParameterError):
        young_lipschitz_gamma(phi, phi.shifted(0.01), X, X, 0.0, 0.0)
    with pytest.raises(ParameterError):
        young_lipschitz_gamma(phi, phi.shifted(0.5), X, X, 0.0, 0.0, dphi_sup=0.01, dphi_holder=0.0)
    with pytest.raises(ParameterError):
        young_lipschitz_gamma(phi, phi, X.scaled(10.0), X, 0.0, 0.0)


# --- pointwise and interval lemmas ---------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 1.0), st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_taylor4_pointwise(seed, alpha, a, b):
    rng = np.random.default_rng(seed)
    phi, phit = builtin(f"sin:a={a}"), builtin(f"sin:a={b}")
    N = 200
    pts = [rng.standard_normal((N, 1)) * rng.choice([0.01, 1.0, 5.0]) for _ in range(4)]
    # [phi - phit]_alpha <= Lip^alpha (2 sup)^(1 - alpha)
    lip = a + b
    holder = lip**alpha * 4.0 ** (1 - alpha)
    lhs, rhs = taylor4_bound(phi, phit, *pts, dphi_holder=holder, alpha=alpha)
    assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_composition_stability_on_solver_outputs(seed):
    rng = np.random.default_rng(seed)
    phi = builtin("atan_family")
    X = _walk(rng, 120, scale=0.004)
    Y = young_solve(phi, X, 0.0).path
    Yt = young_solve(phi, X, 0.05).path
    rep = composition_stability_check(phi, phi, Y, Yt, 1.5, 1.0, 0.0)
    assert rep["violations"] == 0
    psi = builtin("atan_family:a=1.2")
    rep = composition_stability_check(phi, psi, Y, Yt, 1.5, 0.7, (1 + 1.2) ** 0.7 * (2 * math.pi) ** 0.3)
    assert rep["violations"] == 0


@pytest.mark.parametrize("seed", range(3))
def test_integration_stability_on_pairs(seed):
    rng = np.random.default_rng(seed)
    X = _walk(rng, 80)
    Xt = X + _walk(rng, 80, scale=0.1)
    Y = _walk(rng, 80)
    Yt = Y + _walk(rng, 80, scale=0.2)
    rep = integration_stability_check(Y, Yt, X, Xt, 1.5, 1.0)
    assert rep["violations"] == 0
    assert integration_stability_check(Y, Y, X, X, 1.5, 1.0)["max_ratio"] == 0.0

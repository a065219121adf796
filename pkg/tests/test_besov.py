import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughkit.besov import (
    BesovParams,
    besov_norm,
    besov_norm_3param,
    besov_norm_path,
    besov_report,
    embedding_constants,
    omega_array,
    omega_bar,
    omega_p,
    sum_approximation_constants,
)
from roughkit.core import GridPath, TimeGrid, TwoParamField
from roughkit.errors import ParameterError
from roughkit.variation import var_field

INF = math.inf


def linear_field(cells):
    g = TimeGrid.uniform(cells)
    return TwoParamField.from_function(g, lambda s, t: t - s)


def walk(n, seed, d=1):
    rng = np.random.default_rng(seed)
    g = TimeGrid.uniform(n - 1)
    return GridPath(g, np.cumsum(rng.standard_normal((n, d)) * math.sqrt(g.mesh()), axis=0))


class TestParams:
    @pytest.mark.parametrize("bad", [(0, 1, 1), (-1, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, -2)])
    def test_rejects(self, bad):
        with pytest.raises(ParameterError):
            BesovParams(*bad)

    def test_scaled(self):
        assert BesovParams(0.4, 4, 6).scaled(2) == BesovParams(0.8, 2, 3)


class TestOmega:
    def test_zero(self):
        Z = TwoParamField.zeros(TimeGrid.uniform(16))
        assert np.all(omega_array(Z, 2) == 0)

    def test_linear_sup(self):
        chi = linear_field(64)
        for t in (1 / 64, 0.25, 0.5, 1.0):
            assert omega_p(chi, INF, t) == pytest.approx(t, rel=1e-12)

    def test_linear_p1(self):
        assert omega_p(linear_field(64), 1, 0.5) == pytest.approx(0.25, rel=1e-12)

    def test_errors(self):
        chi = linear_field(8)
        with pytest.raises(ParameterError):
            omega_p(chi, 1, 0.0)
        nonuni = TwoParamField.zeros(TimeGrid([0, 0.1, 1.0]))
        with pytest.raises(ParameterError):
            omega_p(nonuni, 1, 0.5)

    def test_omega_bar_square(self):
        g = TimeGrid.uniform(64)
        A = TwoParamField.from_function(g, lambda s, t: (t - s) ** 2)
        for t in (0.25, 0.5, 1.0):
            assert omega_bar(A, INF, t) == pytest.approx(t * t / 2, rel=1e-12)


class TestNorm:
    def test_constant_path(self):
        f = GridPath(TimeGrid.uniform(32), np.full(33, 4.0))
        assert besov_norm_path(f, (0.45, 4, 4)) == 0.0

    @pytest.mark.parametrize("evaluator", ["dyadic", "quadrature"])
    def test_linear_holder(self, evaluator):
        g = TimeGrid.uniform(256)
        f = GridPath(g, g.times)
        assert besov_norm_path(f, (0.5, INF, INF), evaluator=evaluator) == pytest.approx(1.0, rel=1e-12)
        assert besov_norm(linear_field(256), (0.5, INF, INF), evaluator=evaluator) == pytest.approx(1.0, rel=1e-12)

    def test_shift_invariance(self):
        f = walk(65, 3, d=2)
        a = besov_norm_path(f, (0.45, 4, 4))
        assert besov_norm_path(f.shifted([7.0, -1.0]), (0.45, 4, 4)) == pytest.approx(a, rel=1e-13)

    def test_errors(self):
        with pytest.raises(ParameterError):
            besov_norm(linear_field(8), (0.5, 2, 2), mode="weird")
        with pytest.raises(ParameterError):
            besov_norm(linear_field(8), (0.5, 2, 2), evaluator="simpson")

    def test_report(self):
        rep = besov_report(linear_field(256), (0.5, 2, 2))
        assert rep["evaluator"] == "dyadic" and rep["levels"] == 9 and rep["norm"] > 0

    def test_three_param_additive(self):
        f = walk(33, 1)
        assert besov_norm_3param(f.increments(), (0.5, 2, 2)) == pytest.approx(0.0, abs=1e-13)

    def test_three_param_young_germ(self):
        g = TimeGrid.uniform(64)
        f, h = np.sin(3 * g.times), g.times**2
        A = TwoParamField(g, np.triu(f[:, None] * (h[None, :] - h[:, None])))
        v = besov_norm_3param(A, (0.9, 2, 2))
        assert np.isfinite(v) and v > 0

    @pytest.mark.parametrize("seed", range(5))
    def test_evaluators_within_sum_constants(self, seed):
        # c * S_1 <= ||chi|| (quadrature) <= C * S_0 (dyadic)
        alpha, p, q = 0.45, 4.0, 4.0
        chi = walk(513, seed).distance_field()
        om = omega_array(chi, p)
        mesh = chi.grid.mesh()
        quad = besov_norm(chi, (alpha, p, q), evaluator="quadrature")
        S0 = besov_norm(chi, (alpha, p, q), evaluator="dyadic")
        N = int(math.log2(512))
        S1 = sum((2 ** (n * alpha) * om[round(2.0**-n / mesh)]) ** q for n in range(1, N + 1)) ** (1 / q)
        c, C = sum_approximation_constants(alpha, q, 1.0)
        assert c * S1 <= quad * (1 + 1e-12)
        assert quad <= C * S0 * (1 + 1e-12)


class TestConstants:
    def test_equivalence_plugin(self):
        assert embedding_constants("equivalence", alpha=1, rho=1, p=2, q=2) == pytest.approx(1.0)
        assert embedding_constants("equivalence", alpha=0.5, rho=1, p=0.5, q=4) == pytest.approx(
            (2**0.25 - 1) ** -2
        )

    def test_p_alpha_plugin(self):
        assert embedding_constants("p_alpha", alpha=1, alpha_tilde=1, p=INF, p_tilde=INF) == pytest.approx(10.0)

    def test_p_alpha_rejects(self):
        with pytest.raises(ParameterError, match="alpha <= alpha_tilde"):
            embedding_constants("p_alpha", alpha=0.8, alpha_tilde=0.5, p=4, p_tilde=2)
        with pytest.raises(ParameterError, match="1/p"):
            embedding_constants("p_alpha", alpha=0.4, alpha_tilde=0.5, p=4, p_tilde=4)
        with pytest.raises(ParameterError, match="unsafe"):
            embedding_constants("p_alpha", alpha=0.2, alpha_tilde=0.9, p=1 / 0.55, p_tilde=0.8)

    def test_p_alpha_extrapolation_flag(self):
        # alpha - 1/p == alpha~ - 1/p~ with p~ < 1
        a, at, pt = 0.2, 0.9, 0.8
        p = 1.0 / (a - at + 1.0 / pt)
        v = embedding_constants("p_alpha", alpha=a, alpha_tilde=at, p=p, p_tilde=pt, unsafe_extrapolate=True)
        assert np.isfinite(v)

    def test_unknown(self):
        with pytest.raises(ParameterError):
            embedding_constants("nope")


# embeddings on data -------------------------------------------------------

seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([0.25, 0.45, 0.75]), st.sampled_from([1.0, 2.0, 4.0, INF]),
       st.sampled_from([0.5, 1.0, 4.0, INF]))
def test_star_below_standard(seed, alpha, p, q):
    chi = walk(129, seed).distance_field()
    prm = (alpha, p, q)
    assert besov_norm(chi, prm, "star") <= besov_norm(chi, prm) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([0.25, 0.5, 0.75, 1.0]), st.sampled_from([1.0, 2.0, 4.0]),
       st.sampled_from([0.5, 1.0, 4.0]))
def test_sandwich_grid_exact_constant(seed, alpha, p, q):
    chi = walk(257, seed).distance_field()  # subadditive (triangle inequality), rho = 1
    c = embedding_constants("equivalence_dyadic", alpha=alpha, rho=1.0, p=p, q=q)
    assert besov_norm(chi, (alpha, p, q)) <= c * besov_norm(chi, (alpha, p, q), "star") * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([1.0, 2.0, 4.0]), st.sampled_from([1.5, 2.0, 4.0, INF]))
def test_p_embedding(seed, p, factor):
    chi = walk(129, seed).distance_field()
    pt = p * factor
    c = embedding_constants("p", p=p, p_tilde=pt, T=1.0)
    for ev in ("dyadic", "quadrature"):
        assert besov_norm(chi, (0.45, p, 2.0), evaluator=ev) <= c * besov_norm(chi, (0.45, pt, 2.0), evaluator=ev) * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([0.2, 0.3]), st.sampled_from([0.05, 0.2]), st.sampled_from([1.0, 2.0]),
       st.sampled_from([1.0, 2.0, INF]))
def test_alpha_q_embedding(seed, alpha, gap, q, qfactor):
    chi = walk(129, seed).distance_field()
    at, qt = alpha + gap, q * qfactor
    c = embedding_constants("alpha_q", alpha=alpha, alpha_tilde=at, q=q, q_tilde=qt, T=1.0)
    lhs = besov_norm(chi, (alpha, 4.0, q), evaluator="quadrature")
    rhs = besov_norm(chi, (at, 4.0, qt), evaluator="quadrature")
    assert lhs <= c * rhs * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([(0.3, 0.5), (0.45, 0.7), (0.2, 0.45)]), st.sampled_from([2.0, 4.0]))
def test_p_alpha_embedding(seed, alphas, p):
    a, at = alphas
    pt = 1.0 / (at - a + 1.0 / p)
    if pt < 1:
        return
    chi = var_field(walk(129, seed), 2.5)  # subadditive and monotone
    c = embedding_constants("p_alpha", alpha=a, alpha_tilde=at, p=p, p_tilde=pt, q=2.0)
    lhs = besov_norm(chi, (a, p, 2.0), "star", evaluator="quadrature")
    rhs = besov_norm(chi, (at, pt, 2.0), "star", evaluator="quadrature")
    assert lhs <= c * rhs


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2.0, 2.5, 4.0]))
def test_trivial_nested_direction(seed, r):
    f = walk(129, seed)
    prm = (0.45, 4.0, 4.0)
    assert besov_norm_path(f, prm) <= besov_norm(var_field(f, r), prm) * (1 + 1e-12)


@pytest.mark.xfail(strict=True, reason="at alpha=1 the continuum constant misses the one-cell offset on a grid")
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_sandwich_continuum_constant_at_alpha_one(p):
    worst = 0.0
    for seed in range(5):
        chi = walk(257, seed).distance_field()
        c = embedding_constants("equivalence", alpha=1.0, rho=1.0, p=p, q=1.0)
        worst = max(worst, besov_norm(chi, (1.0, p, 1.0)) / (c * besov_norm(chi, (1.0, p, 1.0), "star")))
    assert worst <= 1 + 1e-12

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughkit.core import GridPath, TimeGrid
from roughkit.errors import ConsistencyError, ParameterError
from roughkit.groups import (
    G1,
    G2,
    G3,
    GroupElement,
    ScaleConstants,
    gdist,
    ginv,
    gmul,
    gnorm,
    identity,
    increment_path,
    random_element,
)
from roughkit.roughpath import ControlledPath, RoughPath, canonical_lift
from roughkit.core import TwoParamField

PAIRINGS = {
    "G1": lambda: G1(3),
    "G2": lambda: G2(2, N=0.7, N_delta=1.9),
    "G3": lambda: G3(2, 3, ScaleConstants(N_a=0.5, N_b=2.0, N_c=1.5, N_d=0.8)),
}


def close(w, v, tol=1e-12):
    scale = max(1.0, float(np.abs(w.a).max(initial=0)), float(np.abs(w.r).max(initial=0)))
    return np.allclose(w.a, v.a, atol=tol * scale) and np.allclose(w.r, v.r, atol=tol * scale)


def walk(n, seed, d, scale=1.0):
    rng = np.random.default_rng(seed)
    return GridPath(TimeGrid.uniform(n - 1), scale * np.cumsum(rng.standard_normal((n, d)), axis=0) / math.sqrt(n))


class TestBasics:
    def test_g1_product_of_pure_vectors(self):
        P = G1(2)
        x, y = np.array([1.0, 2.0]), np.array([-3.0, 0.5])
        w = gmul(GroupElement(x, np.zeros(4), P), GroupElement(y, np.zeros(4), P))
        assert np.allclose(w.a, x + y)
        assert np.allclose(w.r, np.outer(x, y).ravel())

    def test_g1_inverse_formula(self):
        P = G1(2)
        a = np.array([0.3, -1.2])
        w = ginv(GroupElement(a, np.zeros(4), P))
        assert np.allclose(w.a, -a) and np.allclose(w.r, np.outer(a, a).ravel())

    def test_identity(self):
        P = G1(2)
        e = identity(P)
        assert close(ginv(e), e)
        w = random_element(P, np.random.default_rng(0))
        assert close(gmul(e, w), w) and close(gmul(w, e), w)

    def test_plain_norm_example(self):
        # ||a|| = 3 and weighted ||r|| = 2*2 = 4 give max(3, 2) = 3
        P = G1(1)
        assert gnorm(GroupElement([3.0], [2.0], P)) == pytest.approx(3.0)

    def test_pairing_mismatch(self):
        w, v = identity(G1(2)), identity(G1(2))
        with pytest.raises(TypeError):
            gmul(w, v)

    def test_size_mismatch(self):
        with pytest.raises(ParameterError):
            GroupElement(np.zeros(3), np.zeros(4), G1(2))

    def test_scale_constants(self):
        s = ScaleConstants(N_a=2, N_b=3, N_c=5, N_d=7)
        assert s.N_r == 2 * 7 + 3 * 5
        assert ScaleConstants(N=0.0).N == 1e-300
        with pytest.raises(ParameterError):
            ScaleConstants(N=-1.0)

    def test_unknown_modes(self):
        w = identity(G1(1))
        with pytest.raises(ParameterError):
            gnorm(w, "weird")
        with pytest.raises(ParameterError):
            gdist(w, w, "up")


@pytest.mark.parametrize("name", list(PAIRINGS))
class TestAxioms:
    def test_associativity(self, name):
        P = PAIRINGS[name]()
        rng = np.random.default_rng(1)
        u, v, w = (random_element(P, rng, 300) for _ in range(3))
        assert close(gmul(gmul(u, v), w), gmul(u, gmul(v, w)))

    def test_inverse(self, name):
        P = PAIRINGS[name]()
        w = random_element(P, np.random.default_rng(2), 300)
        z = gmul(w, ginv(w))
        assert np.allclose(z.a, 0, atol=1e-12) and np.allclose(z.r, 0, atol=1e-12)
        z = gmul(ginv(w), w)
        assert np.allclose(z.a, 0, atol=1e-12) and np.allclose(z.r, 0, atol=1e-12)

    def test_b_bound(self, name):
        P = PAIRINGS[name]()
        assert P.operator_norm_sample(5000, seed=3) <= P.bound + 1e-12
        assert P.bound <= 2.0

    def test_norm_properties(self, name):
        P = PAIRINGS[name]()
        rng = np.random.default_rng(4)
        w, v, g = (random_element(P, rng, 500, scale=s) for s in (1.0, 0.1, 3.0))
        assert np.all(gnorm(gmul(w, v)) <= gnorm(w) + gnorm(v) + 1e-12)
        plain, sym = gnorm(w), gnorm(w, "sym")
        assert np.all(plain <= sym + 1e-15) and np.all(sym <= math.sqrt(3) * plain * (1 + 1e-12))
        assert np.allclose(gdist(gmul(g, w), gmul(g, v)), gdist(w, v), rtol=1e-9)
        assert np.allclose(gdist(gmul(w, g), gmul(v, g), "right"), gdist(w, v, "right"), rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(PAIRINGS)), st.integers(0, 2**31 - 1), st.floats(1e-3, 1e3))
def test_subadditivity_property(name, seed, scale):
    P = PAIRINGS[name]()
    rng = np.random.default_rng(seed)
    w, v = random_element(P, rng, scale=scale), random_element(P, rng, scale=1.0 / scale)
    assert gnorm(gmul(w, v)) <= (gnorm(w) + gnorm(v)) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(PAIRINGS)), st.integers(0, 2**31 - 1))
def test_metric_axioms(name, seed):
    P = PAIRINGS[name]()
    rng = np.random.default_rng(seed)
    u, v, w = (random_element(P, rng) for _ in range(3))
    # the level-2 part enters through a square root, so roundoff shows up as ~sqrt(eps)
    assert gdist(u, u) <= 1e-7
    assert gdist(u, v) == pytest.approx(gdist(v, u), rel=1e-12)
    assert gdist(u, w) <= gdist(u, v) + gdist(v, w) + 1e-12


class TestIncrements:
    def test_g1_on_lift(self):
        P = canonical_lift(walk(40, 0, 3))
        inc = increment_path("G1", P)
        assert inc.residual <= 1e-10
        D = inc.distance.dense()
        # distance is the sym norm of the increment g_{s,t} = g_s^-1 g_t
        g = inc.path
        for s, t in [(0, 39), (5, 17), (20, 21)]:
            assert D[s, t] == pytest.approx(float(gdist(g[s], g[t])), rel=1e-10)

    def test_broken_area_rejected(self):
        P = canonical_lift(walk(20, 1, 2), dense=True)
        XX = P.XX.dense().copy()
        XX[2, 9] += 0.1
        bad = RoughPath(P.X, TwoParamField(P.grid, XX), check=False)
        with pytest.raises(ConsistencyError):
            increment_path("G1", bad)

    def test_g2_degenerate_reduces_to_g1(self):
        P = canonical_lift(walk(30, 2, 2))
        g2 = increment_path("G2", P, P)
        g1 = increment_path("G1", P)
        assert np.all(g2.r_field.dense() == 0)
        assert np.allclose(g2.a_path.values[:, 4:], 0)
        # with N = N_delta = 1 the r-part vanishes and a-parts |X| repeat, so distances agree
        assert np.all(g2.distance.dense() <= g1.distance.dense() + 1e-14)
        assert np.allclose(np.triu(g2.distance.dense()), np.triu(P.X.distance_field().dense()))

    def test_g2_delta_identity(self):
        P = canonical_lift(walk(25, 3, 2))
        Pt = canonical_lift(walk(25, 4, 2))
        inc = increment_path("G2", P, Pt, scales=ScaleConstants(N=2.0, N_delta=0.5))
        assert inc.residual <= 1e-12
        DXX = P.XX.dense() - Pt.XX.dense()
        X, Xt = P.X.values, Pt.X.values
        dX = X - Xt
        s, u, t = 3, 11, 20
        lhs = DXX[s, t] - DXX[s, u] - DXX[u, t]
        rhs = np.outer(dX[u] - dX[s], X[t] - X[u]) + np.outer(Xt[u] - Xt[s], dX[t] - dX[u])
        assert np.allclose(lhs, rhs, atol=1e-12)

    def _controlled(self, P, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((2, P.dim))
        Yp = np.broadcast_to(M, (P.n, 2, P.dim)) + 0.1 * np.cumsum(rng.standard_normal((P.n, 2, P.dim)), 0) / P.n
        Y = np.cumsum(rng.standard_normal((P.n, 2)), axis=0) / P.n
        return ControlledPath(GridPath(P.grid, Y), GridPath(P.grid, Yp), P)

    def test_g3_increments(self):
        P = canonical_lift(walk(30, 5, 3))
        Pt = canonical_lift(walk(30, 6, 3))
        Y, Yt = self._controlled(P, 7), self._controlled(Pt, 8)
        inc = increment_path("G3", Y, Yt, scales=ScaleConstants(N_a=1.3, N_b=0.4, N_c=2.0, N_d=0.9))
        assert inc.residual <= 1e-12

    def test_g3_degenerate(self):
        P = canonical_lift(walk(20, 9, 2))
        Y = self._controlled(P, 10)
        inc = increment_path("G3", Y, Y)
        assert np.all(inc.r_field.dense() == 0)
        a = inc.a_path.values
        n = a.shape[0]
        comps = [a[:, :4], a[:, 4:8], a[:, 8:10], a[:, 10:]]
        expect = np.zeros((n, n))
        for c in comps:
            expect = np.maximum(expect, np.linalg.norm(c[None, :] - c[:, None], axis=-1))
        assert np.allclose(inc.distance.dense(), np.triu(expect), atol=1e-14)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            increment_path("G4")

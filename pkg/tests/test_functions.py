import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughkit.errors import ParameterError
from roughkit.functions import BUILTINS, HolderFunction, SmoothFunction21, builtin

NAMES = sorted(BUILTINS)


def fd(f, y, h=1e-6):
    """Central differences along each input coordinate, stacked on a trailing axis."""
    cols = []
    for k in range(y.shape[-1]):
        e = np.zeros_like(y)
        e[..., k] = h
        cols.append((f(y + e) - f(y - e)) / (2 * h))
    return np.stack(cols, axis=-1)


@pytest.mark.parametrize("name", NAMES)
def test_derivatives_match_finite_differences(name):
    phi = builtin(name)
    y = np.random.default_rng(0).uniform(-3, 3, (50, phi.d))
    assert np.allclose(phi.dphi(y), fd(phi.phi, y), atol=1e-7)
    assert np.allclose(phi.d2phi(y), fd(phi.dphi, y), atol=1e-6)


@pytest.mark.parametrize("name", NAMES)
def test_declared_bounds_cover_probes(name):
    phi = builtin(name)
    obs = phi.probe(samples=20000, seed=11)
    for k, v in obs.items():
        assert v <= getattr(phi, k) * 1.01 + 1e-12, (k, v)
    assert phi.PhiDD <= phi.Phi0 * phi.Phi1 * (1 + 1e-12)


def test_inv_quad_bounds_are_attained():
    phi = builtin("inv_quad")
    y = np.linspace(-5, 5, 200001)[:, None]
    assert np.abs(phi.dphi(y)).max() == pytest.approx(phi.Phi1, rel=1e-6)
    assert np.abs(phi.d2phi(y)).max() == pytest.approx(phi.Phi11, rel=1e-6)
    f3 = np.abs(np.diff(phi.d2phi(y)[:, 0, 0, 0, 0]) / np.diff(y[:, 0])).max()
    assert f3 == pytest.approx(phi.Phi21, rel=1e-4)


def test_shapes():
    rot = builtin("builtin:rotation")
    y = np.zeros((7, 2))
    assert rot.phi(y).shape == (7, 2, 2)
    assert rot.dphi(y).shape == (7, 2, 2, 2)
    assert rot.d2phi(y).shape == (7, 2, 2, 2, 2)
    assert rot.Phi0 == pytest.approx(math.sqrt(2))
    sc = builtin("sincos")
    assert sc.out_shape == (1, 2) and sc.phi(np.zeros((3, 1))).shape == (3, 1, 2)


class TestRegistry:
    def test_parameters(self):
        phi = builtin("builtin:atan_family:a=2")
        assert phi.Phi1 == pytest.approx(2.0) and phi.Phi0 == pytest.approx(math.pi / 2)
        z = builtin("zero:d=3,n=2")
        assert z.phi(np.ones((4, 3))).shape == (4, 3, 2)

    @pytest.mark.parametrize("spec", ["builtin:nope", "atan_family:a=x", "sin:b=2", "atan_family:a=-1"])
    def test_bad_specs(self, spec):
        with pytest.raises(ParameterError):
            builtin(spec)


class TestValidation:
    def test_understated_bound_rejected(self):
        base = builtin("sin")
        with pytest.raises(ParameterError, match="exceeded"):
            SmoothFunction21(base.phi, base.dphi, base.d2phi, 0.5, 1, 1, 1, 1, 1)

    def test_phidd_cap(self):
        base = builtin("sin")
        with pytest.raises(ParameterError, match="PhiDD"):
            SmoothFunction21(base.phi, base.dphi, base.d2phi, 1, 1, 1, 1, 1, 1, PhiDD=2.0)

    def test_negative_bound(self):
        base = builtin("sin")
        with pytest.raises(ParameterError):
            HolderFunction(base.phi, base.dphi, -1, 1, 1, 1)

    def test_alpha_range(self):
        base = builtin("sin")
        with pytest.raises(ParameterError):
            HolderFunction(base.phi, base.dphi, 1, 1, 1, 1, alpha=1.5)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(NAMES), st.floats(0.1, 1.0))
def test_holder_interpolation_is_valid(name, alpha):
    phi = builtin(name)
    h = phi.holder(alpha)
    obs = HolderFunction(h.phi, h.dphi, h.Phi0, h.Phi_alpha, h.Phi1, h.Phi1_alpha, alpha, h.d, h.n, h.d_out,
                         check=False).probe(samples=5000, seed=3)
    assert obs["Phi_alpha"] <= h.Phi_alpha * 1.01 + 1e-12
    assert obs["Phi1_alpha"] <= h.Phi1_alpha * 1.01 + 1e-12


def test_shifted_only_moves_sup():
    h = builtin("sin").holder(1.0)
    s = h.shifted(0.25)
    y = np.linspace(-2, 2, 11)[:, None]
    assert np.allclose(s.phi(y), h.phi(y) + 0.25)
    assert s.Phi0 == pytest.approx(h.Phi0 + 0.25)
    assert s.Phi1 == h.Phi1 and s.Phi_alpha == h.Phi_alpha

"""Bounded smooth coefficient functions with declared bounds, and a built-in registry.

A coefficient maps ``y in R^d`` to a ``d_out x n`` matrix.  Evaluators are
batched: ``phi(y)`` takes ``(..., d)`` and returns ``(..., d_out, n)``;
``dphi`` appends one derivative axis, ``d2phi`` two.  Matrix values use the
Frobenius norm, derivatives the operator norm from Euclidean ``R^d``.  The
declared bounds are the constants fed into smallness conditions, so they are
probed against samples at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ParameterError

PROBE_SLACK = 1.01


def _fro(a: np.ndarray, k: int) -> np.ndarray:
    """Frobenius norm over the trailing ``k`` axes."""
    return np.sqrt(np.sum(a.reshape(a.shape[: a.ndim - k] + (-1,)) ** 2, axis=-1))


def _deriv_norm(D: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``|D[h]|`` for a batch of derivative tensors ``(..., p, q, d)`` and unit ``h``."""
    return _fro(np.einsum("...pqd,...d->...pq", D, h), 2)


def _probe_points(d: int, rng: np.random.Generator, samples: int) -> np.ndarray:
    scales = np.array([0.05, 0.3, 1.0, 3.0, 10.0])
    s = scales[rng.integers(0, scales.size, samples)]
    return rng.standard_normal((samples, d)) * s[:, None]


def _unit(rng, shape) -> np.ndarray:
    h = rng.standard_normal(shape)
    return h / np.linalg.norm(h, axis=-1, keepdims=True)


@dataclass(frozen=True)
class HolderFunction:
    """``phi in C^{1,alpha}_b`` with declared sup and Holder bounds of ``phi`` and ``Dphi``."""

    phi: Callable
    dphi: Callable
    Phi0: float
    Phi_alpha: float
    Phi1: float
    Phi1_alpha: float
    alpha: float = 1.0
    d: int = 1
    n: int = 1
    d_out: int | None = None
    name: str = "custom"
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.d_out is None:
            object.__setattr__(self, "d_out", self.d)
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1] (got {self.alpha})")
        for k in ("Phi0", "Phi_alpha", "Phi1", "Phi1_alpha"):
            if getattr(self, k) < 0 or not math.isfinite(getattr(self, k)):
                raise ParameterError(f"{k} must be a finite nonnegative bound")
        if self.check:
            bad = {k: v for k, v in self.probe().items() if v > getattr(self, k) * PROBE_SLACK + 1e-12}
            if bad:
                raise ParameterError(f"declared bounds of {self.name} are exceeded on probes: {bad}")

    @property
    def out_shape(self) -> tuple:
        return (self.d_out, self.n)

    def probe(self, samples: int = 4000, seed: int = 0) -> dict:
        """Observed sup norms and Holder quotients on random probes (lower estimates)."""
        rng = np.random.default_rng(seed)
        y = _probe_points(self.d, rng, samples)
        z = y + rng.standard_normal(y.shape) * 10.0 ** rng.uniform(-4, 1, (samples, 1))
        h = _unit(rng, y.shape)
        dist = np.linalg.norm(y - z, axis=-1)
        fy, fz = self.phi(y), self.phi(z)
        Dy, Dz = self.dphi(y), self.dphi(z)
        a = self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            q0 = np.where(dist > 0, _fro(fy - fz, 2) / dist**a, 0.0)
            q1 = np.where(dist > 0, _deriv_norm(Dy - Dz, h) / dist**a, 0.0)
        return {
            "Phi0": float(_fro(fy, 2).max()),
            "Phi_alpha": float(q0.max()),
            "Phi1": float(_deriv_norm(Dy, h).max()),
            "Phi1_alpha": float(q1.max()),
        }

    def shifted(self, c, name: str | None = None) -> "HolderFunction":
        """``phi + c`` for a constant matrix ``c``; only the sup bound changes."""
        c = np.broadcast_to(np.asarray(c, dtype=float), self.out_shape)
        base = self.phi
        return replace(
            self,
            phi=lambda y: base(y) + c,
            Phi0=self.Phi0 + float(np.linalg.norm(c)),
            name=name or f"{self.name}+const",
        )


@dataclass(frozen=True)
class SmoothFunction21:
    """``phi in C^{2,1}_b``: bounds on ``phi``, ``Dphi``, ``D^2phi`` and their Lipschitz constants.

    ``PhiDD`` bounds ``|Dphi(y)[phi(y) .]|`` and defaults to ``Phi0 * Phi1``;
    larger values are rejected.
    """

    phi: Callable
    dphi: Callable
    d2phi: Callable
    Phi0: float
    Phi01: float
    Phi1: float
    Phi11: float
    Phi2: float
    Phi21: float
    PhiDD: float | None = None
    d: int = 1
    n: int = 1
    d_out: int | None = None
    name: str = "custom"
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.d_out is None:
            object.__setattr__(self, "d_out", self.d)
        for k in ("Phi0", "Phi01", "Phi1", "Phi11", "Phi2", "Phi21"):
            if getattr(self, k) < 0 or not math.isfinite(getattr(self, k)):
                raise ParameterError(f"{k} must be a finite nonnegative bound")
        cap = self.Phi0 * self.Phi1
        if self.PhiDD is None:
            object.__setattr__(self, "PhiDD", cap)
        elif self.PhiDD > cap * (1 + 1e-12):
            raise ParameterError(f"PhiDD = {self.PhiDD} exceeds Phi0 * Phi1 = {cap}")
        if self.check:
            bad = {k: v for k, v in self.probe().items() if v > getattr(self, k) * PROBE_SLACK + 1e-12}
            if bad:
                raise ParameterError(f"declared bounds of {self.name} are exceeded on probes: {bad}")

    @property
    def out_shape(self) -> tuple:
        return (self.d_out, self.n)

    def probe(self, samples: int = 4000, seed: int = 0) -> dict:
        rng = np.random.default_rng(seed)
        y = _probe_points(self.d, rng, samples)
        z = y + rng.standard_normal(y.shape) * 10.0 ** rng.uniform(-4, 1, (samples, 1))
        h = _unit(rng, y.shape)
        k = _unit(rng, y.shape)
        dist = np.linalg.norm(y - z, axis=-1)
        fy, fz = self.phi(y), self.phi(z)
        Dy, Dz = self.dphi(y), self.dphi(z)
        Hy, Hz = self.d2phi(y), self.d2phi(z)

        def bil(H):
            return _fro(np.einsum("...pqde,...d,...e->...pq", H, h, k), 2)

        DD = np.einsum("...pqd,...dj->...pqj", Dy, fy) if self.d_out == self.d else None
        with np.errstate(divide="ignore", invalid="ignore"):
            pos = dist > 0
            q0 = np.where(pos, _fro(fy - fz, 2) / dist, 0.0)
            q1 = np.where(pos, _deriv_norm(Dy - Dz, h) / dist, 0.0)
            q2 = np.where(pos, bil(Hy - Hz) / dist, 0.0)
        out = {
            "Phi0": float(_fro(fy, 2).max()),
            "Phi01": float(q0.max()),
            "Phi1": float(_deriv_norm(Dy, h).max()),
            "Phi11": float(q1.max()),
            "Phi2": float(bil(Hy).max()),
            "Phi21": float(q2.max()),
        }
        if DD is not None:
            out["PhiDD"] = float(_fro(DD, 3).max())
        return out

    def holder_bounds(self, alpha: float) -> dict:
        """Holder-``alpha`` bounds implied by the Lipschitz ones: ``[f]_alpha <= Lip^alpha (2 sup)^(1-alpha)``."""
        if not 0 < alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1] (got {alpha})")

        def interp(lip, sup):
            return lip**alpha * (2.0 * sup) ** (1.0 - alpha)

        return {
            "Phi_alpha": interp(self.Phi01, self.Phi0),
            "Phi1_alpha": interp(self.Phi11, self.Phi1),
            "Phi2_alpha": interp(self.Phi21, self.Phi2),
        }

    def holder(self, alpha: float = 1.0) -> HolderFunction:
        b = self.holder_bounds(alpha)
        return HolderFunction(self.phi, self.dphi, self.Phi0, b["Phi_alpha"], self.Phi1, b["Phi1_alpha"],
                              alpha, self.d, self.n, self.d_out, self.name, check=False)


def _scalar(f):
    """Lift a scalar function of one variable to the batched ``(..., 1) -> (..., 1, 1)`` form."""
    return lambda y: f(np.asarray(y, dtype=float)[..., 0])[..., None, None]


def _scalar_d(f, order):
    def g(y):
        v = f(np.asarray(y, dtype=float)[..., 0])
        return v.reshape(v.shape + (1,) * (2 + order))

    return g


def _zero(d: int = 1, n: int = 1) -> SmoothFunction21:
    def phi(y):
        y = np.asarray(y, dtype=float)
        return np.zeros(y.shape[:-1] + (d, n))

    return SmoothFunction21(phi, lambda y: phi(y)[..., None].repeat(d, -1),
                            lambda y: phi(y)[..., None, None].repeat(d, -2).repeat(d, -1),
                            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, d, n, name="zero")


def _inv_quad() -> SmoothFunction21:
    f = lambda y: 1.0 / (1.0 + y * y)
    f1 = lambda y: -2.0 * y / (1.0 + y * y) ** 2
    f2 = lambda y: (6.0 * y * y - 2.0) / (1.0 + y * y) ** 3
    s3 = 3.0 * math.sqrt(3.0) / 8.0
    # sup|f'''| = 4.66855928... attained at y = tan(pi/10); sup|f' f| = 2/sqrt5 (5/6)^3
    dd = 2.0 / math.sqrt(5.0) * (5.0 / 6.0) ** 3
    return SmoothFunction21(_scalar(f), _scalar_d(f1, 1), _scalar_d(f2, 2),
                            1.0, s3, s3, 2.0, 2.0, 4.6685593, dd, name="inv_quad")


def _atan_family(a: float = 1.0) -> SmoothFunction21:
    a = float(a)
    if a <= 0:
        raise ParameterError("atan_family needs a > 0")
    f = lambda y: np.arctan(a * y)
    f1 = lambda y: a / (1.0 + (a * y) ** 2)
    f2 = lambda y: -2.0 * a**3 * y / (1.0 + (a * y) ** 2) ** 2
    s3 = 3.0 * math.sqrt(3.0) / 8.0
    # sup_u atan(u)/(1+u^2) = 0.41194927...
    return SmoothFunction21(_scalar(f), _scalar_d(f1, 1), _scalar_d(f2, 2),
                            math.pi / 2, a, a, a * a * s3, a * a * s3, 2.0 * a**3, 0.4119493 * a,
                            name=f"atan_family(a={a:g})")


def _sin(a: float = 1.0) -> SmoothFunction21:
    a = float(a)
    return SmoothFunction21(_scalar(lambda y: np.sin(a * y)), _scalar_d(lambda y: a * np.cos(a * y), 1),
                            _scalar_d(lambda y: -a * a * np.sin(a * y), 2),
                            1.0, a, a, a * a, a * a, a**3, 0.5 * a, name=f"sin(a={a:g})")


def _sincos() -> SmoothFunction21:
    """``y -> [sin y, cos y]``: one state driven by two channels."""

    def phi(y):
        y = np.asarray(y, dtype=float)[..., 0]
        return np.stack([np.sin(y), np.cos(y)], axis=-1)[..., None, :]

    def dphi(y):
        y = np.asarray(y, dtype=float)[..., 0]
        return np.stack([np.cos(y), -np.sin(y)], axis=-1)[..., None, :, None]

    def d2phi(y):
        y = np.asarray(y, dtype=float)[..., 0]
        return np.stack([-np.sin(y), -np.cos(y)], axis=-1)[..., None, :, None, None]

    return SmoothFunction21(phi, dphi, d2phi, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1, 2, name="sincos")


def _rotation() -> SmoothFunction21:
    """``y -> [[cos y1, -sin y2], [sin y1, cos y2]]``; column ``j`` depends on ``y_j`` only."""

    def phi(y):
        y = np.asarray(y, dtype=float)
        c1, s1, c2, s2 = np.cos(y[..., 0]), np.sin(y[..., 0]), np.cos(y[..., 1]), np.sin(y[..., 1])
        return np.stack([np.stack([c1, -s2], -1), np.stack([s1, c2], -1)], -2)

    def dphi(y):
        y = np.asarray(y, dtype=float)
        c1, s1, c2, s2 = np.cos(y[..., 0]), np.sin(y[..., 0]), np.cos(y[..., 1]), np.sin(y[..., 1])
        out = np.zeros(y.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0], out[..., 1, 0, 0] = -s1, c1
        out[..., 0, 1, 1], out[..., 1, 1, 1] = -c2, -s2
        return out

    def d2phi(y):
        y = np.asarray(y, dtype=float)
        c1, s1, c2, s2 = np.cos(y[..., 0]), np.sin(y[..., 0]), np.cos(y[..., 1]), np.sin(y[..., 1])
        out = np.zeros(y.shape[:-1] + (2, 2, 2, 2))
        out[..., 0, 0, 0, 0], out[..., 1, 0, 0, 0] = -c1, -s1
        out[..., 0, 1, 1, 1], out[..., 1, 1, 1, 1] = s2, -c2
        return out

    # columns are unit vectors, so |phi|_F = sqrt2; |Dphi[h]|^2 = h1^2 + h2^2 and likewise for D^2
    return SmoothFunction21(phi, dphi, d2phi, math.sqrt(2.0), 1.0, 1.0, 1.0, 1.0, 1.0, None, 2, 2, name="rotation")


BUILTINS = {
    "zero": _zero,
    "inv_quad": _inv_quad,
    "atan_family": _atan_family,
    "sin": _sin,
    "sincos": _sincos,
    "rotation": _rotation,
}


def builtin(spec: str) -> SmoothFunction21:
    """Resolve ``builtin:name`` or ``builtin:name:key=value,...`` (the prefix is optional)."""
    s = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    name, _, params = s.partition(":")
    if name not in BUILTINS:
        raise ParameterError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
    kw = {}
    for item in filter(None, params.split(",")):
        k, _, v = item.partition("=")
        try:
            kw[k.strip()] = float(v) if k.strip() not in ("d", "n") else int(v)
        except ValueError as exc:
            raise ParameterError(f"bad builtin parameter {item!r}") from exc
    try:
        return BUILTINS[name](**kw)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for builtin {name!r}: {kw}") from exc

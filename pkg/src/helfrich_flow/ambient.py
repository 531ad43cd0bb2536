"""Ambient data inducing the spontaneous curvature ``c = (L x + M) + f(x) tau``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .curve import DiscreteCurve, tangent


class AmbientError(ValueError):
    """Raised for inconsistent ambient data."""


@dataclass(frozen=True, eq=False)
class AffineMap:
    """The affine field ``x -> L x + M``."""

    L: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        L = np.array(self.L, dtype=float, ndmin=2)
        M = np.array(self.M, dtype=float).reshape(-1)
        if L.shape[0] != L.shape[1]:
            raise AmbientError(f"L must be square, got shape {L.shape}")
        if M.shape != (L.shape[0],):
            raise AmbientError(f"M has shape {M.shape}, expected ({L.shape[0]},)")
        if not (np.all(np.isfinite(L)) and np.all(np.isfinite(M))):
            raise AmbientError("L and M must be finite")
        L.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "M", M)

    @classmethod
    def zero(cls, n: int) -> "AffineMap":
        return cls(np.zeros((n, n)), np.zeros(n))

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def __call__(self, x):
        return np.asarray(x) @ self.L.T + self.M


class ScalarField:
    """Smooth ambient scalar field with uniform bounds on its derivatives.

    Subclasses provide ``value``, ``gradient`` (the transpose of ``df``, one
    row per point) and ``hessian``, plus ``bounds = (c0, c1, c2)`` with
    ``sup |d^m f| <= c_m``.
    """

    kind: str = ""
    radially_symmetric: bool = False

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def bounds(self) -> tuple[float, float, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ScalarField):
    c0: float = 0.0
    kind = "constant"
    radially_symmetric = True

    def value(self, x):
        x = np.atleast_2d(x)
        return np.full(x.shape[0], float(self.c0))

    def gradient(self, x):
        return np.zeros_like(np.atleast_2d(np.asarray(x, dtype=float)))

    def hessian(self, x):
        x = np.atleast_2d(x)
        return np.zeros((x.shape[0], x.shape[1], x.shape[1]))

    @property
    def bounds(self):
        return (abs(float(self.c0)), 0.0, 0.0)


@dataclass(frozen=True)
class InverseQuadratic(ScalarField):
    """``f(x) = 1 / (1 + |x|^2)``."""

    kind = "inverse_quadratic"
    radially_symmetric = True

    def value(self, x):
        x = np.atleast_2d(x)
        return 1.0 / (1.0 + np.einsum("ij,ij->i", x, x))

    def gradient(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + np.einsum("ij,ij->i", x, x)
        return -2.0 * x / q[:, None] ** 2

    def hessian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + np.einsum("ij,ij->i", x, x)
        eye = np.eye(x.shape[1])
        return (-2.0 * eye[None] / q[:, None, None] ** 2
                + 8.0 * np.einsum("ij,ik->ijk", x, x) / q[:, None, None] ** 3)

    @property
    def bounds(self):
        # sup|f| at the origin, sup|df| at |x| = 1/sqrt(3), sup|d^2 f| at the origin
        return (1.0, 3.0 * math.sqrt(3.0) / 8.0, 2.0)


SCALAR_FIELDS = {"constant": Constant, "inverse_quadratic": InverseQuadratic}


@dataclass(frozen=True, eq=False)
class AmbientSpec:
    """Affine field, scalar field and length weight ``lambda``."""

    affine: AffineMap
    scalar: ScalarField = field(default_factory=Constant)
    lam: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise AmbientError(f"lambda must be positive, got {self.lam}")

    @property
    def n(self) -> int:
        return self.affine.n

    @classmethod
    def simple(cls, n: int, lam: float, c0: float = 0.0, L=None, M=None, scalar=None):
        L = np.zeros((n, n)) if L is None else L
        M = np.zeros(n) if M is None else M
        scalar = Constant(c0) if scalar is None else scalar
        return cls(AffineMap(L, M), scalar, lam)


class Spontaneous(NamedTuple):
    cvec: np.ndarray
    fhat: np.ndarray
    c: np.ndarray


def spontaneous(curve: DiscreteCurve, spec: AmbientSpec) -> Spontaneous:
    """Evaluate ``cvec = L gamma + M``, ``fhat = f(gamma)`` and ``c = cvec + fhat tau``."""
    if curve.n != spec.n:
        raise AmbientError(f"curve lives in R^{curve.n} but ambient data in R^{spec.n}")
    cvec = spec.affine(curve.points)
    fhat = spec.scalar.value(curve.points)
    return Spontaneous(cvec, fhat, cvec + fhat[:, None] * tangent(curve))


def operator_norm(L, rtol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of ``L`` by power iteration on ``L^T L``."""
    L = np.array(L, dtype=float, ndmin=2)
    if L.shape[0] != L.shape[1]:
        raise AmbientError(f"L must be square, got shape {L.shape}")
    if not np.any(L):
        return 0.0
    # scale first so that L^T L neither underflows nor overflows
    scale = float(np.abs(L).max())
    A = (L / scale).T @ (L / scale)
    v = np.random.default_rng(seed).standard_normal(L.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v landed in the kernel; restart along a column of A
            v = A[:, np.argmax(np.linalg.norm(A, axis=0))]
            v = v / np.linalg.norm(v)
            continue
        new = float(v @ w)
        v = w / nw
        if abs(new - est) <= rtol * abs(new):
            return scale * math.sqrt(max(new, 0.0))
        est = new
    warnings.warn(f"power iteration did not converge in {max_iter} iterations", RuntimeWarning)
    return scale * math.sqrt(max(est, 0.0))


class AffineVerdict(NamedTuple):
    psd: bool
    norm_ok: bool
    valid: bool


def validate_affine_assumption(L, lam: float) -> AffineVerdict:
    """Check ``L`` positive semi-definite or ``|L| <= lambda``.

    Positive semi-definite is taken in the quadratic-form sense, ``x.Lx >= 0``,
    i.e. on the symmetric part of ``L``; the length and energy bounds only
    ever use ``<tau, L tau> >= 0``.
    """
    if lam <= 0:
        raise AmbientError(f"lambda must be positive, got {lam}")
    L = np.array(L, dtype=float, ndmin=2)
    sym = 0.5 * (L + L.T)
    psd = bool(np.linalg.eigvalsh(sym).min() >= -1e-12)
    norm_ok = bool(operator_norm(L) <= lam + 1e-12)
    return AffineVerdict(psd, norm_ok, psd or norm_ok)


class PropernessVerdict(NamedTuple):
    R: float | None
    holds: bool
    threshold: float


def validate_properness(spec: AmbientSpec, curve0: DiscreteCurve, H0: float | None = None,
                        n_radii: int = 1000, n_radial: int = 64, n_angular: int = 64
                        ) -> PropernessVerdict:
    """Search for ``R`` with ``|f| > sqrt(3) H0 / pi`` on ``R <= |x| <= R + H0/(2 lambda)``.

    ``H0`` defaults to the energy of ``curve0``.  Radii come from a log grid on
    ``[1e-3, 1e3]``; the annulus is sampled radially (radially symmetric
    fields) or on a radial x angular grid over a great circle family.
    """
    if H0 is None:
        from .energy import energy
        H0 = energy(curve0, spec).total
    threshold = math.sqrt(3.0) * H0 / math.pi
    width = H0 / (2.0 * spec.lam)
    n = spec.n
    radial = np.linspace(0.0, 1.0, n_radial)
    if spec.scalar.radially_symmetric:
        dirs = np.eye(n)[:1]
    else:
        rng = np.random.default_rng(0)
        if n == 2:
            th = 2 * np.pi * np.arange(n_angular) / n_angular
            dirs = np.column_stack([np.cos(th), np.sin(th)])
        else:
            dirs = rng.standard_normal((n_angular * n_angular, n))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for R in np.geomspace(1e-3, 1e3, n_radii):
        r = R + width * radial
        x = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        if np.min(np.abs(spec.scalar.value(x))) > threshold:
            return PropernessVerdict(float(R), True, threshold)
    return PropernessVerdict(None, False, threshold)


def rotation_map(theta: float, plane=(0, 1), n: int = 2) -> AffineMap:
    """Rotation by ``theta`` in the coordinate plane ``plane``, zero on its complement."""
    i, j = plane
    if not (0 <= i < j < n):
        raise AmbientError(f"invalid plane {plane} for dimension {n}")
    L = np.zeros((n, n))
    c, s = math.cos(theta), math.sin(theta)
    L[i, i], L[i, j], L[j, i], L[j, j] = c, -s, s, c
    return AffineMap(L, np.zeros(n))

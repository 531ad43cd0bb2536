"""Helfrich energy, its L2 gradient and a finite-difference first-variation oracle.

Sign convention: ``GradientField.total`` is the L2 gradient ``H`` of the
energy, so ``dE(gamma + t phi)/dt = integral <H, phi> ds`` and the flow
velocity is ``V = -H``.  ``vk`` and ``vc`` split the velocity into the pure
elastic part and everything contributed by the spontaneous curvature.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .ambient import AmbientSpec, spontaneous
from .curve import (
    CurveError,
    DiscreteCurve,
    arclength,
    d2_ds2,
    integrate,
    l2_norm,
    mesh_ratio,
    normal_derivative,
    normal_projection,
)

MIN_EL_NODES = 16
# the stencils assume (near-)uniform spacing; the flow resamples long before this
MAX_MESH_RATIO = 1.25


def _dot(X, Y):
    return np.einsum("ij,ij->i", X, Y)


@dataclass(frozen=True)
class EnergyReport:
    bending: float
    length_term: float
    total: float
    elastic_only: float
    spontaneous_only: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class GradientField:
    """``total`` is the gradient ``H``; ``total = -(vk + vc)`` node-wise."""

    total: np.ndarray
    vk: np.ndarray
    vc: np.ndarray

    @property
    def velocity(self) -> np.ndarray:
        return -self.total


def energy(curve: DiscreteCurve, spec: AmbientSpec) -> EnergyReport:
    """Trapezoid evaluation of ``1/2 int |k - c|^2 ds + lambda L``."""
    k = curve.curvature
    sp = spontaneous(curve, spec)
    bending = 0.5 * integrate(_dot(k - sp.c, k - sp.c), curve)
    length_term = spec.lam * arclength(curve)
    return EnergyReport(
        bending=bending,
        length_term=length_term,
        total=bending + length_term,
        elastic_only=0.5 * integrate(_dot(k, k), curve),
        spontaneous_only=0.5 * integrate(_dot(sp.c, sp.c), curve),
    )


def second_normal_derivative_affine(curve: DiscreteCurve, spec: AmbientSpec,
                                    closed_form: bool = False) -> np.ndarray:
    """``nabla_s^2`` of ``cvec = L gamma + M``.

    The generic route differences the node field twice; the closed form
    ``[L k]^perp - <tau, L tau> k`` holds because ``d_s cvec = L tau``.
    """
    if closed_form:
        L = spec.affine.L
        tau, k = curve.tangent, curve.curvature
        return (normal_projection(k @ L.T, curve)
                - _dot(tau, tau @ L.T)[:, None] * k)
    cvec = spec.affine(curve.points)
    return normal_derivative(normal_derivative(cvec, curve), curve)


def second_normal_derivative_curvature(curve: DiscreteCurve, nested: bool = False) -> np.ndarray:
    """``nabla_s^2 k``.

    The default uses ``[d_s^2 k]^perp + |k|^2 k``, which follows from
    ``<d_s k, tau> = -|k|^2`` and keeps the compact three-point stencil.
    ``nested=True`` applies :func:`normal_derivative` twice; that stencil is
    twice as wide and its O(h^2) error constant is several times larger.
    """
    k = curve.curvature
    if nested:
        return normal_derivative(normal_derivative(k, curve), curve)
    return normal_projection(d2_ds2(k, curve), curve) + _dot(k, k)[:, None] * k


def _check_el_input(curve: DiscreteCurve, spec: AmbientSpec):
    if curve.n != spec.n:
        raise CurveError(f"curve lives in R^{curve.n} but ambient data in R^{spec.n}")
    if curve.N < MIN_EL_NODES:
        raise CurveError(f"need at least {MIN_EL_NODES} nodes, got {curve.N}")
    ratio = mesh_ratio(curve)
    if ratio > MAX_MESH_RATIO:
        raise CurveError(f"mesh is not uniform (chord ratio {ratio:.3f}); resample first")


def euler_lagrange(curve: DiscreteCurve, spec: AmbientSpec,
                   closed_form_cvec: bool = False, nested_k: bool = False) -> GradientField:
    """L2 gradient of the Helfrich energy at ``curve``.

    Computed as

        H = nabla^2 k - nabla^2 cvec + 1/2 |k|^2 k - (lambda + 1/2 |c|^2) k
            - [L^T (k - c) + df(tau) cvec + fhat L tau - <c, tau> df^T]^perp
            + fhat <cvec, tau> k

    and projected onto the normal bundle at the end.  ``nabla^2 k`` comes
    from :func:`second_normal_derivative_curvature` and ``nabla^2 cvec`` from
    :func:`second_normal_derivative_affine`.
    """
    _check_el_input(curve, spec)
    tau, k = curve.tangent, curve.curvature
    cvec, fhat, c = spontaneous(curve, spec)
    L = spec.affine.L
    df = spec.scalar.gradient(curve.points)
    df_tau = _dot(df, tau)
    c_tau = _dot(c, tau)

    nnk = second_normal_derivative_curvature(curve, nested_k)
    nnc = second_normal_derivative_affine(curve, spec, closed_form_cvec)
    k2 = _dot(k, k)

    bracket = ((k - c) @ L + df_tau[:, None] * cvec + fhat[:, None] * (tau @ L.T)
               - c_tau[:, None] * df)
    H = (nnk - nnc + 0.5 * k2[:, None] * k
         - (spec.lam + 0.5 * _dot(c, c))[:, None] * k
         - normal_projection(bracket, curve)
         + (fhat * _dot(cvec, tau))[:, None] * k)
    H = normal_projection(H, curve)
    vk = normal_projection(-nnk - 0.5 * k2[:, None] * k + spec.lam * k, curve)
    return GradientField(total=H, vk=vk, vc=-H - vk)


def euler_lagrange_with_transport(curve: DiscreteCurve, spec: AmbientSpec) -> np.ndarray:
    """Operator carrying the additional transport terms, evaluated term by term.

        nabla^2 k - <c,tau> nabla k - nabla^2 cvec + 1/2 |c - k|^2 k
        - (lambda + |c|^2) k - <L tau, tau> k - [ ... ]^perp
        - df(tau) k + fhat <cvec, tau> k

    It differs from :func:`euler_lagrange` by exactly
    ``-nabla_s(<c, tau> k)``, which vanishes on circles where ``<c, tau>``
    is constant, but it is not the gradient of the energy in general.  Kept
    for comparison only.
    """
    _check_el_input(curve, spec)
    tau, k = curve.tangent, curve.curvature
    cvec, fhat, c = spontaneous(curve, spec)
    L = spec.affine.L
    df = spec.scalar.gradient(curve.points)
    df_tau = _dot(df, tau)
    c_tau = _dot(c, tau)
    nk = normal_derivative(k, curve)
    nnk = second_normal_derivative_curvature(curve)
    nnc = second_normal_derivative_affine(curve, spec)
    bracket = ((k - c) @ L + df_tau[:, None] * cvec + fhat[:, None] * (tau @ L.T)
               - c_tau[:, None] * df)
    H = (nnk - c_tau[:, None] * nk - nnc
         + 0.5 * _dot(c - k, c - k)[:, None] * k
         - (spec.lam + _dot(c, c))[:, None] * k
         - _dot(tau @ L.T, tau)[:, None] * k
         - normal_projection(bracket, curve)
         - df_tau[:, None] * k
         + (fhat * _dot(cvec, tau))[:, None] * k)
    return normal_projection(H, curve)


def first_variation_fd(curve: DiscreteCurve, spec: AmbientSpec, phi, eps: float = 1e-5) -> float:
    """Central difference ``[E(gamma + eps phi) - E(gamma - eps phi)] / (2 eps)``.

    The perturbed node sets are evaluated as they are, without resampling.
    """
    if not 1e-8 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-8, 1e-3], got {eps}")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != curve.points.shape:
        raise CurveError(f"phi shape {phi.shape} does not match curve {curve.points.shape}")
    if not np.any(phi):
        return 0.0
    plus = DiscreteCurve(curve.points + eps * phi)
    minus = DiscreteCurve(curve.points - eps * phi)
    return (energy(plus, spec).total - energy(minus, spec).total) / (2.0 * eps)


class ResidualNorms(NamedTuple):
    l2: float
    sup: float


def residual_norms(curve: DiscreteCurve, spec: AmbientSpec, grad: GradientField | None = None
                   ) -> ResidualNorms:
    """L2 and sup norms of the gradient."""
    H = (grad or euler_lagrange(curve, spec)).total
    return ResidualNorms(l2_norm(H, curve), float(np.linalg.norm(H, axis=1).max()))

"""Critical circles: closed-form radii, the rotation quartic and residual scans.

Cases, with ``S_rho`` the counter-clockwise circle of radius ``rho`` in the
``(e1, e2)`` plane centred at the origin:

* ``translation_zero``: ``L = 0, M = 0`` and ``f = c0``.
* ``translation_nonzero``: ``L = 0, M != 0``.
* ``rotation_fixing_circle``: ``L`` the identity on the plane (rotation by 0).
* ``rotation_of_plane``: ``L`` a rotation by ``theta`` of the plane.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import AffineMap, AmbientSpec, Constant, InverseQuadratic, rotation_map
from .curve import DiscreteCurve, circle
from .energy import residual_norms

U_MIN, U_MAX = 1e-6, 1e6
N_BRACKET = 4000
BISECT_TOL = 1e-12
CASE_TAGS = ("translation_zero", "translation_nonzero", "rotation_fixing_circle",
             "rotation_of_plane")


@dataclass(frozen=True)
class CircleCriticality:
    case_tag: str
    radii: list[float]
    polynomial_coeffs: tuple[float, ...] = ()
    residual_check: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ValueError(f"unknown case {self.case_tag!r}")
        if list(self.radii) != sorted(self.radii) or any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive and sorted ascending")

    def to_dict(self) -> dict:
        return {"case": self.case_tag, "radii": list(self.radii),
                "polynomial_coeffs": list(self.polynomial_coeffs),
                "residual_sup": list(self.residual_check)}


def radius_case_i(lam: float, c0: float) -> float:
    """``rho = (2 lambda + c0^2)^(-1/2)``."""
    s = 2.0 * lam + c0 * c0
    if not s > 0:
        raise ValueError(f"2*lambda + c0^2 must be positive, got {s}")
    return 1.0 / math.sqrt(s)


def radius_case_iii(lam: float, c0: float) -> float:
    """Positive root of ``3 rho^4 + (2 + 2 lambda + c0^2) rho^2 - 1``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    a = 2.0 + 2.0 * lam + c0 * c0
    return math.sqrt((math.sqrt(a * a + 12.0) - a) / 6.0)


def radius_case_ii(M, lam: float, c0: float = 0.0) -> float:
    """Radius at which ``S_rho`` balances a constant field ``M``.

    The residual of ``S_rho`` under ``cvec = M`` vanishes when
    ``1/rho^2 = 2 lambda + |M|^2 + c0^2``; it is reported so scans can be
    checked against it.
    """
    m2 = float(np.dot(np.ravel(M), np.ravel(M)))
    return 1.0 / math.sqrt(2.0 * lam + m2 + c0 * c0)


def quartic_coeffs(theta: float, lam: float, c0: float) -> tuple[float, float, float, float, float]:
    """Coefficients of ``u^4 - a u^2 - b u - 3`` in ``u = 1/rho``, highest first."""
    a = 2.0 * math.cos(theta) + 2.0 * lam + c0 * c0
    b = 4.0 * c0 * math.sin(theta)
    return (1.0, 0.0, -a, -b, -3.0)


def quartic_Q(rho, theta: float, lam: float, c0: float):
    """``Q(rho) = rho^-4 - a rho^-2 - b rho^-1 - 3``."""
    u = 1.0 / np.asarray(rho, dtype=float)
    return np.polyval(quartic_coeffs(theta, lam, c0), u)


def _bisect(f, lo: float, hi: float, flo: float) -> float:
    while hi - lo > BISECT_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def positive_roots(f, lo: float = U_MIN, hi: float = U_MAX, n_grid: int = N_BRACKET) -> list[float]:
    """All sign changes of ``f`` on a log grid over ``[lo, hi]``, refined by bisection.

    ``f`` must accept arrays.
    """
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.asarray(f(grid), dtype=float)
    roots = []
    for i in range(n_grid - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_bisect(f, grid[i], grid[i + 1], vals[i]))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    roots = [float(r) for r in roots]
    out: list[float] = []
    for r in sorted(roots):
        if not out or r - out[-1] > 1e-9 * max(1.0, r):
            out.append(r)
    return out


def rotation_spec(theta: float, lam: float, c0: float, n: int = 2) -> AmbientSpec:
    return AmbientSpec(rotation_map(theta, (0, 1), n), Constant(c0), lam)


def circle_builder(rho: float, center=None, plane=(0, 1), n: int = 2, N: int = 512) -> DiscreteCurve:
    """``N`` equally spaced nodes on the circle of radius ``rho``."""
    return circle(rho, center=center, plane=plane, n=n, N=N)


def circle_residual(rho: float, spec: AmbientSpec, N: int = 512, center=None) -> float:
    """Sup norm of the gradient on ``S_rho``."""
    return residual_norms(circle_builder(rho, center, n=spec.n, N=N), spec).sup


def radii_case_iv(theta: float, lam: float, c0: float, N_check: int | None = 512
                  ) -> CircleCriticality:
    """Positive roots of the rotation quartic, each with its circle residual.

    ``N_check=None`` skips the residual evaluation.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    coeffs = quartic_coeffs(theta, lam, c0)
    us = positive_roots(lambda u: ((u * u + coeffs[2]) * u + coeffs[3]) * u + coeffs[4])
    radii = sorted(1.0 / u for u in us)
    check = []
    if N_check is not None:
        spec = rotation_spec(theta, lam, c0)
        check = [circle_residual(r, spec, N_check) for r in radii]
    return CircleCriticality("rotation_of_plane", radii, coeffs, check)


def classify(case: str, lam: float, c0: float = 0.0, theta: float = 0.0, M=None,
             N_check: int | None = 512) -> CircleCriticality:
    """Dispatch on ``case`` in ``{i, ii, iii, iv}``."""
    if case == "i":
        r = radius_case_i(lam, c0)
        spec = AmbientSpec.simple(2, lam, c0=c0)
        res = [circle_residual(r, spec, N_check)] if N_check else []
        return CircleCriticality("translation_zero", [r], (), res)
    if case == "ii":
        M = np.array([1.0, 0.0]) if M is None else np.asarray(M, dtype=float)
        r = radius_case_ii(M, lam, c0)
        spec = AmbientSpec.simple(2, lam, c0=c0, M=M)
        res = [circle_residual(r, spec, N_check)] if N_check else []
        return CircleCriticality("translation_nonzero", [r], (), res)
    if case == "iii":
        r = radius_case_iii(lam, c0)
        res = [circle_residual(r, rotation_spec(0.0, lam, c0), N_check)] if N_check else []
        return CircleCriticality("rotation_fixing_circle", [r], quartic_coeffs(0.0, lam, c0), res)
    if case == "iv":
        return radii_case_iv(theta, lam, c0, N_check)
    raise ValueError(f"unknown case {case!r}; expected one of i, ii, iii, iv")


def sweep_figure1(lam: float = 1.0, c0: float = 1.0, n_theta: int = 512,
                  theta_grid=None) -> list[tuple[float, list[float]]]:
    """Radii of the rotation quartic over ``theta`` in ``[0, 2 pi]`` (endpoints included)."""
    if theta_grid is None:
        if n_theta < 512:
            raise ValueError(f"need at least 512 angles, got {n_theta}")
        theta_grid = np.linspace(0.0, 2.0 * np.pi, n_theta)
    return [(float(t), radii_case_iv(float(t), lam, c0, N_check=None).radii) for t in theta_grid]


def write_figure1_csv(rows, path) -> None:
    width = max((len(r) for _, r in rows), default=1)
    width = max(width, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta"] + [f"rho_{j + 1}" for j in range(width)])
        for theta, radii in rows:
            cells = [f"{x:.17g}" for x in radii] + [""] * (width - len(radii))
            w.writerow([f"{theta:.17g}"] + cells)


def nonexistence_scan_case_ii(M, lam: float = 1.0, c0: float = 0.0, rho_range=(0.1, 10.0),
                              n_rho: int = 200, N: int = 512) -> tuple[float, float]:
    """Minimum sup residual of origin-centred ``S_rho`` over a log grid of radii.

    Returns ``(min_residual, argmin_rho)``.
    """
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        raise ValueError("M must be non-zero")
    if n_rho < 200:
        raise ValueError(f"need at least 200 radii, got {n_rho}")
    spec = AmbientSpec.simple(M.size, lam, c0=c0, M=M)
    rhos = np.geomspace(*rho_range, n_rho)
    res = np.array([circle_residual(r, spec, N) for r in rhos])
    j = int(np.argmin(res))
    return float(res[j]), float(rhos[j])


# -- f = 1/(1+|x|^2), cvec = 0 ----------------------------------------------


def inverse_quadratic_spec(lam: float = 15.0 / 16.0) -> AmbientSpec:
    return AmbientSpec(AffineMap.zero(3), InverseQuadratic(), lam)


def homothety_rate(rho: float, lam: float) -> float:
    """``d rho / dt`` of an origin-centred circle under ``inverse_quadratic_spec``."""
    q = 1.0 + rho * rho
    coef = 0.5 / rho**2 - lam - 0.5 / q**2 + 2.0 * rho**2 / q**3
    return coef / rho


def homothety_fixed_point(lam: float = 15.0 / 16.0) -> float:
    """Stable zero of :func:`homothety_rate` found by bisection.

    Small circles grow (the ``1/rho^2`` term dominates) so the largest sign
    change from positive to negative is the attracting radius.
    """
    roots = positive_roots(lambda r: homothety_rate(r, lam), 1e-3, 1e3, 2000)
    stable = [r for r in roots if homothety_rate(r * (1 - 1e-6), lam) > 0]
    if not stable:
        raise ValueError(f"no attracting radius for lambda={lam}")
    return stable[-1]


def translating_velocity(lam: float, rho: float = 1.0 / math.sqrt(2.0)):
    """Exact ``-H`` on ``S_rho + rho e3`` as ``(coefficient of k, e3 component)``."""
    q = 1.0 + 2.0 * rho * rho
    ck = lam - 0.5 / rho**2 + 0.5 / q**2 - 2.0 * rho**2 / q**3
    return ck, 2.0 * rho / q**3

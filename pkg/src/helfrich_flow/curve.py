"""
Closed discrete curves in R^n
=============================

Sampled closed curves and the periodic finite-difference operators used by
the energy and flow modules: arclength spacing, unit tangent, curvature
vector, normal projection and the normal derivative.

All stencils are second-order central differences along arclength.  Local
spacings are the arc lengths of the periodic cubic spline through the nodes,
so on a uniformly spaced mesh they reduce to the textbook formulas
``(g[i+1] - g[i-1]) / 2h`` and ``(g[i+1] - 2 g[i] + g[i-1]) / h**2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

MIN_NODES = 8
TOL_MESH = 1e-6
# chords shorter than this fraction of the mean chord count as coincident nodes
DEGENERATE_CHORD = 1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


class CurveError(ValueError):
    """Raised for invalid or degenerate curve data."""


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """N ordered nodes of a closed curve in R^n.

    Node ``N-1`` connects back to node ``0``; the first node is not repeated.

    Parameters
    ----------
    points : array_like, shape (N, n)
        Node positions in parameter order.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2:
            raise CurveError(f"points must be a 2-d array, got shape {pts.shape}")
        N, n = pts.shape
        if N < MIN_NODES:
            raise CurveError(f"need at least {MIN_NODES} nodes, got {N}")
        if n < 2:
            raise CurveError(f"ambient dimension must be >= 2, got {n}")
        if not np.all(np.isfinite(pts)):
            raise CurveError("points contain non-finite values")
        chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        mean = chords.mean()
        bad = np.flatnonzero(chords <= DEGENERATE_CHORD * mean)
        if mean == 0.0 or bad.size:
            i = int(bad[0]) if bad.size else 0
            raise CurveError(
                f"degenerate curve: chord {i}->{(i + 1) % N} has length "
                f"{chords[i]:.3e} (mean chord {mean:.3e})"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.N

    @cached_property
    def chords(self) -> np.ndarray:
        """Length of each segment ``i -> i+1`` of the closing polygon."""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    @cached_property
    def spline(self) -> CubicSpline:
        """Periodic cubic spline through the nodes, parametrised by cumulative chord."""
        u = np.concatenate([[0.0], np.cumsum(self.chords)])
        closed = np.vstack([self.points, self.points[:1]])
        return CubicSpline(u, closed, bc_type="periodic")

    @cached_property
    def arcs(self) -> np.ndarray:
        """Arc length of the spline segment from node ``i`` to node ``i+1``."""
        sp = self.spline
        u0 = sp.x[:-1]
        du = np.diff(sp.x)
        nodes = u0[:, None] + 0.5 * du[:, None] * (_GL_X[None, :] + 1.0)
        speed = np.linalg.norm(sp(nodes, 1), axis=-1)
        return 0.5 * du * (speed @ _GL_W)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weight ``ds`` attached to each node."""
        return 0.5 * (self.arcs + np.roll(self.arcs, 1))

    @property
    def h(self) -> float:
        """Mean arclength spacing."""
        return float(self.arcs.sum() / self.N)

    @cached_property
    def tangent(self) -> np.ndarray:
        d = d_ds(self.points, self)
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    @cached_property
    def curvature(self) -> np.ndarray:
        return d2_ds2(self.points, self)

    def translated(self, offset) -> "DiscreteCurve":
        return DiscreteCurve(self.points + np.asarray(offset, dtype=float))


def _check_field(X, curve: DiscreteCurve) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != curve.points.shape:
        raise CurveError(
            f"node field shape {X.shape} does not match curve {curve.points.shape}"
        )
    return X


def d_ds(X, curve: DiscreteCurve) -> np.ndarray:
    """Central first derivative of a node field along arclength."""
    X = _check_field(X, curve) if np.ndim(X) == 2 else np.asarray(X, dtype=float)
    hp = curve.arcs
    hm = np.roll(curve.arcs, 1)
    fwd = np.roll(X, -1, axis=0) - X
    bwd = X - np.roll(X, 1, axis=0)
    if X.ndim == 2:
        hp, hm = hp[:, None], hm[:, None]
    return (hm**2 * fwd + hp**2 * bwd) / (hp * hm * (hp + hm))


def d2_ds2(X, curve: DiscreteCurve) -> np.ndarray:
    """Central second derivative of a node field along arclength."""
    X = _check_field(X, curve) if np.ndim(X) == 2 else np.asarray(X, dtype=float)
    hp = curve.arcs
    hm = np.roll(curve.arcs, 1)
    fwd = np.roll(X, -1, axis=0) - X
    bwd = X - np.roll(X, 1, axis=0)
    if X.ndim == 2:
        hp, hm = hp[:, None], hm[:, None]
    return 2.0 * (fwd / hp - bwd / hm) / (hp + hm)


def integrate(values, curve: DiscreteCurve) -> float:
    """Periodic trapezoid rule for a per-node scalar integrand."""
    return float(np.dot(curve.weights, values))


def inner(X, Y, curve: DiscreteCurve) -> float:
    """L2 pairing of two node fields."""
    return integrate(np.einsum("ij,ij->i", X, Y), curve)


def l2_norm(X, curve: DiscreteCurve) -> float:
    return float(np.sqrt(max(inner(X, X, curve), 0.0)))


def length(curve: DiscreteCurve) -> float:
    """Length of the closed polygon through the nodes."""
    return float(curve.chords.sum())


def arclength(curve: DiscreteCurve) -> float:
    """Length of the periodic spline through the nodes (the length used by quadrature)."""
    return float(curve.arcs.sum())


def tangent(curve: DiscreteCurve) -> np.ndarray:
    """Unit tangent field, central difference renormalised to length one."""
    return curve.tangent


def curvature(curve: DiscreteCurve) -> np.ndarray:
    """Curvature vector field, second arclength difference of the positions."""
    return curve.curvature


def normal_projection(X, curve: DiscreteCurve) -> np.ndarray:
    """Remove the tangential component of a node field."""
    X = _check_field(X, curve)
    tau = curve.tangent
    return X - np.einsum("ij,ij->i", X, tau)[:, None] * tau


def normal_derivative(X, curve: DiscreteCurve) -> np.ndarray:
    """Normal part of the arclength derivative of a node field."""
    return normal_projection(d_ds(X, curve), curve)


def mesh_ratio(curve: DiscreteCurve) -> float:
    """Max over min chord length."""
    return float(curve.chords.max() / curve.chords.min())


def _arc_position(sp: CubicSpline, seg_start_s, targets, n_newton=8):
    """Invert s(u) for each target arclength on a periodic spline."""
    u_knots = sp.x
    s_knots = np.concatenate([[0.0], np.cumsum(seg_start_s)])
    total = s_knots[-1]
    targets = np.mod(targets, total)
    seg = np.clip(np.searchsorted(s_knots, targets, side="right") - 1, 0, len(seg_start_s) - 1)
    ua = u_knots[seg]
    frac = (targets - s_knots[seg]) / seg_start_s[seg]
    u = ua + frac * (u_knots[seg + 1] - ua)
    for _ in range(n_newton):
        half = 0.5 * (u - ua)
        q = ua[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        partial = half * (np.linalg.norm(sp(q, 1), axis=-1) @ _GL_W)
        resid = s_knots[seg] + partial - targets
        speed = np.linalg.norm(sp(u, 1), axis=-1)
        u = u - resid / speed
    return u


def resample_uniform(curve: DiscreteCurve, N_out: int | None = None) -> DiscreteCurve:
    """Resample a closed curve to nodes with equal chord lengths.

    Nodes are placed on the periodic cubic spline through the input nodes,
    starting at input node 0.  Spacing starts from equal arclength and is
    then adjusted until all chords agree to ``1e-12`` relative.

    Parameters
    ----------
    curve : DiscreteCurve
        Input curve; must be regular.
    N_out : int, optional
        Number of output nodes.  Defaults to ``curve.N``.

    Returns
    -------
    DiscreteCurve
    """
    N_out = curve.N if N_out is None else int(N_out)
    if N_out < MIN_NODES:
        raise CurveError(f"need at least {MIN_NODES} output nodes, got {N_out}")
    sp = curve.spline
    arcs = curve.arcs
    period = sp.x[-1]
    # equal arclength first, then equalize chords by rescaling parameter gaps
    u = _arc_position(sp, arcs, arcs.sum() * np.arange(N_out) / N_out)
    du = np.diff(np.append(u, period + u[0]))
    pts = sp(u)
    for _ in range(100):
        chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if chords.max() / chords.min() - 1.0 < 1e-12:
            break
        du = du * (chords.mean() / chords)
        du *= period / du.sum()
        u = u[0] + np.concatenate([[0.0], np.cumsum(du)[:-1]])
        pts = sp(u)
    return DiscreteCurve(pts)


# -- builders -----------------------------------------------------------------


def circle(rho: float, center=None, plane=(0, 1), n: int = 2, N: int = 256,
           phase: float = 0.0) -> DiscreteCurve:
    """Counter-clockwise circle of radius ``rho`` in the coordinate plane ``plane``."""
    if rho <= 0:
        raise CurveError(f"radius must be positive, got {rho}")
    i, j = plane
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise CurveError(f"invalid plane {plane} for dimension {n}")
    t = phase + 2.0 * np.pi * np.arange(N) / N
    pts = np.zeros((N, n))
    pts[:, i] = rho * np.cos(t)
    pts[:, j] = rho * np.sin(t)
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return DiscreteCurve(pts)


def ellipse(a: float, b: float, n: int = 2, N: int = 256, center=None) -> DiscreteCurve:
    """Ellipse with semi-axes ``a`` (first axis) and ``b`` (second), resampled uniformly."""
    M = max(8 * N, 2048)
    t = 2.0 * np.pi * np.arange(M) / M
    pts = np.zeros((M, n))
    pts[:, 0] = a * np.cos(t)
    pts[:, 1] = b * np.sin(t)
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return resample_uniform(DiscreteCurve(pts), N)


def fourier_curve(modes: int = 5, amplitude: float = 0.1, seed: int = 0, n: int = 2,
                  N: int = 256, radius: float = 1.0, decay: float = 3.0) -> DiscreteCurve:
    """Random smooth perturbation of a circle.

    Mode ``m`` (2 <= m <= modes) carries normal random coefficients in every
    coordinate scaled by ``amplitude / m**decay``.
    """
    rng = np.random.default_rng(seed)
    M = max(8 * N, 2048)
    t = 2.0 * np.pi * np.arange(M) / M
    pts = np.zeros((M, n))
    pts[:, 0] = radius * np.cos(t)
    pts[:, 1] = radius * np.sin(t)
    for m in range(2, modes + 1):
        a = rng.standard_normal(n) * amplitude / m**decay
        b = rng.standard_normal(n) * amplitude / m**decay
        pts += np.outer(np.cos(m * t), a) + np.outer(np.sin(m * t), b)
    return resample_uniform(DiscreteCurve(pts), N)


# -- file format --------------------------------------------------------------


def write_curve_csv(curve: DiscreteCurve, path) -> None:
    """Write ``# n=<dim> N=<count>`` followed by one row per node."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# n={curve.n} N={curve.N}\n")
        for row in curve.points:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_curve_csv(path) -> DiscreteCurve:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise CurveError(f"{path}: missing '# n=<dim> N=<count>' header")
        fields = dict(tok.split("=", 1) for tok in header[1:].split() if "=" in tok)
        try:
            n, N = int(fields["n"]), int(fields["N"])
        except (KeyError, ValueError) as exc:
            raise CurveError(f"{path}: malformed header {header!r}") from exc
        rows = [line for line in fh if line.strip()]
    pts = np.array([[float(x) for x in r.split(",")] for r in rows])
    if pts.shape != (N, n):
        raise CurveError(f"{path}: header says N={N}, n={n} but data has shape {pts.shape}")
    return DiscreteCurve(pts)

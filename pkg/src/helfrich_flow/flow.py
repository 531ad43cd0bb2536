"""Time integration of the gradient flow ``d gamma / dt = -H(gamma)``.

Two integrators are provided.  ``imex_euler`` treats the constant-coefficient
biharmonic ``d_s^4`` implicitly through an FFT solve and everything else
explicitly; ``explicit_rk4`` is the classical four-stage scheme with
``dt = C_stab h^4`` and is meant for small validation runs.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import AmbientSpec
from .curve import CurveError, DiscreteCurve, mesh_ratio, resample_uniform
from .energy import MAX_MESH_RATIO, EnergyReport, energy, euler_lagrange, residual_norms
from .monitors import MonitorContext, monitor_curvature_derivatives

log = logging.getLogger(__name__)

INTEGRATORS = ("imex_euler", "explicit_rk4")
OUTCOMES = ("converged", "t_max_reached", "translating_detected", "aborted")
CIRCLE_TOL = 1e-4
PLATEAU_WINDOW = 100
PLATEAU_RTOL = 1e-3


class FlowAbort(RuntimeError):
    """Raised when the discrete flow produces unusable data."""


@dataclass(frozen=True)
class FlowConfig:
    integrator: str = "imex_euler"
    dt: float | None = 1e-4
    C_stab: float = 0.1
    t_max: float = 1.0
    resample_every: int = 10
    residual_tol: float = 1e-6
    record_every: int = 1
    seed: int = 0
    monitors: bool = True
    curvature_orders: int = 3

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.integrator == "imex_euler" and not (self.dt is not None and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.C_stab > 0:
            raise ValueError(f"C_stab must be positive, got {self.C_stab}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.resample_every < 1 or self.record_every < 1:
            raise ValueError("resample_every and record_every must be at least 1")
        if not self.residual_tol > 0:
            raise ValueError(f"residual_tol must be positive, got {self.residual_tol}")

    def step_size(self, curve: DiscreteCurve) -> float:
        if self.integrator == "explicit_rk4":
            return self.C_stab * curve.h**4
        return float(self.dt)


@dataclass(frozen=True, eq=False)
class FlowState:
    curve: DiscreteCurve
    t: float = 0.0
    step: int = 0


# -- geometry summaries --------------------------------------------------------


def centroid(curve: DiscreteCurve) -> np.ndarray:
    """Arclength-weighted mean of the nodes."""
    w = curve.weights
    return w @ curve.points / w.sum()


@dataclass(frozen=True)
class CircleFit:
    is_circle: bool
    center: np.ndarray
    radius: float
    eccentricity: float
    max_deviation: float

    def to_dict(self) -> dict:
        return {"is_circle": self.is_circle, "center": [float(x) for x in self.center],
                "radius": self.radius, "eccentricity": self.eccentricity,
                "max_deviation": self.max_deviation}


def detect_circle(curve: DiscreteCurve, tol: float = CIRCLE_TOL) -> CircleFit:
    """Algebraic least-squares circle in the best-fit plane of the nodes.

    ``eccentricity`` is the flattening ``1 - r_min / r_max`` of the node
    distances from the fitted centre; ``max_deviation`` is the largest
    distance from a node to the fitted circle, relative to the radius.
    """
    P = curve.points
    mean = P.mean(axis=0)
    Q = P - mean
    _, _, Vt = np.linalg.svd(Q, full_matrices=False)
    basis = Vt[:2]
    xy = Q @ basis.T
    A = np.column_stack([xy, np.ones(len(xy))])
    rhs = np.einsum("ij,ij->i", xy, xy)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    c2 = 0.5 * sol[:2]
    radius = float(np.sqrt(max(sol[2] + c2 @ c2, 0.0)))
    center = mean + c2 @ basis
    d = P - center
    out_of_plane = d - (d @ basis.T) @ basis
    r_in = np.linalg.norm(d @ basis.T, axis=1)
    dev = np.sqrt((r_in - radius) ** 2 + np.einsum("ij,ij->i", out_of_plane, out_of_plane))
    rel = float(dev.max() / radius) if radius > 0 else math.inf
    dist = np.linalg.norm(d, axis=1)
    ecc = float(1.0 - dist.min() / dist.max())
    return CircleFit(rel <= tol, center, radius, ecc, rel)


# -- stepping ------------------------------------------------------------------


def biharmonic_symbol(N: int, h: float) -> np.ndarray:
    """Fourier symbol of the periodic 5-point ``d_s^4`` stencil with spacing ``h``."""
    j = np.arange(N)
    return (2.0 - 2.0 * np.cos(2.0 * np.pi * j / N)) ** 2 / h**4


def _velocity(curve: DiscreteCurve, spec: AmbientSpec) -> np.ndarray:
    return euler_lagrange(curve, spec).velocity


def _checked(points: np.ndarray, what: str) -> DiscreteCurve:
    if not np.all(np.isfinite(points)):
        raise FlowAbort(f"non-finite node positions after {what}")
    try:
        return DiscreteCurve(points)
    except CurveError as exc:
        raise FlowAbort(f"degenerate curve after {what}: {exc}") from exc


def _ensure_uniform(curve: DiscreteCurve) -> DiscreteCurve:
    if mesh_ratio(curve) <= MAX_MESH_RATIO:
        return curve
    try:
        out = resample_uniform(curve)
    except CurveError as exc:
        raise FlowAbort(f"mesh degenerated and could not be resampled: {exc}") from exc
    if mesh_ratio(out) > MAX_MESH_RATIO:
        raise FlowAbort("mesh degenerated beyond repair")
    return out


def imex_euler_update(curve: DiscreteCurve, V: np.ndarray, dt: float) -> np.ndarray:
    """``(I + dt D4) gamma_new = gamma + dt (V + D4 gamma)``, i.e. ``gamma + dt (I + dt D4)^-1 V``."""
    sym = biharmonic_symbol(curve.N, curve.h)
    dV = np.fft.ifft(np.fft.fft(V, axis=0) / (1.0 + dt * sym)[:, None], axis=0).real
    return curve.points + dt * dV


def rk4_update(curve: DiscreteCurve, spec: AmbientSpec, dt: float, V1: np.ndarray) -> np.ndarray:
    P = curve.points
    V2 = _velocity(_ensure_uniform(_checked(P + 0.5 * dt * V1, "RK4 stage 2")), spec)
    V3 = _velocity(_ensure_uniform(_checked(P + 0.5 * dt * V2, "RK4 stage 3")), spec)
    V4 = _velocity(_ensure_uniform(_checked(P + dt * V3, "RK4 stage 4")), spec)
    return P + dt / 6.0 * (V1 + 2.0 * V2 + 2.0 * V3 + V4)


def step(state: FlowState, spec: AmbientSpec, config: FlowConfig,
         velocity: np.ndarray | None = None, dt: float | None = None) -> FlowState:
    """Advance one time step; resample every ``config.resample_every`` steps.

    ``velocity`` may carry ``-H`` already evaluated on ``state.curve``;
    ``dt`` overrides the configured step size.
    """
    curve = _ensure_uniform(state.curve)
    dt = config.step_size(curve) if dt is None else dt
    V = _velocity(curve, spec) if velocity is None else velocity
    if not np.all(np.isfinite(V)):
        raise FlowAbort(f"non-finite velocity at t={state.t:.6g}")
    if config.integrator == "imex_euler":
        pts = imex_euler_update(curve, V, dt)
    else:
        pts = rk4_update(curve, spec, dt, V)
    new = _checked(pts, f"step {state.step + 1}")
    if (state.step + 1) % config.resample_every == 0:
        try:
            new = resample_uniform(new)
        except CurveError as exc:
            raise FlowAbort(f"resampling failed at step {state.step + 1}: {exc}") from exc
    return FlowState(new, state.t + dt, state.step + 1)


# -- runs ----------------------------------------------------------------------


@dataclass
class FlowDiagnostics:
    """Per-record snapshots plus per-step energy and residual series."""

    records: list[dict] = field(default_factory=list)
    step_t: list[float] = field(default_factory=list)
    step_energy: list[float] = field(default_factory=list)
    step_residual_l2: list[float] = field(default_factory=list)
    message: str = ""

    def series(self, key: str) -> np.ndarray:
        """Record-level series; nested keys are dotted, e.g. ``residual.l2``."""
        out = []
        for r in self.records:
            v = r
            for part in key.split("."):
                v = v[part]
            out.append(v)
        return np.asarray(out, dtype=float)

    def energy_increments(self) -> np.ndarray:
        return np.diff(np.asarray(self.step_energy))

    def dissipation_defect(self) -> np.ndarray:
        """``|dE/dt + ||H||^2|`` per step with ``H`` evaluated at the start of the step."""
        E = np.asarray(self.step_energy)
        t = np.asarray(self.step_t)
        r = np.asarray(self.step_residual_l2)
        return np.abs(np.diff(E) / np.diff(t) + r[:-1] ** 2)

    def to_json(self) -> list[dict]:
        return self.records


@dataclass
class RunResult:
    state: FlowState
    diagnostics: FlowDiagnostics
    outcome: str
    snapshots: list = field(default_factory=list)


def _record(state: FlowState, rep: EnergyReport, res, ctx: MonitorContext | None,
            config: FlowConfig) -> dict:
    fit = detect_circle(state.curve)
    rec = {
        "t": state.t,
        "step": state.step,
        "energy": rep.to_dict(),
        "residual": {"l2": res.l2, "sup": res.sup},
        "centroid": [float(x) for x in centroid(state.curve)],
        "circle": fit.to_dict(),
        "curvature_derivatives": monitor_curvature_derivatives(state.curve, config.curvature_orders),
    }
    if ctx is not None:
        rec["monitors"] = {k: v.to_dict() for k, v in ctx.evaluate(state.curve).items()}
    return rec


def translating(diag: FlowDiagnostics, tol: float, window: int = PLATEAU_WINDOW,
                rtol: float = PLATEAU_RTOL) -> bool:
    """Residual plateau over the last ``window`` records with a moving centroid."""
    if len(diag.records) < window + 1:
        return False
    recs = diag.records[-(window + 1):]
    r = np.array([x["residual"]["l2"] for x in recs])
    if r[-1] <= 0 or np.max(np.abs(r - r[-1])) / r[-1] >= rtol:
        return False
    c = np.array([x["centroid"] for x in recs])
    dt = recs[-1]["t"] - recs[0]["t"]
    speed = np.linalg.norm(c[-1] - c[0]) / dt if dt > 0 else 0.0
    return bool(speed > 10.0 * tol)


def run(curve0: DiscreteCurve, spec: AmbientSpec, config: FlowConfig) -> RunResult:
    """Integrate until convergence, ``t_max`` or a numerical abort.

    The outcome is ``converged`` as soon as the L2 residual drops below
    ``residual_tol``; otherwise the run ends at ``t_max`` and is classified
    ``translating_detected`` or ``t_max_reached`` from the recorded series.
    """
    diag = FlowDiagnostics()
    snapshots: list[tuple[float, DiscreteCurve]] = []
    state = FlowState(_ensure_uniform(curve0))
    ctx = MonitorContext.build(spec, state.curve) if config.monitors else None
    outcome = "t_max_reached"
    try:
        while True:
            curve = _ensure_uniform(state.curve)
            state = FlowState(curve, state.t, state.step)
            grad = euler_lagrange(curve, spec)
            res = residual_norms(curve, spec, grad)
            rep = energy(curve, spec)
            if not (math.isfinite(rep.total) and math.isfinite(res.l2)):
                raise FlowAbort(f"non-finite energy or residual at t={state.t:.6g}")
            diag.step_t.append(state.t)
            diag.step_energy.append(rep.total)
            diag.step_residual_l2.append(res.l2)
            done = res.l2 < config.residual_tol
            last = done or state.t >= config.t_max * (1 - 1e-12)
            if state.step % config.record_every == 0 or last:
                diag.records.append(_record(state, rep, res, ctx, config))
                snapshots.append((state.t, state.curve))
            if done:
                outcome = "converged"
                break
            if last:
                break
            dt = min(config.step_size(curve), config.t_max - state.t)
            state = step(state, spec, config, grad.velocity, dt)
    except FlowAbort as exc:
        log.warning("flow aborted: %s", exc)
        diag.message = str(exc)
        return RunResult(state, diag, "aborted", snapshots)
    if outcome != "converged" and translating(diag, config.residual_tol):
        outcome = "translating_detected"
    return RunResult(state, diag, outcome, snapshots)


# -- output --------------------------------------------------------------------


def write_trajectory_csv(snapshots, path) -> None:
    """Rows ``t, node_index, x1..xn`` for each ``(t, curve)`` snapshot."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = None
        for t, curve in snapshots:
            if header is None:
                header = ["t", "node_index"] + [f"x{j + 1}" for j in range(curve.n)]
                w.writerow(header)
            for i, p in enumerate(curve.points):
                w.writerow([f"{t:.17g}", i] + [f"{x:.17g}" for x in p])


def write_diagnostics_json(diag: FlowDiagnostics, path) -> None:
    with open(path, "w") as fh:
        json.dump(diag.to_json(), fh, indent=1, allow_nan=True)

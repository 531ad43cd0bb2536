"""Runtime checks of the a-priori bounds along energy-bounded families of curves.

Each monitor compares a geometric quantity ``lhs`` of the current curve with
a bound ``rhs`` built only from the initial energy ``H0``, ``lambda``, the
dimension ``n`` and the ambient constants.  A monitor whose hypotheses fail
is reported as inapplicable (``holds is None``), never as a failure.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .ambient import (
    AmbientSpec,
    operator_norm,
    spontaneous,
    validate_affine_assumption,
    validate_properness,
)
from .curve import DiscreteCurve, arclength, l2_norm, normal_derivative
from .energy import energy

REL_SLACK = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MonitorVerdict:
    name: str
    holds: bool | None
    lhs: float
    rhs: float
    margin: float

    @property
    def applicable(self) -> bool:
        return self.holds is not None

    def to_dict(self) -> dict:
        return asdict(self)


def verdict(name: str, lhs: float, rhs: float) -> MonitorVerdict:
    holds = bool(lhs <= rhs + REL_SLACK * (1.0 + abs(rhs)))
    return MonitorVerdict(name, holds, float(lhs), float(rhs), float(rhs - lhs))


def inapplicable(name: str, lhs: float = math.nan) -> MonitorVerdict:
    return MonitorVerdict(name, None, float(lhs), math.nan, math.nan)


def _assumption1(spec: AmbientSpec) -> bool:
    return validate_affine_assumption(spec.affine.L, spec.lam).valid


def _max_norm(X) -> float:
    return float(np.linalg.norm(X, axis=1).max())


def monitor_energy_split(curve: DiscreteCurve, spec: AmbientSpec, H0: float,
                         assumption_ok: bool | None = None) -> MonitorVerdict:
    """``1/2 int |k|^2 + 1/2 int |c|^2 <= H0``."""
    rep = energy(curve, spec)
    lhs = rep.elastic_only + rep.spontaneous_only
    if not (assumption_ok if assumption_ok is not None else _assumption1(spec)):
        return inapplicable("energy_split", lhs)
    return verdict("energy_split", lhs, H0)


def monitor_length(curve: DiscreteCurve, spec: AmbientSpec, H0: float,
                   assumption_ok: bool | None = None) -> tuple[MonitorVerdict, MonitorVerdict]:
    """``2 pi^2 / H0 <= L <= H0 / lambda``, as (lower, upper)."""
    L = arclength(curve)
    if not (assumption_ok if assumption_ok is not None else _assumption1(spec)):
        return inapplicable("length_lower", L), inapplicable("length_upper", L)
    # the lower bound reads lhs <= rhs with lhs = 2 pi^2 / H0 and rhs = L
    return (verdict("length_lower", 2.0 * math.pi**2 / H0, L),
            verdict("length_upper", L, H0 / spec.lam))


def inverse_norm(L) -> float | None:
    """``|L^-1|``, or ``None`` when ``L`` is singular to working precision."""
    L = np.asarray(L, dtype=float)
    if not np.any(L) or np.linalg.cond(L) >= MAX_CONDITION:
        return None
    return operator_norm(np.linalg.inv(L))


def position_invertible_rhs(spec: AmbientSpec, H0: float, inv_norm: float) -> float:
    c0 = spec.scalar.bounds[0]
    M2 = float(spec.affine.M @ spec.affine.M)
    return spec.n * H0 * (1.0 / spec.lam
                          + inv_norm / math.pi * math.sqrt((M2 + 2.0 * c0**2) / spec.lam + 4.0))


def monitor_position_invertible(curve: DiscreteCurve, spec: AmbientSpec, H0: float,
                                assumption_ok: bool | None = None,
                                inv_norm: float | None = None) -> MonitorVerdict:
    """``max |gamma| <= n H0 (1/lambda + |L^-1| / pi sqrt((|M|^2 + 2 c0^2)/lambda + 4))``."""
    lhs = _max_norm(curve.points)
    inv = inv_norm if inv_norm is not None else inverse_norm(spec.affine.L)
    ok = assumption_ok if assumption_ok is not None else _assumption1(spec)
    if inv is None or not ok:
        return inapplicable("position_invertible", lhs)
    return verdict("position_invertible", lhs, position_invertible_rhs(spec, H0, inv))


def monitor_position_proper(curve: DiscreteCurve, spec: AmbientSpec, H0: float,
                            R: float | None, assumption_ok: bool | None = None) -> MonitorVerdict:
    """``max |gamma| <= R + H0 / (2 lambda)`` given a properness witness ``R``."""
    lhs = _max_norm(curve.points)
    ok = assumption_ok if assumption_ok is not None else _assumption1(spec)
    if R is None or not ok:
        return inapplicable("position_proper", lhs)
    return verdict("position_proper", lhs, R + H0 / (2.0 * spec.lam))


def c_bound_rhs(spec: AmbientSpec, H0: float, L_norm: float | None = None) -> tuple[float, float]:
    """Right-hand sides for ``sup |c|`` and ``sup |cvec|``."""
    c0, c1, _ = spec.scalar.bounds
    Ln = operator_norm(spec.affine.L) if L_norm is None else L_norm
    lam, n = spec.lam, spec.n
    rhs_c = n * H0 / lam * math.sqrt(8.0 * lam**2 / math.pi**2 + 3.0 * Ln**2
                                     + 6.0 * lam * c0**2 + 3.0 * c1**2)
    rhs_cvec = 2.0 * n * H0 * math.sqrt((c0 / H0) ** 2 + math.pi**-2 + Ln**2 / (4.0 * lam**2))
    return rhs_c, rhs_cvec


def monitor_c_bounds(curve: DiscreteCurve, spec: AmbientSpec, H0: float,
                     assumption_ok: bool | None = None, L_norm: float | None = None
                     ) -> tuple[MonitorVerdict, MonitorVerdict]:
    """``sup |c|`` and ``sup |cvec|`` against their energy bounds."""
    sp = spontaneous(curve, spec)
    lhs_c, lhs_v = _max_norm(sp.c), _max_norm(sp.cvec)
    if not (assumption_ok if assumption_ok is not None else _assumption1(spec)):
        return inapplicable("c_sup", lhs_c), inapplicable("cvec_sup", lhs_v)
    rhs_c, rhs_v = c_bound_rhs(spec, H0, L_norm)
    return verdict("c_sup", lhs_c, rhs_c), verdict("cvec_sup", lhs_v, rhs_v)


def monitor_curvature_derivatives(curve: DiscreteCurve, m: int = 3) -> list[float]:
    """``||nabla_s^j k||^2`` for ``j = 1..m`` (``m <= 3``)."""
    if m not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {m}")
    out = []
    X = curve.curvature
    for _ in range(m):
        X = normal_derivative(X, curve)
        out.append(l2_norm(X, curve) ** 2)
    return out


def series_bounded(series, slack: float | None = None) -> bool:
    """Finite and never above the initial value plus ``slack`` (default ``10 (1 + initial)``)."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        return True
    if not np.all(np.isfinite(s)):
        return False
    slack = 10.0 * (1.0 + abs(s[0])) if slack is None else slack
    return bool(s.max() <= s[0] + slack)


@dataclass(frozen=True)
class MonitorContext:
    """Curve-independent data shared by all monitors along one run."""

    spec: AmbientSpec
    H0: float
    assumption1: bool
    L_norm: float
    inv_norm: float | None
    R: float | None

    @classmethod
    def build(cls, spec: AmbientSpec, curve0: DiscreteCurve, H0: float | None = None
              ) -> "MonitorContext":
        H0 = energy(curve0, spec).total if H0 is None else H0
        proper = validate_properness(spec, curve0, H0)
        return cls(spec, H0, _assumption1(spec), operator_norm(spec.affine.L),
                   inverse_norm(spec.affine.L), proper.R if proper.holds else None)

    def evaluate(self, curve: DiscreteCurve) -> dict[str, MonitorVerdict]:
        spec, H0, ok = self.spec, self.H0, self.assumption1
        lo, hi = monitor_length(curve, spec, H0, ok)
        c, cv = monitor_c_bounds(curve, spec, H0, ok, self.L_norm)
        vs = [monitor_energy_split(curve, spec, H0, ok), lo, hi,
              monitor_position_invertible(curve, spec, H0, ok, self.inv_norm),
              monitor_position_proper(curve, spec, H0, self.R, ok), c, cv]
        return {v.name: v for v in vs}

"""Run configuration: a TOML file with flat dotted keys.

Example::

    lambda = 0.5
    ambient.L = [[0.0, 0.0], [0.0, 0.0]]
    ambient.M = [0.0, 0.0]
    ambient.f.kind = "constant"
    ambient.f.c0 = 0.0
    curve.builder = "circle"
    curve.rho = 2.0
    curve.N = 512
    flow.integrator = "imex_euler"
    flow.dt = 0.01
    flow.t_max = 40.0
    output.dir = "out"

Every key is validated before any computation; errors name the key.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ambient import SCALAR_FIELDS, AffineMap, AmbientSpec, Constant, InverseQuadratic
from .curve import DiscreteCurve, circle, ellipse, fourier_curve, read_curve_csv
from .flow import INTEGRATORS, FlowConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid or incomplete configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


_FLOW_KEYS = {"integrator", "dt", "C_stab", "t_max", "resample_every", "residual_tol",
              "record_every", "seed"}
_CURVE_KEYS = {"builder", "rho", "center", "plane", "n", "N", "a", "b", "modes", "amplitude",
               "decay", "seed", "radius", "path"}
KNOWN_KEYS = ({"lambda", "ambient.L", "ambient.M", "ambient.f.kind", "ambient.f.c0",
               "output.dir", "output.plot"}
              | {f"flow.{k}" for k in _FLOW_KEYS} | {f"curve.{k}" for k in _CURVE_KEYS})


def flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


@dataclass(frozen=True, eq=False)
class RunConfig:
    spec: AmbientSpec
    flow: FlowConfig
    curve0: DiscreteCurve
    output_dir: Path
    plot: bool = False


def _num(flat: dict, key: str, default=None, positive: bool = False, integer: bool = False):
    if key not in flat:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    v = flat[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if integer and not float(v).is_integer():
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if positive and v <= 0:
        raise ConfigError(key, f"must be positive, got {v}")
    return int(v) if integer else float(v)


def _array(flat: dict, key: str, shape_ndim: int):
    try:
        arr = np.array(flat[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"not a numeric array: {exc}") from exc
    if arr.ndim != shape_ndim or not np.all(np.isfinite(arr)):
        raise ConfigError(key, f"expected a finite {shape_ndim}-d array")
    return arr


def _dimension(flat: dict) -> int:
    if "ambient.L" in flat:
        return len(flat["ambient.L"])
    if "ambient.M" in flat:
        return len(flat["ambient.M"])
    return _num(flat, "curve.n", 2, positive=True, integer=True)


def _spec(flat: dict, n: int) -> AmbientSpec:
    lam = _num(flat, "lambda", positive=True)
    L = _array(flat, "ambient.L", 2) if "ambient.L" in flat else np.zeros((n, n))
    if L.shape != (n, n):
        raise ConfigError("ambient.L", f"expected shape ({n}, {n}), got {L.shape}")
    M = _array(flat, "ambient.M", 1) if "ambient.M" in flat else np.zeros(n)
    if M.shape != (n,):
        raise ConfigError("ambient.M", f"expected length {n}, got {M.shape[0]}")
    kind = flat.get("ambient.f.kind", "constant")
    if kind not in SCALAR_FIELDS:
        raise ConfigError("ambient.f.kind", f"expected one of {sorted(SCALAR_FIELDS)}, got {kind!r}")
    if kind == "constant":
        scalar = Constant(_num(flat, "ambient.f.c0", 0.0))
    else:
        if "ambient.f.c0" in flat:
            raise ConfigError("ambient.f.c0", "only valid with ambient.f.kind = 'constant'")
        scalar = InverseQuadratic()
    return AmbientSpec(AffineMap(L, M), scalar, lam)


def _curve(flat: dict, n: int, base: Path) -> DiscreteCurve:
    builder = flat.get("curve.builder", "circle")
    if "curve.n" in flat and _num(flat, "curve.n", integer=True) != n:
        raise ConfigError("curve.n", f"does not match ambient dimension {n}")
    N = _num(flat, "curve.N", 512, positive=True, integer=True)
    if builder == "circle":
        center = _array(flat, "curve.center", 1) if "curve.center" in flat else None
        if center is not None and center.shape != (n,):
            raise ConfigError("curve.center", f"expected length {n}")
        plane = tuple(flat.get("curve.plane", (0, 1)))
        if len(plane) != 2 or not all(isinstance(p, int) and 0 <= p < n for p in plane) \
                or plane[0] == plane[1]:
            raise ConfigError("curve.plane", f"expected two distinct axes below {n}, got {plane}")
        return circle(_num(flat, "curve.rho", 1.0, positive=True), center, plane, n, N)
    if builder == "ellipse":
        return ellipse(_num(flat, "curve.a", positive=True), _num(flat, "curve.b", positive=True),
                       n, N)
    if builder == "fourier":
        return fourier_curve(_num(flat, "curve.modes", 5, positive=True, integer=True),
                             _num(flat, "curve.amplitude", 0.1),
                             _num(flat, "curve.seed", 0, integer=True), n, N,
                             _num(flat, "curve.radius", 1.0, positive=True),
                             _num(flat, "curve.decay", 3.0))
    if builder == "file":
        if "curve.path" not in flat:
            raise ConfigError("curve.path", "missing required key for builder 'file'")
        curve = read_curve_csv(base / flat["curve.path"])
        if curve.n != n:
            raise ConfigError("curve.path", f"curve lives in R^{curve.n}, expected R^{n}")
        return curve
    raise ConfigError("curve.builder", f"expected circle, ellipse, fourier or file, got {builder!r}")


def _flow(flat: dict) -> FlowConfig:
    integ = flat.get("flow.integrator", "imex_euler")
    if integ not in INTEGRATORS:
        raise ConfigError("flow.integrator", f"expected one of {INTEGRATORS}, got {integ!r}")
    return FlowConfig(
        integrator=integ,
        dt=_num(flat, "flow.dt", 1e-3, positive=True),
        C_stab=_num(flat, "flow.C_stab", 0.1, positive=True),
        t_max=_num(flat, "flow.t_max", positive=True),
        resample_every=_num(flat, "flow.resample_every", 10, positive=True, integer=True),
        residual_tol=_num(flat, "flow.residual_tol", 1e-6, positive=True),
        record_every=_num(flat, "flow.record_every", 1, positive=True, integer=True),
        seed=_num(flat, "flow.seed", 0, integer=True),
    )


def parse_config(flat: dict, base: Path = Path(".")) -> RunConfig:
    for key in sorted(flat):
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
    n = _dimension(flat)
    if n < 2:
        raise ConfigError("ambient.L", "dimension must be at least 2")
    spec = _spec(flat, n)
    flow = _flow(flat)
    try:
        curve0 = _curve(flat, n, base)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("curve", str(exc)) from exc
    out = Path(flat.get("output.dir", "out"))
    plot = flat.get("output.plot", False)
    if not isinstance(plot, bool):
        raise ConfigError("output.plot", f"expected true or false, got {plot!r}")
    return RunConfig(spec, flow, curve0, out if out.is_absolute() else base / out, plot)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"not valid TOML: {exc}") from exc
    return parse_config(flatten(tree), path.parent)

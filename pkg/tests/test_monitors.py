import math

import numpy as np
import pytest

from helfrich_flow.ambient import AmbientSpec
from helfrich_flow.curve import circle
from helfrich_flow.energy import energy
from helfrich_flow.monitors import (
    MonitorContext,
    c_bound_rhs,
    inapplicable,
    inverse_norm,
    monitor_c_bounds,
    monitor_curvature_derivatives,
    monitor_energy_split,
    monitor_length,
    monitor_position_invertible,
    monitor_position_proper,
    series_bounded,
    verdict,
)
from helfrich_flow.verify import proper_spec


@pytest.fixture
def plain():
    return AmbientSpec.simple(2, 1.0)


def test_verdict_margin():
    v = verdict("x", 1.0, 3.0)
    assert v.holds and v.margin == 2.0 and v.applicable
    assert not verdict("x", 3.0, 1.0).holds


def test_inapplicable():
    v = inapplicable("x", 2.0)
    assert v.holds is None and not v.applicable and v.lhs == 2.0


class TestBounds:
    def test_energy_split_on_circle(self, unit_circle, plain):
        v = monitor_energy_split(unit_circle, plain, 3.0 * math.pi)
        assert v.holds
        assert v.lhs == pytest.approx(math.pi, rel=1e-4)

    def test_length_on_circle(self, unit_circle, plain):
        lo, hi = monitor_length(unit_circle, plain, 3.0 * math.pi)
        assert lo.holds and hi.holds
        assert lo.lhs == pytest.approx(2.0 * math.pi / 3.0)
        assert hi.rhs == pytest.approx(3.0 * math.pi)

    def test_length_upper_can_fail(self, unit_circle, plain):
        _, hi = monitor_length(unit_circle, plain, 1.0)
        assert hi.holds is False

    def test_assumption_failure_makes_monitors_inapplicable(self, unit_circle):
        spec = AmbientSpec.simple(2, 0.5, L=-np.eye(2))
        H0 = energy(unit_circle, spec).total
        assert monitor_energy_split(unit_circle, spec, H0).holds is None
        assert all(v.holds is None for v in monitor_length(unit_circle, spec, H0))
        assert all(v.holds is None for v in monitor_c_bounds(unit_circle, spec, H0))

    def test_c_bounds_hold_at_start(self, unit_circle):
        spec = AmbientSpec.simple(2, 1.0, c0=0.5, L=np.eye(2), M=np.array([0.2, 0.0]))
        H0 = energy(unit_circle, spec).total
        c, cv = monitor_c_bounds(unit_circle, spec, H0)
        assert c.holds and cv.holds

    def test_c_bound_rhs_scales_with_H0(self, plain):
        a = c_bound_rhs(plain, 1.0)
        b = c_bound_rhs(plain, 2.0)
        assert b[0] == pytest.approx(2.0 * a[0])


class TestPosition:
    def test_inverse_norm(self):
        assert inverse_norm(2.0 * np.eye(3)) == pytest.approx(0.5)
        assert inverse_norm(np.zeros((2, 2))) is None
        assert inverse_norm(np.diag([1.0, 0.0])) is None

    def test_invertible(self, unit_circle):
        spec = AmbientSpec.simple(2, 1.0, L=np.eye(2))
        H0 = energy(unit_circle, spec).total
        assert monitor_position_invertible(unit_circle, spec, H0).holds

    def test_singular_is_inapplicable(self, unit_circle, plain):
        assert monitor_position_invertible(unit_circle, plain, 3 * math.pi).holds is None

    def test_proper(self, unit_circle):
        spec = proper_spec()
        ctx = MonitorContext.build(spec, unit_circle)
        assert ctx.R is not None
        assert monitor_position_proper(unit_circle, spec, ctx.H0, ctx.R).holds
        assert monitor_position_proper(unit_circle, spec, ctx.H0, None).holds is None


class TestCurvatureDerivatives:
    def test_vanish_on_circle(self, unit_circle):
        assert max(monitor_curvature_derivatives(unit_circle)) <= 1e-10

    def test_positive_on_wobbly(self, wobbly):
        vals = monitor_curvature_derivatives(wobbly, 2)
        assert len(vals) == 2 and min(vals) > 0

    def test_order_range(self, wobbly):
        with pytest.raises(ValueError):
            monitor_curvature_derivatives(wobbly, 4)


@pytest.mark.parametrize("series, expected", [
    ([], True),
    ([1.0, 2.0, 3.0], True),
    ([1.0, 50.0], False),
    ([1.0, math.nan], False),
])
def test_series_bounded(series, expected):
    assert series_bounded(series) is expected


def test_context_evaluates_all(unit_circle, plain):
    ctx = MonitorContext.build(plain, unit_circle)
    out = ctx.evaluate(unit_circle)
    assert set(out) == {"energy_split", "length_lower", "length_upper", "position_invertible",
                        "position_proper", "c_sup", "cvec_sup"}
    assert ctx.H0 == pytest.approx(3.0 * math.pi, rel=1e-4)

import math

import numpy as np
import pytest

from helfrich_flow.ambient import AffineMap, AmbientSpec, Constant, InverseQuadratic, rotation_map
from helfrich_flow.curve import CurveError, DiscreteCurve, circle, ellipse, inner, tangent
from helfrich_flow.energy import (
    energy,
    euler_lagrange,
    euler_lagrange_with_transport,
    first_variation_fd,
    residual_norms,
    second_normal_derivative_affine,
    second_normal_derivative_curvature,
)
from helfrich_flow.stationary import (
    inverse_quadratic_spec,
    radius_case_i,
    radius_case_ii,
    radius_case_iii,
    rotation_spec,
)
from helfrich_flow.verify import gradient_case, smooth_normal_field, translating_curve


class TestEnergy:
    @pytest.mark.parametrize("lam, c0", [(1.0, 0.0), (0.5, 2.0), (0.1, -1.0)])
    def test_unit_circle(self, lam, c0):
        # |k - c0 tau|^2 = 1 + c0^2 on the unit circle
        rep = energy(circle(1.0, N=512), AmbientSpec.simple(2, lam, c0=c0))
        expected = math.pi * (1.0 + c0**2) + 2.0 * math.pi * lam
        assert rep.total == pytest.approx(expected, rel=1e-4)
        assert rep.length_term == pytest.approx(2.0 * math.pi * lam, rel=1e-9)

    def test_second_order_in_N(self):
        spec = AmbientSpec.simple(2, 1.0)
        errs = [abs(energy(circle(1.0, N=N), spec).total - 3.0 * math.pi) for N in (64, 128, 256)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)

    def test_translation_invariant_without_affine(self, wobbly):
        spec = AmbientSpec.simple(3, 0.7, c0=0.8)
        moved = DiscreteCurve(wobbly.points + [1.0, -2.0, 0.5])
        assert energy(moved, spec).total == pytest.approx(energy(wobbly, spec).total, rel=1e-12)

    def test_parts(self, wobbly):
        rep = energy(wobbly, AmbientSpec.simple(3, 0.7, c0=0.8))
        assert rep.total == pytest.approx(rep.bending + rep.length_term)
        assert rep.elastic_only > 0 and rep.spontaneous_only > 0


class TestEulerLagrange:
    def test_normal(self, wobbly):
        spec = AmbientSpec.simple(3, 0.7, L=np.eye(3))
        H = euler_lagrange(wobbly, spec).total
        assert np.abs(np.einsum("ij,ij->i", H, tangent(wobbly))).max() <= 1e-12

    def test_split(self, wobbly):
        g = euler_lagrange(wobbly, AmbientSpec.simple(3, 0.7, c0=0.8))
        np.testing.assert_allclose(g.total, -(g.vk + g.vc), atol=1e-12)
        np.testing.assert_array_equal(g.velocity, -g.total)

    def test_elastic_part_on_circle(self):
        # H = (lambda / rho - 1 / (2 rho^3)) times the outward unit normal
        rho, lam = 0.8, 0.3
        c = circle(rho, N=512)
        H = euler_lagrange(c, AmbientSpec.simple(2, lam)).total
        coef = lam / rho - 0.5 / rho**3
        np.testing.assert_allclose(H, coef * c.points / rho, atol=1e-3)

    @pytest.mark.parametrize("i", range(3))
    def test_matches_fd(self, i):
        curve, spec, phi = gradient_case(i)
        fd = first_variation_fd(curve, spec, phi)
        pair = inner(euler_lagrange(curve, spec).total, phi, curve)
        assert abs(pair - fd) <= 1e-4 * (1.0 + abs(fd))

    def test_fd_zero_direction(self, wobbly):
        spec = AmbientSpec.simple(3, 0.7)
        assert first_variation_fd(wobbly, spec, np.zeros_like(wobbly.points)) == 0.0

    def test_fd_tangential_direction_is_small(self):
        curve, spec, _ = gradient_case(0)
        fd = first_variation_fd(curve, spec, tangent(curve))
        assert abs(fd) <= 1e-3

    def test_fd_eps_range(self, wobbly):
        with pytest.raises(ValueError):
            first_variation_fd(wobbly, AmbientSpec.simple(3, 1.0), wobbly.points, eps=1e-2)

    def test_rejects_nonuniform_mesh(self):
        th = np.linspace(0, 2 * np.pi, 64, endpoint=False) ** 1.5 / (2 * np.pi) ** 0.5
        c = DiscreteCurve(np.column_stack([np.cos(th), np.sin(th)]))
        with pytest.raises(CurveError, match="resample"):
            euler_lagrange(c, AmbientSpec.simple(2, 1.0))

    def test_rejects_too_few_nodes(self):
        with pytest.raises(CurveError):
            euler_lagrange(circle(1.0, N=8), AmbientSpec.simple(2, 1.0))

    def test_nested_and_compact_agree(self, wobbly):
        a = second_normal_derivative_curvature(wobbly)
        b = second_normal_derivative_curvature(wobbly, nested=True)
        assert np.abs(a - b).max() <= 0.05 * np.abs(a).max()

    def test_affine_closed_form_agrees(self, wobbly, rng):
        spec = AmbientSpec.simple(3, 1.0, L=rng.standard_normal((3, 3)), M=rng.standard_normal(3))
        g = second_normal_derivative_affine(wobbly, spec)
        f = second_normal_derivative_affine(wobbly, spec, closed_form=True)
        assert np.abs(g - f).max() <= 0.02 * np.abs(f).max()


class TestCriticalCircles:
    @pytest.mark.parametrize("lam, c0", [(0.5, 0.0), (1.0, 1.0), (0.2, -2.0)])
    def test_case_i(self, lam, c0):
        spec = AmbientSpec.simple(2, lam, c0=c0)
        assert residual_norms(circle(radius_case_i(lam, c0), N=512), spec).sup <= 1e-3

    def test_case_i_off_radius_is_not_critical(self):
        spec = AmbientSpec.simple(2, 0.5)
        assert residual_norms(circle(1.2, N=512), spec).sup >= 0.1

    def test_case_ii(self):
        M = np.array([1.0, 0.0])
        rho = radius_case_ii(M, 1.0, 0.0)
        assert rho == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-15)
        spec = AmbientSpec.simple(2, 1.0, M=M)
        assert residual_norms(circle(rho, N=512), spec).sup <= 1e-3

    def test_case_iii(self):
        rho = radius_case_iii(1.0, 1.0)
        assert residual_norms(circle(rho, N=512), rotation_spec(0.0, 1.0, 1.0)).sup <= 1e-3

    def test_translated_circle_not_critical_for_rotation(self):
        rho = radius_case_iii(1.0, 1.0)
        c = circle(rho, center=[0.3, 0.0], N=512)
        assert residual_norms(c, rotation_spec(0.0, 1.0, 1.0)).sup >= 0.1

    def test_transport_operator_agrees_on_circles(self):
        c = circle(0.7, N=256)
        spec = rotation_spec(0.4, 1.0, 1.0)
        d = euler_lagrange_with_transport(c, spec) - euler_lagrange(c, spec).total
        assert np.abs(d).max() <= 1e-3

    def test_transport_operator_differs_elsewhere(self):
        c = ellipse(1.5, 1.0, N=256)
        spec = AmbientSpec.simple(2, 1.0, c0=1.0)
        d = euler_lagrange_with_transport(c, spec) - euler_lagrange(c, spec).total
        assert np.abs(d).max() >= 0.1


class TestInverseQuadraticField:
    def test_pure_translation_at_unit_lambda(self):
        V = euler_lagrange(translating_curve(512), inverse_quadratic_spec(1.0)).velocity
        np.testing.assert_allclose(V, np.tile([0.0, 0.0, math.sqrt(2.0) / 8.0], (512, 1)),
                                   atol=2e-4)

    def test_default_lambda_adds_shrinking(self):
        c = translating_curve(512)
        V = euler_lagrange(c, inverse_quadratic_spec()).velocity
        # -H = (lambda - 1) k + (sqrt 2 / 8) e3 with k = -(gamma - centre) / rho^2
        rho = 1.0 / math.sqrt(2.0)
        k = -(c.points - [0.0, 0.0, rho]) / rho**2
        expected = (15 / 16 - 1.0) * k + [0.0, 0.0, math.sqrt(2.0) / 8.0]
        np.testing.assert_allclose(V, expected, atol=2e-4)

    def test_origin_circle_is_radial(self):
        c = circle(1.0, n=3, N=256)
        V = euler_lagrange(c, inverse_quadratic_spec()).velocity
        cross = np.cross(V, c.points)
        assert np.abs(cross).max() <= 1e-9


def test_residual_symmetric_under_reflection():
    spec = AmbientSpec(AffineMap.zero(2), InverseQuadratic(), 1.0)
    c = circle(0.9, center=[0.4, 0.0], N=256)
    mirrored = DiscreteCurve(c.points[::-1] * [1.0, -1.0])
    assert residual_norms(c, spec).sup == pytest.approx(residual_norms(mirrored, spec).sup,
                                                        rel=1e-10)


def test_smooth_normal_field_is_normal(wobbly):
    phi = smooth_normal_field(wobbly, 3)
    assert np.abs(np.einsum("ij,ij->i", phi, tangent(wobbly))).max() <= 1e-12


def test_rotation_spec_dimension():
    spec = AmbientSpec(rotation_map(0.5, (0, 1), 3), Constant(1.0), 1.0)
    H = euler_lagrange(circle(0.6, n=3, N=128), spec).total
    assert H.shape == (128, 3)

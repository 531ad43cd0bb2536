import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helfrich_flow.curve import (
    CurveError,
    DiscreteCurve,
    arclength,
    circle,
    curvature,
    ellipse,
    fourier_curve,
    inner,
    l2_norm,
    length,
    mesh_ratio,
    normal_derivative,
    normal_projection,
    read_curve_csv,
    resample_uniform,
    tangent,
    write_curve_csv,
)
from helfrich_flow.verify import ellipse_curvature, observed_order


class TestConstruction:
    def test_rejects_few_nodes(self):
        with pytest.raises(CurveError, match="at least 8"):
            DiscreteCurve(np.random.default_rng(0).standard_normal((7, 2)))

    def test_rejects_one_dimension(self):
        with pytest.raises(CurveError, match="dimension"):
            DiscreteCurve(np.arange(10.0).reshape(10, 1))

    def test_rejects_coincident_nodes(self):
        pts = circle(1.0, N=16).points.copy()
        pts[5] = pts[4]
        with pytest.raises(CurveError, match="chord 4->5"):
            DiscreteCurve(pts)

    def test_rejects_nan(self):
        pts = circle(1.0, N=16).points.copy()
        pts[3, 0] = np.nan
        with pytest.raises(CurveError, match="non-finite"):
            DiscreteCurve(pts)

    def test_points_are_read_only(self):
        c = circle(1.0, N=16)
        with pytest.raises(ValueError):
            c.points[0, 0] = 3.0


class TestLength:
    def test_unit_circle(self, unit_circle):
        assert length(unit_circle) == pytest.approx(2 * math.pi, abs=1e-4)

    def test_half_circle(self):
        assert length(circle(0.5, N=512)) == pytest.approx(math.pi, abs=1e-4)

    def test_fourier_curve_matches_refined_quadrature(self):
        # oracle: chord sum of the same analytic curve sampled ever more finely
        rng = np.random.default_rng(3)
        coef = rng.standard_normal((4, 2, 2)) * 0.1

        def sample(M):
            t = 2 * np.pi * np.arange(M) / M
            p = np.column_stack([np.cos(t), np.sin(t)])
            for m in range(2, 6):
                p = p + np.outer(np.cos(m * t), coef[m - 2, 0]) + np.outer(np.sin(m * t), coef[m - 2, 1])
            return DiscreteCurve(p)

        ref = length(sample(2**20))
        assert arclength(sample(512)) == pytest.approx(ref, rel=1e-6)
        assert length(sample(2**14)) == pytest.approx(ref, rel=1e-6)


class TestResample:
    def test_nonuniform_circle_becomes_uniform(self):
        t = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        t = t + 0.2 * np.sin(t)
        c = DiscreteCurve(np.column_stack([np.cos(t), np.sin(t)]))
        r = resample_uniform(c, 256)
        assert np.abs(np.linalg.norm(r.points, axis=1) - 1).max() <= 1e-6
        assert mesh_ratio(r) <= 1 + 1e-6

    def test_uniform_circle_is_fixed_point(self):
        c = circle(1.3, N=128)
        assert np.abs(resample_uniform(c).points - c.points).max() <= 1e-10

    def test_ellipse_chord_ratio(self):
        assert mesh_ratio(ellipse(2.0, 1.0, N=512)) <= 1 + 1e-6

    def test_changes_node_count(self):
        r = resample_uniform(ellipse(2.0, 1.0, N=128), 300)
        assert r.N == 300
        assert mesh_ratio(r) <= 1 + 1e-6

    @pytest.mark.parametrize("N", [64, 128, 256])
    def test_length_preserved(self, N):
        c = fourier_curve(5, 0.2, 1, 2, N)
        r = resample_uniform(DiscreteCurve(c.points[::-1] * [1.0, 1.2]))
        assert arclength(r) == pytest.approx(arclength(DiscreteCurve(c.points[::-1] * [1.0, 1.2])),
                                             rel=10.0 / N**2)

    def test_rejects_tiny_output(self):
        with pytest.raises(CurveError):
            resample_uniform(circle(1.0, N=16), 4)


class TestTangent:
    def test_circle_tangent(self):
        c = circle(0.7, N=256, n=3)
        th = 2 * np.pi * np.arange(256) / 256
        exact = np.column_stack([-np.sin(th), np.cos(th), np.zeros(256)])
        assert np.abs(tangent(c) - exact).max() <= 1e-10

    def test_unit_length(self, wobbly):
        assert np.abs(np.linalg.norm(tangent(wobbly), axis=1) - 1).max() <= 1e-14

    def test_reflection_symmetry(self):
        # node 0 on the y axis: x -> -x maps node i to node N - i, so tau_{N-i} = -R tau_i
        e = DiscreteCurve(ellipse(2.0, 1.0, N=128).points[:, ::-1])
        R = np.diag([-1.0, 1.0])
        assert np.abs(np.roll(e.points[::-1], 1, axis=0) - e.points @ R).max() <= 1e-12
        T = tangent(e)
        mirror = np.roll(T[::-1], 1, axis=0)
        assert np.abs(mirror + T @ R).max() <= 1e-12


class TestCurvature:
    @pytest.mark.parametrize("rho", [0.3, 1.0, 4.0])
    def test_circle(self, rho):
        c = circle(rho, N=512)
        k = curvature(c)
        h = 2 * math.pi * rho / 512
        assert np.abs(k + c.points / rho**2).max() <= h**2 / rho**3
        assert np.abs(np.linalg.norm(k, axis=1) - 1 / rho).max() <= h**2 / rho**3

    def test_second_order_convergence(self):
        Ns = [64, 128, 256, 512, 1024]
        errs = []
        for N in Ns:
            c = circle(1.0, N=N)
            errs.append(np.abs(curvature(c) + c.points).max())
        assert observed_order(Ns, errs) == pytest.approx(2.0, abs=0.1)

    def test_ellipse_against_analytic(self):
        e = ellipse(2.0, 1.0, N=1024)
        assert np.abs(curvature(e) - ellipse_curvature(e.points, 2.0, 1.0)).max() <= 1e-3


class TestNormalOperators:
    def test_projection_kills_tangent(self, wobbly):
        assert np.abs(normal_projection(tangent(wobbly), wobbly)).max() <= 1e-14

    def test_projection_idempotent(self, wobbly, rng):
        P = normal_projection(rng.standard_normal((wobbly.N, 3)), wobbly)
        assert np.abs(normal_projection(P, wobbly) - P).max() <= 1e-12
        assert np.abs(np.einsum("ij,ij->i", P, tangent(wobbly))).max() <= 1e-12

    def test_field_shape_checked(self, wobbly):
        with pytest.raises(CurveError):
            normal_projection(np.zeros((wobbly.N + 1, 3)), wobbly)

    def test_nabla_k_vanishes_on_circle(self):
        c = circle(0.8, N=256)
        assert np.abs(normal_derivative(curvature(c), c)).max() <= 1e-9

    def test_tangential_part_of_dk_is_removed(self):
        # d_s k = nabla_s k - |k|^2 tau and nabla_s k = 0 on a circle
        from helfrich_flow.curve import d_ds

        c = circle(0.8, N=512)
        k = curvature(c)
        dk = d_ds(k, c)
        k2 = np.einsum("ij,ij->i", k, k)
        assert np.abs(dk + k2[:, None] * tangent(c)).max() <= 1e-3
        assert np.abs(normal_derivative(k, c)).max() <= 1e-8

    @pytest.mark.parametrize("n,rho", [(2, 1.0), (3, 0.37)])
    def test_summation_by_parts_uniform(self, n, rho, rng):
        c = circle(rho, n=n, N=256)
        X = normal_projection(rng.standard_normal((256, n)), c)
        Y = normal_projection(rng.standard_normal((256, n)), c)
        s = inner(normal_derivative(X, c), Y, c) + inner(X, normal_derivative(Y, c), c)
        assert abs(s) <= 1e-8 * l2_norm(X, c) * l2_norm(Y, c)

    def test_summation_by_parts_smooth_fields_on_wobbly_mesh(self):
        c = fourier_curve(5, 0.3, 3, 3, 512)
        t = 2 * np.pi * np.arange(512) / 512
        rng = np.random.default_rng(0)
        X = normal_projection(sum(np.outer(np.cos(m * t), rng.standard_normal(3)) for m in range(4)), c)
        Y = normal_projection(sum(np.outer(np.sin(m * t), rng.standard_normal(3)) for m in range(4)), c)
        s = inner(normal_derivative(X, c), Y, c) + inner(X, normal_derivative(Y, c), c)
        assert abs(s) <= 1e-7 * l2_norm(X, c) * l2_norm(Y, c)


class TestFileFormat:
    def test_roundtrip(self, tmp_path, wobbly):
        p = tmp_path / "c.csv"
        write_curve_csv(wobbly, p)
        assert p.read_text().splitlines()[0] == "# n=3 N=256"
        back = read_curve_csv(p)
        assert np.array_equal(back.points, wobbly.points)

    def test_header_mismatch(self, tmp_path):
        p = tmp_path / "c.csv"
        write_curve_csv(circle(1.0, N=16), p)
        p.write_text(p.read_text().replace("N=16", "N=17"))
        with pytest.raises(CurveError, match="header says"):
            read_curve_csv(p)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("1,2\n")
        with pytest.raises(CurveError, match="header"):
            read_curve_csv(p)


@settings(max_examples=25, deadline=None)
@given(rho=st.floats(0.05, 20.0), phase=st.floats(0, 2 * math.pi),
       shift=st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_circle_invariants(rho, phase, shift):
    c = circle(rho, center=shift, n=3, N=64, phase=phase)
    T = tangent(c)
    assert np.abs(np.linalg.norm(T, axis=1) - 1).max() <= 1e-13
    k = curvature(c)
    assert np.abs(np.einsum("ij,ij->i", k, T)).max() <= 1e-9 / rho
    assert length(c) == pytest.approx(2 * rho * 64 * math.sin(math.pi / 64), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 4))
def test_projection_properties(seed, n):
    c = fourier_curve(4, 0.2, seed, n, 64)
    X = np.random.default_rng(seed).standard_normal((64, n))
    P = normal_projection(X, c)
    assert np.abs(normal_projection(P, c) - P).max() <= 1e-12
    assert np.abs(np.einsum("ij,ij->i", P, tangent(c))).max() <= 1e-12

import numpy as np
import pytest

from corrkit.surface import SurfaceError, SurfaceModel, cylinder_patch, flat_plane


def test_flat_plane_evaluate_is_affine():
    surf = flat_plane(width=2.0, height=1.0)
    p00 = surf.evaluate(0.0, 0.0)
    p10 = surf.evaluate(1.0, 0.0)
    p01 = surf.evaluate(0.0, 1.0)
    mid = surf.evaluate(0.5, 0.5)
    assert np.allclose(mid, (p00 + (p10 - p00) * 0.5 + (p01 - p00) * 0.5), atol=1e-12)


def test_flat_plane_frame_orthonormal_and_constant():
    surf = flat_plane()
    for u, v in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.7)]:
        normal, axis_u, axis_v = surf.frame(u, v)
        for vec in (normal, axis_u, axis_v):
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-12
        assert abs(normal @ axis_u) < 1e-12
        assert abs(normal @ axis_v) < 1e-12
        assert abs(axis_u @ axis_v) < 1e-12
        assert np.allclose(np.cross(axis_u, axis_v), normal, atol=1e-12)


def test_partials_match_finite_differences():
    surf = cylinder_patch()
    eps = 1e-6
    for u, v in [(0.3, 0.4), (0.5, 0.5), (0.72, 0.61)]:
        du, dv = surf.partials(u, v)
        fd_u = (surf.evaluate(u + eps, v) - surf.evaluate(u - eps, v)) / (2 * eps)
        fd_v = (surf.evaluate(u, v + eps) - surf.evaluate(u, v - eps)) / (2 * eps)
        assert np.allclose(du, fd_u, atol=1e-6)
        assert np.allclose(dv, fd_v, atol=1e-6)


def test_cylinder_points_lie_on_cylinder():
    radius = 0.3
    surf = cylinder_patch(radius=radius)
    axis_pts = [surf.evaluate(u, v) for u in (0.2, 0.5, 0.8) for v in (0.2, 0.8)]
    # all points equidistant from the cylinder axis
    dists = []
    for p in axis_pts:
        dists.append(np.hypot(p[0], p[2] - surf.evaluate(0.5, 0.5)[2] + radius))
    assert np.std(dists) < 1e-6


def test_project_inverts_evaluate():
    surf = cylinder_patch()
    rng = np.random.default_rng(4)
    for _ in range(25):
        u, v = rng.uniform(0.05, 0.95, 2)
        p = surf.evaluate(u, v)
        u2, v2 = surf.project(p, seed=(0.5, 0.5))
        assert abs(u - u2) < 1e-7
        assert abs(v - v2) < 1e-7


def test_project_off_surface_point():
    surf = flat_plane()
    p = surf.evaluate(0.3, 0.7) + 0.05 * surf.frame(0.3, 0.7)[0]
    u, v = surf.project(p, seed=(0.5, 0.5))
    assert abs(u - 0.3) < 1e-9
    assert abs(v - 0.7) < 1e-9


def test_domain_checked():
    surf = flat_plane()
    with pytest.raises(SurfaceError):
        surf.evaluate(-0.1, 0.5)
    with pytest.raises(SurfaceError):
        surf.evaluate(0.5, 1.2)


def test_dict_round_trip_bit_exact():
    surf = cylinder_patch()
    d = surf.to_dict()
    surf2 = SurfaceModel.from_dict(d)
    assert np.array_equal(surf.control_points, surf2.control_points)
    for uv in [(0.25, 0.5), (0.7, 0.3)]:
        assert np.array_equal(surf.evaluate(*uv), surf2.evaluate(*uv))

import numpy as np
import pytest

from transmask import (
    CameraIntrinsics,
    DepthMap,
    DimensionError,
    NormalMap,
    backproject,
    new_raster,
    normal_cosine_map,
    normals_from_depth,
)


def plane_depth(k, h, w, a, b, c):
    """Depth of the plane Z = a X + b Y + c seen through the pinhole ``k``."""
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    return c / (1.0 - a * (u - k.cx) / k.fx - b * (v - k.cy) / k.fy)


def sphere_depth(k, h, w, center, radius):
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    d = np.stack(((u - k.cx) / k.fx, (v - k.cy) / k.fy, np.ones_like(u)), -1)
    c = np.asarray(center, float)
    dc = d @ c
    dd = np.sum(d * d, -1)
    disc = dc**2 - dd * (c @ c - radius**2)
    t = np.where(disc > 0, (dc - np.sqrt(np.maximum(disc, 0))) / dd, 0.0)
    normals = (t[..., None] * d - c) / radius
    return t, normals


def test_backproject_principal_point():
    depth = np.zeros((48, 64))
    depth[23, 31] = 1.0
    k = CameraIntrinsics(100.0, 100.0, 31.0, 23.0)
    pts, valid = backproject(DepthMap(depth), k)
    assert np.allclose(pts[23, 31], (0.0, 0.0, 1.0))
    assert valid[23, 31] and not valid[0, 0]
    assert np.all(pts[0, 0] == 0)


def test_backproject_unit_tangent():
    k = CameraIntrinsics(10.0, 10.0, 2.0, 3.0)
    depth = np.zeros((6, 14))
    depth[3, 12] = 2.0  # u = cx + fx
    pts, _ = backproject(DepthMap(depth), k)
    assert np.allclose(pts[3, 12], (2.0, 0.0, 2.0))


def test_fronto_parallel_plane_faces_camera(intrinsics):
    n = normals_from_depth(new_raster(64, 48, 1.5), intrinsics)
    interior = n.valid[1:-1, 1:-1]
    assert interior.all()
    assert not n.valid[0].any() and not n.valid[:, -1].any()
    assert np.array_equal(n.data[1:-1, 1:-1], np.broadcast_to([0.0, 0.0, -1.0], (46, 62, 3)))


@pytest.mark.parametrize("a,b", [(0.3, 0.0), (-0.5, 0.2), (0.1, -0.7)])
def test_slanted_plane_matches_analytic_normal(intrinsics, a, b):
    z = plane_depth(intrinsics, 48, 64, a, b, 1.2)
    n = normals_from_depth(DepthMap(z), intrinsics)
    expected = np.array([a, b, -1.0]) / np.sqrt(1 + a * a + b * b)
    assert n.valid[1:-1, 1:-1].all()
    assert np.abs(n.data[n.valid] - expected).max() < 1e-3


def test_hole_invalidates_neighbours(intrinsics):
    z = np.full((10, 10), 1.0)
    z[5, 5] = 0.0
    n = normals_from_depth(DepthMap(z), intrinsics)
    for y, x in [(5, 5), (4, 5), (6, 5), (5, 4), (5, 6)]:
        assert not n.valid[y, x]
    assert n.valid[4, 4]


def test_valid_normals_are_unit_and_face_camera(rng, intrinsics):
    z = 1.0 + 0.05 * rng.random((48, 64))
    z[rng.random(z.shape) < 0.05] = 0
    n = normals_from_depth(DepthMap(z), intrinsics)
    norms = np.linalg.norm(n.data[n.valid], axis=-1)
    assert np.all(np.abs(norms - 1) < 1e-6)
    assert np.all(n.data[n.valid][:, 2] <= 0)


def test_refinement_reduces_angular_error():
    errors = []
    for scale in (1, 2):
        h, w = 40 * scale, 40 * scale
        k = CameraIntrinsics(60.0 * scale, 60.0 * scale, (w - 1) / 2, (h - 1) / 2)
        z, truth = sphere_depth(k, h, w, (0.0, 0.0, 3.0), 1.0)
        n = normals_from_depth(DepthMap(z), k)
        sel = n.valid & (truth[..., 2] < -0.6)
        cos = np.clip(np.sum(n.data[sel] * truth[sel], -1), -1, 1)
        errors.append(np.degrees(np.arccos(cos)).max())
    assert errors[1] < errors[0]


def test_cosine_map_cases():
    valid = np.ones((2, 2), bool)
    a = NormalMap(np.broadcast_to([0.0, 0.0, -1.0], (2, 2, 3)), valid)
    b = NormalMap(np.broadcast_to([-1.0, 0.0, 0.0], (2, 2, 3)), valid)
    cos, ok = normal_cosine_map(a, a)
    assert ok.all() and np.all(cos == 1.0)
    cos, _ = normal_cosine_map(a, b)
    assert np.all(cos == 0.0)
    partial = valid.copy()
    partial[0, 1] = False
    _, ok = normal_cosine_map(a, NormalMap(b.data, partial))
    assert not ok[0, 1] and ok.sum() == 3
    with pytest.raises(DimensionError):
        normal_cosine_map(a, NormalMap(np.zeros((3, 2, 3)), np.zeros((3, 2), bool)))

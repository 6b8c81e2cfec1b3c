import numpy as np
import pytest
from scipy import ndimage

from transmask import BinaryMask, DepthMap, complete_depth, evaluate, nearest_fill, new_raster


def square_hole(h, w, y, x, size):
    m = np.zeros((h, w), bool)
    m[y : y + size, x : x + size] = True
    return m


def test_constant_plane_filled_exactly():
    hole = square_hole(20, 20, 6, 6, 8)
    z = np.where(hole, 0.0, 2.0)
    res = complete_depth(DepthMap(z), BinaryMask(hole))
    assert res.converged
    assert np.all(res.depth.data == 2.0)


def test_empty_region_returns_input(rng):
    d = DepthMap(rng.uniform(0.5, 1.0, (6, 6)))
    res = complete_depth(d, new_raster(6, 6, 0))
    assert res.depth is d and res.iterations == 0


def test_linear_ramp_recovered():
    h, w = 40, 48
    v, u = np.mgrid[0:h, 0:w]
    ramp = 0.8 + 0.01 * u + 0.004 * v
    hole = square_hole(h, w, 12, 14, 16)
    res = complete_depth(DepthMap(np.where(hole, 0, ramp)), BinaryMask(hole))
    assert res.converged
    assert np.abs(res.depth.data - ramp)[hole].max() < 1e-3


def test_pixels_outside_region_unchanged(rng):
    z = rng.uniform(0.5, 1.5, (16, 16))
    z[rng.random(z.shape) < 0.1] = 0
    hole = square_hole(16, 16, 4, 4, 6)
    z[hole] = 0
    res = complete_depth(DepthMap(z), BinaryMask(hole))
    out = res.depth.data
    assert np.array_equal(out[~hole], DepthMap(z).data[~hole])
    assert np.all(out[hole] > 0)


def test_orphan_component_left_at_zero():
    z = np.zeros((10, 10))
    z[:, :3] = 1.0
    fill = np.zeros((10, 10), bool)
    fill[:, 1:3] = True  # touches known depth in column 0
    fill[4:6, 6:8] = True  # surrounded by unfillable zeros
    z[fill] = 0
    res = complete_depth(DepthMap(z), BinaryMask(fill))
    assert res.unfilled_components == [(2, 4)]
    assert np.all(res.depth.data[4:6, 6:8] == 0)
    assert np.all(res.depth.data[:, 1:3] == 1.0)


def test_rejects_region_over_valid_depth():
    with pytest.raises(ValueError):
        complete_depth(new_raster(4, 4, 1.0), new_raster(4, 4, 1))
    with pytest.raises(ValueError):
        complete_depth(new_raster(4, 4, 1.0), new_raster(4, 4, 0), iterations=0)


def test_idempotent_on_hole_free_input(rng):
    d = DepthMap(rng.uniform(0.5, 1.0, (8, 8)))
    assert complete_depth(d, new_raster(8, 8, 0)).depth.allclose(d, atol=0)


def piecewise_smooth(rng, h=32, w=32, hole_inside_block=False):
    """A tilted background with one tilted rectangular block and one hole."""
    v, u = np.mgrid[0:h, 0:w].astype(float)
    z = 1.0 + rng.uniform(-0.01, 0.01) * u + rng.uniform(-0.01, 0.01) * v
    y0, x0 = rng.integers(2, 12, size=2)
    block = np.zeros((h, w), bool)
    block[y0 : y0 + 14, x0 : x0 + 14] = True
    z = np.where(block, 0.7 + 0.005 * (u - x0) - 0.003 * (v - y0), z)
    size = int(rng.integers(5, 11))
    if hole_inside_block:
        hy, hx = np.array([y0, x0]) + rng.integers(1, 13 - size, size=2)
    else:
        hy, hx = rng.integers(1, 20, size=2)
    hole = square_hole(h, w, hy, hx, size)
    return z, hole


def check_maximum_principle(z, hole, out):
    labels, n = ndimage.label(hole)
    known = (z > 0) & ~hole
    for i in range(1, n + 1):
        comp = labels == i
        rim = ndimage.binary_dilation(comp) & known
        if not rim.any():
            continue
        lo, hi = z[rim].min(), z[rim].max()
        vals = out[comp]
        assert vals.min() >= lo and vals.max() <= hi


@pytest.mark.parametrize("seed", range(10))
def test_maximum_principle(seed):
    rng = np.random.default_rng(seed)
    z, hole = piecewise_smooth(rng)
    z = DepthMap(np.where(hole, 0, z)).data.astype(np.float64)
    res = complete_depth(DepthMap(z), BinaryMask(hole))
    check_maximum_principle(z, hole, res.depth.data)


@pytest.mark.parametrize("seed", range(5))
def test_beats_nearest_fill(seed):
    # Holes lie inside one smooth piece; across a depth edge nearest fill can win.
    rng = np.random.default_rng(100 + seed)
    z, hole = piecewise_smooth(rng, hole_inside_block=True)
    masked = DepthMap(np.where(hole, 0, z))
    fill = BinaryMask(hole)
    gt = DepthMap(z)
    harmonic = evaluate(complete_depth(masked, fill).depth, gt, fill).rmse
    nearest = evaluate(nearest_fill(masked, fill), gt, fill).rmse
    assert harmonic < nearest

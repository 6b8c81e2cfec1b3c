"""Classical hole filling: harmonic (Laplace) interpolation of depth.

A stand-in completer so masked pairs can be completed and scored without a
trained network.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import BinaryMask, DepthMap, check_same_shape

DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITER = 10_000

_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class CompletionResult:
    depth: DepthMap
    iterations: int
    converged: bool
    max_update: float
    unfilled_components: list = field(default_factory=list)


def _shift(a, dy, dx, fill):
    out = np.full_like(a, fill)
    h, w = a.shape
    out[max(dy, 0) : h + min(dy, 0), max(dx, 0) : w + min(dx, 0)] = a[
        max(-dy, 0) : h + min(-dy, 0), max(-dx, 0) : w + min(-dx, 0)
    ]
    return out


_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def _nearest_boundary_init(z, known, labels, n_comp):
    """Seed each hole component from the nearest known pixel on its own rim."""
    out = z.copy()
    orphaned = []
    slices = ndimage.find_objects(labels)
    h, w = z.shape
    for idx in range(1, n_comp + 1):
        sl = slices[idx - 1]
        y0, y1 = max(sl[0].start - 1, 0), min(sl[0].stop + 1, h)
        x0, x1 = max(sl[1].start - 1, 0), min(sl[1].stop + 1, w)
        comp = labels[y0:y1, x0:x1] == idx
        rim = ndimage.binary_dilation(comp, _FOUR) & known[y0:y1, x0:x1]
        if not rim.any():
            orphaned.append(idx)
            continue
        _, (iy, ix) = ndimage.distance_transform_edt(~rim, return_indices=True)
        local = z[y0:y1, x0:x1]
        out[y0:y1, x0:x1][comp] = local[iy[comp], ix[comp]]
    return out, orphaned


def _relax(z, known, active, iterations, tol, omega):
    """Red-black sweeps in place on ``z``; returns (sweeps, last max update)."""
    usable = known | active
    # Neighbour weights: 1 where the neighbour can take part in the average.
    weights = [_shift(usable, dy, dx, False).astype(np.float64) for dy, dx in _OFFSETS]
    count = sum(weights)
    active = active & (count > 0)
    yy, xx = np.indices(z.shape)
    colors = [active & ((yy + xx) % 2 == c) for c in (0, 1)]

    it, delta = 0, np.inf
    while it < iterations:
        delta = 0.0
        for sel in colors:
            if not sel.any():
                continue
            total = sum(w * _shift(z, dy, dx, 0.0) for w, (dy, dx) in zip(weights, _OFFSETS))
            step = omega * (total[sel] / count[sel] - z[sel])
            z[sel] += step
            delta = max(delta, float(np.abs(step).max()))
        it += 1
        if delta < tol:
            break
    return it, delta


def complete_depth(
    masked: DepthMap,
    fill_region: BinaryMask,
    iterations: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    omega: float = 1.0,
) -> CompletionResult:
    """Fill ``fill_region`` by iterated 4-neighbour averaging.

    Neighbours that are outside the image, or zero and outside the region,
    are left out of the average. Red-black Gauss-Seidel sweeps run until the
    largest update drops below ``tol`` or ``iterations`` sweeps have run.
    ``omega > 1`` over-relaxes; the default of 1 keeps every iterate inside
    the range of the rim values.

    Components with no known pixel on their rim stay at 0 and are listed in
    ``unfilled_components`` as ``(label, pixel_count)``.
    """
    if iterations <= 0:
        raise ValueError("iterations must be positive")
    check_same_shape(masked, fill_region)
    z = masked.data.astype(np.float64)
    fill = fill_region.as_bool()
    if np.any(z[fill] != 0):
        raise ValueError("fill_region must only cover zero-depth pixels")
    if not fill.any():
        return CompletionResult(masked, 0, True, 0.0)

    known = (z > 0) & ~fill
    labels, n_comp = ndimage.label(fill, structure=_FOUR)
    z, orphaned = _nearest_boundary_init(z, known, labels, n_comp)
    active = fill & ~np.isin(labels, orphaned)

    it, delta = 0, np.inf
    if active.any():
        # Iterate on the bounding box of the hole plus a one-pixel rim.
        ys, xs = np.nonzero(active)
        h, w = z.shape
        box = (
            slice(max(ys.min() - 1, 0), min(ys.max() + 2, h)),
            slice(max(xs.min() - 1, 0), min(xs.max() + 2, w)),
        )
        it, delta = _relax(z[box], known[box], active[box], iterations, tol, omega)

    unfilled = [(int(i), int(np.sum(labels == i))) for i in orphaned]
    return CompletionResult(
        depth=DepthMap(z.astype(np.float64)),
        iterations=it,
        converged=bool(delta < tol) or not active.any(),
        max_update=float(delta) if np.isfinite(delta) else 0.0,
        unfilled_components=unfilled,
    )


def nearest_fill(masked: DepthMap, fill_region: BinaryMask) -> DepthMap:
    """Copy the nearest known depth into every hole pixel (comparison baseline)."""
    z = masked.data
    known = (z > 0) & ~fill_region.as_bool()
    if not known.any():
        return masked
    _, (iy, ix) = ndimage.distance_transform_edt(~known, return_indices=True)
    out = np.where(fill_region.as_bool(), z[iy, ix], z)
    return DepthMap(out)

"""
Masking a synthetic tabletop frame
==================================

Builds one frame with two opaque boxes and one transparent box, then shows
how erosion decides which pixels of the input depth survive.
"""
import numpy as np

from transmask import MaskingConfig, synthesize_pair
from transmask.maskgen import artificial_hole
from transmask.synthetic import make_scene

rgb, depth, masks = make_scene(np.random.default_rng(4))
print(f"{len(masks.non_trans_masks)} opaque and {len(masks.trans_masks)} transparent objects")


def show(mask, title):
    # One character per pixel, every other row so the aspect looks right.
    print(title)
    for row in mask[::2]:
        print("".join("#" if v else "." for v in row))
    print()


###############################################################################
# With erosion, only a thin rim of each opaque object is kept in the input
# and its interior becomes an artificial hole for self-supervision.

pair = synthesize_pair(rgb, depth, masks, MaskingConfig())
show(pair.final_mask.as_bool(), "kept pixels (erosion on)")
show(artificial_hole(pair).as_bool(), "artificial holes")

###############################################################################
# Without erosion the whole object disappears, so nothing inside the hole
# tells a completer where the object edges are.

flat = synthesize_pair(rgb, depth, masks, MaskingConfig(erosion_enabled=False))
print("hole pixels with erosion:   ", artificial_hole(pair).count())
print("hole pixels without erosion:", artificial_hole(flat).count())
print("invariant violations:", pair.invariant_violations() + flat.invariant_violations())

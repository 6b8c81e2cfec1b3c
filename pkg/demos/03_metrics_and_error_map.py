"""
Scoring a prediction and drawing its error
==========================================
"""
import tempfile
from pathlib import Path

import numpy as np

from transmask import BinaryMask, DepthMap, error_map, evaluate
from transmask.dataset_io import save_rgb
from transmask.metrics import MetricAccumulator

rng = np.random.default_rng(2)
gt = DepthMap(rng.uniform(0.6, 1.2, (32, 32)))
mask = np.zeros((32, 32), bool)
mask[8:24, 8:24] = True
mask = BinaryMask(mask)

# Relative error grows from left to right across the transparent square.
ramp = np.linspace(0.0, 0.15, 32)[None, :]
pred = DepthMap(gt.data * (1 + ramp))

report = evaluate(pred, gt, mask)
print(report.to_line())

###############################################################################
# Reports pool by pixel, not by frame: a tiny frame with a large error does
# not dominate a large frame that is almost right.

acc = MetricAccumulator()
acc.add(pred, gt, mask)
acc.add(DepthMap([[2.0]]), DepthMap([[1.0]]), BinaryMask([[1]]))
print(acc.report().to_line())

###############################################################################
# White means no error and red means at least ``max_rel`` relative error.

img = error_map(pred, gt, mask, max_rel=0.10)
out = Path(tempfile.mkdtemp()) / "error_map.png"
save_rgb(out, img)
print("row 16 colors, left to right:", [tuple(int(c) for c in img.data[16, x]) for x in (8, 16, 23)])
print("wrote", out)

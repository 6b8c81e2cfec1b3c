"""
Does erosion help a simple completer?
=====================================

Runs the command line pipeline twice on a generated dataset, with and
without erosion, fills every artificial hole with the harmonic baseline
and pools the metrics over all frames.
"""
import tempfile
from pathlib import Path

from transmask import complete_depth
from transmask.cli import main
from transmask.dataset_io import read_pair, read_run_manifest
from transmask.maskgen import artificial_hole
from transmask.metrics import MetricAccumulator
from transmask.synthetic import write_dataset

work = Path(tempfile.mkdtemp())
root = write_dataset(work / "data", n_scenes=3, n_frames=4, seed=21)

for name, extra in (("erosion", []), ("no erosion", ["--no-erosion"])):
    out = work / name.replace(" ", "_")
    main(["synthesize", "--root", str(root), "--out", str(out), *extra])
    _, entries = read_run_manifest(out / "manifest.jsonl")
    acc = MetricAccumulator()
    for e in entries:
        pair = read_pair(out / e["dir"])
        hole = artificial_hole(pair)
        acc.add(complete_depth(pair.masked_depth, hole).depth, pair.target_depth, hole)
    print(f"{name:10s} {acc.report().to_line()}")

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from transmask import CameraIntrinsics  # noqa: E402
from transmask.synthetic import make_scene, write_dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=120.0, fy=120.0, cx=31.5, cy=23.5)


@pytest.fixture
def scene():
    return make_scene(np.random.default_rng(7))


@pytest.fixture
def dataset(tmp_path):
    """Two scenes of three frames each, written in the on-disk layout."""
    root = tmp_path / "data"
    write_dataset(root, n_scenes=2, n_frames=3, seed=3)
    return root


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_criterion_")
        number, _, title = name.partition("_")
        _CRITERIA[int(number)] = (title.replace("_", " "), report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, secs = _CRITERIA[number]
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} ({secs:.2f} s)"
        )

import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tschief import _kernels

# the backend fixture only selects a module-level switch, so reusing it across examples is safe
settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("default")

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "ucr"


def ucr_paths(name):
    """TRAIN/TEST paths for a dataset, looking in the bundled data then $UCR_ARCHIVE_DIR."""
    roots = [DATA_DIR]
    if os.environ.get("UCR_ARCHIVE_DIR"):
        roots.append(Path(os.environ["UCR_ARCHIVE_DIR"]))
    for root in roots:
        for ext in ("tsv", "csv", "txt"):
            train = root / name / f"{name}_TRAIN.{ext}"
            test = root / name / f"{name}_TEST.{ext}"
            if train.exists() and test.exists():
                return train, test
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    prev = _kernels.BACKEND
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    verdict = "PASS" if passed else "FAIL"
    line = f"criterion {number:>2}: {verdict}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

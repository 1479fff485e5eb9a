import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from restart_grade.kernels import compiled_available  # noqa: E402

BACKENDS = ["python"] + (["compiled"] if compiled_available() else [])

# (label, passed, detail) rows printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    os.environ["RESTART_GRADE_CACHE"] = str(tmp_path_factory.mktemp("cache"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def planar_profile():
    from restart_grade.harmonic import build_profile, potential_kernel

    return build_profile(potential_kernel(64))


@pytest.fixture(scope="session")
def planar_envelopes(planar_profile):
    from restart_grade.bounds import fit_envelope_2d

    return fit_envelope_2d(planar_profile)


@pytest.fixture(scope="session")
def spatial_profile():
    from restart_grade.harmonic import build_profile, green_table

    return build_profile(green_table(14, 3))


@pytest.fixture(scope="session")
def spatial_envelopes(spatial_profile):
    from restart_grade.bounds import fit_envelope_d

    return fit_envelope_d(spatial_profile)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")

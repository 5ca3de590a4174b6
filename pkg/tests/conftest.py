import numpy as np
import pytest
from hypothesis import settings

from dmtrack.complex import circle_complex
from dmtrack.gradient_build import VertexField, lower_star_field

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# circle_complex(4): vertices 0..3, edge 4+i joins v_i and v_{i+1 mod 4}
E01, E12, E23, E30 = 4, 5, 6, 7


@pytest.fixture
def circle4():
    cx = circle_complex(4)
    vf = VertexField(np.array([0.0, 2.0, 1.0, 3.0]))
    return cx, vf, lower_star_field(cx, vf)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

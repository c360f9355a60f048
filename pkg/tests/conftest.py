import pytest

from expfun import families
from expfun.transforms import theorem1_forward

# lines reported by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


def subordinator_families():
    return [
        families.pure_drift(1.0),
        families.pure_killing(0.7),
        families.exponential_jump(1.0, 1.0),
        families.exponential_jump(2.0, 3.0, b=0.5, q=0.2),
        families.stable_example(0.3),
        families.stable_example(0.5),
        families.stable_example(0.7),
        families.dual_example(0.5),
    ]


def sn_families():
    return [
        families.brownian(1.0, 1.0),
        families.brownian(0.0, 2.0),
        families.brownian_exp(),
        theorem1_forward(families.exponential_jump()),
        theorem1_forward(families.stable_example(0.5)),
    ]


@pytest.fixture
def bm():
    return families.brownian(1.0, 1.0)

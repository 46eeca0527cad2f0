from pathlib import Path

import numpy as np
import pytest

from nvfuse.data import Dataset, load_csv

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
SALES = FIXTURES / "sales_ab.csv"

# Table 1, row-major
A = [6576, 4263, 5340, 3697, 3535, 2651, 2541, 2351, 3611, 3867, 4257, 6204,
     6666, 4364, 5441, 3727, 3495, 2755, 2399, 2452, 3621, 3961, 4291, 6264,
     6600, 4333, 5391, 3732, 3662, 2498, 2576, 2402, 3588, 3900, 4220, 6214]
B = [215, 142, 155, 97, 101, 83, 104, 96, 102, 101, 130, 215,
     223, 134, 157, 99, 99, 87, 100, 97, 98, 104, 131, 202,
     211, 139, 150, 100, 105, 82, 103, 98, 100, 102, 127, 219]

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sales():
    return load_csv(SALES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def random_dataset(rng, n=40, rho=0.7):
    z = rng.standard_normal((n, 2))
    a = 100 + 15 * z[:, 0]
    b = 50 + 5 * (rho * z[:, 0] + np.sqrt(1 - rho**2) * z[:, 1])
    return Dataset({"A": a, "B": b})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest

from stlab.elliptic import EllipticCurve
from stlab.forms import NewformSpec, build_table

CURVE_11A1 = EllipticCurve(0, -1, 1, -10, -20)
CURVE_37A1 = EllipticCurve(0, 0, 1, -1, 0)
CURVE_X3_X_1 = EllipticCurve(0, 0, 0, -1, 1)


@pytest.fixture(scope="session")
def tau_small():
    return build_table(NewformSpec.ramanujan_tau(), 200_000)


@pytest.fixture(scope="session")
def ec_small():
    return build_table(NewformSpec.elliptic(CURVE_37A1, 37, "37a1"), 200_000)


@pytest.fixture
def write_csv(tmp_path):
    def _write(rows, name="table.csv", header="p,a"):
        path = tmp_path / name
        lines = ["# synthetic", header] + [f"{p},{a}" for p, a in rows]
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)

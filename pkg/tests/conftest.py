import pytest

from mobius_va import build_Y, heisenberg, virasoro


@pytest.fixture(scope="session")
def heis4():
    return heisenberg(4)


@pytest.fixture(scope="session")
def heis4_va(heis4):
    return build_Y(heis4.space, [heis4.generator])


@pytest.fixture(scope="session")
def ising_keep():
    return virasoro("1/2", 6, null="keep")


@pytest.fixture(scope="session")
def ising_keep_va(ising_keep):
    return build_Y(ising_keep.space, [ising_keep.generator])


@pytest.fixture(scope="session")
def ising():
    return virasoro("1/2", 6, null="quotient")


@pytest.fixture(scope="session")
def ising_va(ising):
    return build_Y(ising.space, [ising.generator])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

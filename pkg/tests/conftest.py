import os
import tempfile

import pytest

# Keep generated tables out of the user's cache unless a directory is given.
if not os.environ.get("MPC_TABLE_DIR"):
    os.environ["MPC_TABLE_DIR"] = os.path.join(tempfile.gettempdir(), "majsynth-test-tables")


@pytest.fixture(scope="session")
def tables3():
    from majsynth.tables import get_tables

    return get_tables(3)


@pytest.fixture(scope="session")
def tables4():
    from majsynth.tables import get_tables

    return get_tables(4)


@pytest.fixture(scope="session")
def tables5():
    from majsynth.tables import get_tables

    return get_tables(5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)

import pytest

from etpa.config import load_config, with_overrides


@pytest.fixture(scope="session")
def ref_cfg():
    return load_config("paper")


@pytest.fixture(scope="session")
def small_cfg(ref_cfg):
    """Bundled config with the source turned down so Monte Carlo runs are quick."""
    return with_overrides(ref_cfg, "source", pair_rate_per_watt=2.0e6)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

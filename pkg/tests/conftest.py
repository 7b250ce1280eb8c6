import pytest

from whitefi.config import ScenarioConfig
from whitefi.engine import S
from whitefi.traffic import FlowSpec


@pytest.fixture
def two_node():
    """Factory for a quiet two-node ad hoc scenario."""
    def make(flows=(), **kw):
        kw.setdefault("duration", 1 * S)
        return ScenarioConfig(nodes=2, flows=tuple(flows), **kw).validate()
    return make


def voice(src=0, dst=1, **kw):
    return FlowSpec(src, dst, "VoiceCBR", **kw)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])

import numpy as np
import pytest

from waybound.sampling import stream

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return stream(20240613)


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _RESULTS.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def assert_close(a, b, atol=1e-12):
    np.testing.assert_allclose(np.asarray(a), np.asarray(b), atol=atol, rtol=0)

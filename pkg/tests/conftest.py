import pytest


@pytest.fixture
def announce(capsys):
    """Print one verdict line per acceptance gate, then enforce it."""

    def _announce(criterion: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, f"{criterion}: {detail}"

    return _announce

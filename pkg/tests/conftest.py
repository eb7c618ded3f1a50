import pytest

from stickerpack.album import AlbumConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def toy():
    """B=16, n=P=2: two sheets of 4 x 2 stickers."""
    return AlbumConfig(16, 2, 2, display_packets=2, name="toy")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

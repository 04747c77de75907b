import os

import pytest

os.environ.setdefault("HYPOTHESIS_PROFILE", "default")

from hypothesis import settings  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile(os.environ["HYPOTHESIS_PROFILE"])


@pytest.fixture
def corpus():
    from leakcheck.corpus import corpus_dir

    return corpus_dir()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

import json
from pathlib import Path

import pytest

from loanverbs.lexicon import default_lexicon
from loanverbs.matcher import Matcher
from loanverbs.morphology import expand_lexicon

FIXTURES = Path(__file__).parent / "fixtures"
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def manifest():
    return json.loads((FIXTURES / "manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon("loanword") + default_lexicon("native")


@pytest.fixture(scope="session")
def expanded(lexicon):
    return expand_lexicon(lexicon)


@pytest.fixture(scope="session")
def loan_expanded():
    return expand_lexicon(default_lexicon("loanword"))


@pytest.fixture(scope="session")
def matcher(expanded):
    return Matcher(expanded)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

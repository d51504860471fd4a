import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def report(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report

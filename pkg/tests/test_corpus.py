"""Every example fixture must report its recorded verdict."""

from __future__ import annotations

import pytest

from itrsbench.corpus import FIXTURES


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture(name):
    report = FIXTURES[name]()
    failed = [c for c in report.checks if not c.passed]
    assert not failed, [f"{c.label}: {c.detail}" for c in failed]

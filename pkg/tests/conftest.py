import itertools

import pytest

from ncaffine.exactlin import QQ, GF


def s3_table():
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    return [[idx[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms]


@pytest.fixture
def F2():
    return GF(2)


@pytest.fixture
def Q():
    return QQ


_CRITERIA = {}


@pytest.fixture
def record_criterion():
    def record(n, ok, detail):
        _CRITERIA[n] = (ok, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

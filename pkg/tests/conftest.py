import time

import numpy as np
import pytest

from cosmiclab.engine import Schedule, iterate
from cosmiclab.prox2d import GammaAudit, build_paper_operator, paper_handle, xi, zeta
from cosmiclab.seqspace import TruncatedGradientOperator

LONG_RUN = 20_000_000
SEQ_RUN = 100_000
N_MAX = 8

_LINES = []


class Recorder:
    def __call__(self, number: int, name: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}"
        if detail:
            line += f"  ({detail})"
        _LINES.append((number, line))
        print(line)
        return passed


@pytest.fixture
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def paper_op():
    return build_paper_operator(N_MAX)


LIMIT_DIRECTIONS = (np.array([2.0, 1.0]) / np.sqrt(5), np.array([1.0, 1.0]) / np.sqrt(2))


class InnerProductWatch:
    """Largest one-step decrease of ``<x^k, q>`` over every iterate."""

    def __init__(self, qs):
        self.qs = np.array(qs)
        self.worst_drop = np.full(len(qs), -np.inf)

    def __call__(self, k0, prev, rows):
        vals = np.vstack([prev[None, :], rows]) @ self.qs.T
        self.worst_drop = np.maximum(self.worst_drop, (vals[:-1] - vals[1:]).max(axis=0))


def _long_run(op, x0):
    audit = GammaAudit(op, [(xi(n), zeta(n)) for n in range(1, 6)])
    watch = InnerProductWatch(LIMIT_DIRECTIONS)
    sched = Schedule(ratio=2.0, indices=(LONG_RUN // 100,), levels=True)
    t0 = time.perf_counter()
    traj = iterate(paper_handle(op, 1e-12), x0, LONG_RUN, sched, [audit, watch])
    return traj, audit, watch, time.perf_counter() - t0


@pytest.fixture(scope="session")
def origin_run(paper_op):
    """Full-length run from the origin: (trajectory, audit, watch, seconds)."""
    return _long_run(paper_op, (0.0, 0.0))


@pytest.fixture(scope="session")
def offset_run(paper_op):
    return _long_run(paper_op, (10.0, -7.0))


@pytest.fixture(scope="session")
def seq_run():
    op = TruncatedGradientOperator(512)
    sched = Schedule(indices=(100, 1_000, 10_000, SEQ_RUN))
    return op, iterate(op.handle(), np.zeros(512), SEQ_RUN, sched)

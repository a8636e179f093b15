import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from shardsim.consensus import BlockVerificationTable, ShardBvt, VoteOutcome

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

V, I, M = VoteOutcome.VALID, VoteOutcome.INVALID, VoteOutcome.MISSING


def make_bvt(members, outcomes, leads=1, shard=0):
    """One-shard BVT with the round-robin schedule repeated ``leads`` times."""
    members = np.asarray(members)
    schedule = np.tile(np.arange(len(members)), leads)
    return BlockVerificationTable((ShardBvt(shard, members, schedule,
                                            np.asarray(outcomes, dtype=np.int8)),))


@pytest.fixture
def bvt_factory():
    return make_bvt


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one pass/fail line per criterion; printed in the terminal summary."""
    def report(k: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

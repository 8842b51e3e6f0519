"""Tests for the built-in oracle suites."""

import pytest

from perm_converse.services.oracles import run_oracles, verify_covering, verify_lemma2, verify_np
from perm_converse.utils import DomainError


def test_np_oracle_all_instances():
    checks = verify_np(12)
    assert len(checks) == 12 * 3 * 2
    failed = [c for c in checks if not c.passed]
    assert not failed, failed[:3]


def test_covering_oracle():
    checks = verify_covering()
    assert [c.passed for c in checks] == [True, True]


def test_lemma2_oracle_has_no_violations():
    checks = verify_lemma2(50, seed=0)
    assert len(checks) == 50
    failed = [c for c in checks if not c.passed]
    assert not failed, failed[:3]


def test_run_oracles_rejects_unknown_suite():
    with pytest.raises(DomainError):
        run_oracles(["nope"])


def test_run_oracles_small_np_suite():
    checks = run_oracles(["np"], n_max=3)
    assert all(c.passed for c in checks)
    assert checks[0].name.startswith("np n=1")

"""All acceptance checks at their stated sizes and tolerances.

Each check prints one PASS/FAIL line (visible even without ``-s``).
"""
import pytest

from condcodes import acceptance, ensembles

NUMBERED = [c for c in acceptance.REGISTRY if c.number is not None]


@pytest.mark.slow
@pytest.mark.parametrize("chk", NUMBERED, ids=[f"{c.number:02d}-{c.key}" for c in NUMBERED])
def test_criterion(chk, capsys):
    res = chk.fn(0)
    with capsys.disabled():
        print(f"\n  criterion {chk.number}: {res.line()}")
    assert res.passed, res.measured


def test_ensemble_invariants_pass():
    (chk,) = acceptance.select("ensemble-invariants")
    assert chk.fn(0).passed


def test_sabotaged_repair_fails_invariants(monkeypatch):
    monkeypatch.setattr(ensembles, "repair_rank", lambda m: m)
    (chk,) = acceptance.select("ensemble-invariants")
    res = chk.fn(0)
    assert not res.passed and res.metrics["bad"] > 0


def test_registry_covers_all_criteria():
    assert sorted(c.number for c in NUMBERED) == list(range(1, 11))

import pytest

from renewal.bijections import DomainError
from renewal.verification import SUITES, CheckResult, run_checks


def test_all_suite_names_exposed():
    assert SUITES == ("closed-forms", "bijections", "solver", "simulation")


def test_closed_forms_suite_green():
    results = run_checks(["closed-forms"])
    assert results and all(r.passed for r in results), [
        (r.name, r.detail) for r in results if not r.passed
    ]
    assert all(isinstance(r, CheckResult) and r.suite == "closed-forms" for r in results)


def test_bijections_suite_green():
    results = run_checks(["bijections"])
    assert results and all(r.passed for r in results), [
        (r.name, r.detail) for r in results if not r.passed
    ]


def test_solver_suite_green_at_default_step():
    results = run_checks(["solver"])
    assert results and all(r.passed for r in results), [
        (r.name, r.detail) for r in results if not r.passed
    ]


def test_solver_suite_red_at_coarse_step():
    results = run_checks(["solver"], step=5e-2, t_max=5.0)
    names_failed = {r.name for r in results if not r.passed}
    assert "solver-vs-product-form" in names_failed
    assert "solver-vs-sum-count" in names_failed


def test_duplicate_suites_run_once():
    results = run_checks(["closed-forms", "closed-forms"])
    names = [r.name for r in results]
    assert len(names) == len(set(names))


def test_validation():
    with pytest.raises(DomainError, match="unknown suite"):
        run_checks(["bogus"])
    with pytest.raises(DomainError):
        run_checks(["solver"], step=0.2)
    with pytest.raises(DomainError):
        run_checks(["solver"], t_max=1.0)
    with pytest.raises(DomainError):
        run_checks(["simulation"], samples=10)

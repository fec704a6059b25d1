"""Shared fixtures and the acceptance-verdict summary hook."""
import pytest

import ancoh

# Filled by tests/test_acceptance.py; one entry per numbered criterion.
ACCEPTANCE = {}
N_CRITERIA = 9


def record(num, label, ok, detail=""):
    """Store a criterion verdict for the terminal summary, then assert it."""
    ACCEPTANCE[num] = (label, bool(ok), detail)
    assert ok, f"criterion {num} ({label}): {detail}"


@pytest.fixture(scope="session")
def harm_spectrum():
    p = ancoh.ModelParams(omega=1.0, lam=0.0, hbar=1.0, model_kind="diagonal")
    return ancoh.solve_spectrum(p, dim=128, n_want=140)


@pytest.fixture(scope="session")
def diag_spectrum():
    # lam=0.1, enough levels for rho=8 states (truncation needs 129)
    p = ancoh.ModelParams(omega=1.0, lam=0.1, hbar=1.0, model_kind="diagonal")
    return ancoh.solve_spectrum(p, dim=128, n_want=160)


@pytest.fixture(scope="session")
def quartic_spectrum():
    # lam=0.1; 40 levels converge comfortably at basis 192 against 384
    p = ancoh.ModelParams(omega=1.0, lam=0.1, hbar=1.0, model_kind="quartic")
    return ancoh.solve_spectrum(p, dim=192, n_want=40)


@pytest.fixture(scope="session")
def quartic04_spectrum():
    p = ancoh.ModelParams(omega=1.0, lam=0.4, hbar=1.0, model_kind="quartic")
    return ancoh.solve_spectrum(p, dim=128, n_want=20)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in range(1, N_CRITERIA + 1):
        if num not in ACCEPTANCE:
            terminalreporter.write_line(f"criterion {num}: NOT RUN")
            continue
        label, ok, detail = ACCEPTANCE[num]
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {num}: {verdict}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

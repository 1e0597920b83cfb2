import json
import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def load_fixture(name):
    with open(os.path.join(FIXTURES, name)) as f:
        return json.load(f)


def parse_product(text: str) -> list[list[int]]:
    """'2^6 * 3^4 * 41' -> [[2, 6], [3, 4], [41, 1]]"""
    out = []
    for term in text.split("*"):
        base, _, exp = term.strip().partition("^")
        out.append([int(base), int(exp) if exp else 1])
    return out


@pytest.fixture(scope="session")
def twin_oracle():
    data = load_fixture("twin_oracle.json")
    return data["limit"], {int(B): ms for B, ms in data["twins"].items()}


@pytest.fixture(scope="session")
def reference_pairs():
    return load_fixture("reference_pairs.json")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# criterion -> list of (part, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, title: str, part: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, {"title": title, "parts": []})["parts"].append((part, passed, detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[n]
        ok = all(p[1] for p in entry["parts"])
        details = "; ".join(f"{part}: {detail}" + ("" if passed else " [FAIL]") for part, passed, detail in entry["parts"])
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {entry['title']}  ({details})")

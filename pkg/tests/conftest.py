import re

import pytest
from hypothesis import settings

settings.register_profile("muibfd", max_examples=60, deadline=None)
settings.load_profile("muibfd")

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_(a\d+)_", item.name)
    if m and item.module.__name__.endswith("test_acceptance") and rep.when == "call":
        detail = dict(item.user_properties).get("detail", "")
        _ACCEPTANCE[m.group(1).upper()] = (rep.outcome, detail)
    elif m and rep.when == "setup" and rep.outcome != "passed":
        _ACCEPTANCE.setdefault(m.group(1).upper(), (rep.outcome, "setup failed"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[1:])):
        outcome, detail = _ACCEPTANCE[key]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{key}: {status}  {detail}")

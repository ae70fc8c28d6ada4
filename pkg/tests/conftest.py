import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(k, title): acceptance criterion k")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    k, title = mark.args
    entry = item.config._acceptance.setdefault(k, {"title": title, "ok": True, "details": []})
    entry["ok"] &= rep.passed
    if rep.when == "call":
        entry["details"] += [v for key, v in item.user_properties if key == "detail"]
        if rep.failed:
            entry["details"].append(f"{item.name} failed")


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        e = results[k]
        terminalreporter.write_line(f"ACCEPTANCE {k} {'PASS' if e['ok'] else 'FAIL'}: {e['title']}")
        for d in e["details"]:
            terminalreporter.write_line(f"    {d}")

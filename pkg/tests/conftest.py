import json

import pytest


@pytest.fixture
def rig_dict():
    return {
        "fx": 1000.0,
        "fy": 1000.0,
        "cx": 320.0,
        "cy": 240.0,
        "baseline_m": 0.2,
        "image_width": 640,
        "image_height": 480,
    }


@pytest.fixture
def write_json(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj), encoding="utf-8")
        return path

    return _write


# --- acceptance reporting -------------------------------------------------
# Tests marked ``acceptance("name")`` get one PASS/FAIL line in the terminal
# summary, with whatever they attached via ``record_property("detail", ...)``.


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion")
    config._acceptance_rows = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        item.config._acceptance_rows.append((marker.args[0], rep.passed, "; ".join(details)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_acceptance_rows", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in rows:
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)

import pytest

_outcomes = {}
_TITLES = {
    1: "exhaustive small-n counts",
    2: "G(n,1/2) controllable fraction",
    3: "loops variant",
    4: "exact-rank soundness",
    5: "shift equivalence",
    6: "simple spectrum",
    7: "LCD invariants",
    8: "eigenvector structure",
    9: "small-ball machinery",
    10: "symmetrization",
    11: "determinism across worker counts",
}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    k = mark.args[0]
    ok = rep.passed if rep.when == "call" else False
    _outcomes.setdefault(k, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_outcomes):
        results = _outcomes[k]
        status = "PASS" if all(ok for _, ok in results) else "FAIL"
        failed = [name for name, ok in results if not ok]
        extra = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {k:2d} {status}  {_TITLES[k]}{extra}")

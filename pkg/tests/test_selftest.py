"""The built-in consistency battery must be green and well-formed."""

from uavmec import selftest


def test_battery_is_green():
    results = selftest.run_checks()
    assert len(results) >= 8
    names = [name for name, _, _ in results]
    assert len(names) == len(set(names))
    failed = [(n, d) for n, ok, d in results if not ok]
    assert failed == []


def test_format_lines():
    lines = selftest.format_lines([("alpha", True, "fine"), ("beta", False, "broke")])
    assert lines == ["PASS alpha: fine", "FAIL beta: broke"]

import math

from etpa.report import Report, parse_report


def test_machine_form_roundtrip():
    r = Report("demo")
    r.add("rate", 2.194e-6, "s^-1", 3.2e-7)
    r.add("points", 7)
    r.add("flag", True)
    r.add("kind", "quadratic")
    r.note("hello")
    text = r.to_text()
    assert text.splitlines()[:2] == ["# schema=1", "# report=demo"]
    parsed = parse_report(text)
    value, err, unit = parsed["rate"]
    assert math.isclose(value, 2.194e-6, rel_tol=1e-9) and unit == "s^-1"
    assert parsed["points"] == (7, None, "1")
    assert parsed["flag"] == (True, None, "1")
    assert parsed["kind"] == ("quadratic", None, "1")


def test_every_line_has_a_unit():
    r = Report("u")
    r.add("x", 1.0)
    line = r.to_text().splitlines()[2]
    assert line.startswith("x [1] = ")

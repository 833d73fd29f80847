from hypothesis import settings

# property suites must be reproducible run to run
settings.register_profile("default", deadline=None, derandomize=True, print_blob=True)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call":
                continue
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props:
                rows.append((props["criterion"], outcome, props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for crit, outcome, detail in sorted(rows, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if outcome == 'passed' else 'FAIL'}  {detail}")

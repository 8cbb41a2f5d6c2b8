import re


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) == "call":
                lines += [v for k, v in rep.user_properties if k == "acceptance"]
    if not lines:
        return
    key = lambda s: int(re.search(r"criterion (\d+)", s).group(1))
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=key):
        terminalreporter.write_line(line)

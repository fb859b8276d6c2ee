import sys


def pytest_terminal_summary(terminalreporter):
    results = {}
    for mod in list(sys.modules.values()):
        found = getattr(mod, "ACCEPTANCE_RESULTS", None)
        if isinstance(found, dict):
            results.update(found)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(results):
        title, ok, dt, budget = results[num]
        limit = f" (budget {budget:g}s)" if budget else ""
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title} in {dt:.2f}s{limit}")
    tr.write_line(f"{sum(r[1] for r in results.values())}/{len(results)} criteria passed")

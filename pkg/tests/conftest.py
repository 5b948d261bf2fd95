def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, seconds, note = RESULTS[n]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({seconds:.2f}s)"
        terminalreporter.write_line(line + (f" {note}" if note else ""))
